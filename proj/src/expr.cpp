#include "minsurf/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "minsurf/errors.hpp"

namespace minsurf::expr {
namespace {

using NodePtr = std::shared_ptr<const Node>;

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr std::array<FuncName, 7> kFunctions{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"exp", Func::Exp},
    {"ln", Func::Ln},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
}};

std::string_view func_name(Func f) {
  for (const auto& fn : kFunctions)
    if (fn.func == f) return fn.name;
  return "?";
}

NodePtr make_literal(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Literal;
  n->value = v;
  return n;
}

NodePtr make_variable(std::size_t k) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->var = k;
  n->constant = false;
  return n;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = lhs->constant && (!rhs || rhs->constant);
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_call(Func f, NodePtr arg) {
  auto n = make_node(Op::Call, std::move(arg));
  std::const_pointer_cast<Node>(n)->func = f;
  return n;
}

// Recursive-descent parser over the raw source; positions are 0-based byte
// offsets into the source.
class Parser {
public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    NodePtr e = expr();
    skip_ws();
    if (pos_ < src_.size())
      throw SyntaxError(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make_node(Op::Add, lhs, term());
      else if (accept('-'))
        lhs = make_node(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make_node(Op::Mul, lhs, unary());
      else if (accept('/'))
        lhs = make_node(Op::Div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_node(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw SyntaxError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is 2 followed by the name e
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw SyntaxError(start, "malformed number");
    return make_literal(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string id(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      for (const auto& fn : kFunctions) {
        if (fn.name == id) {
          NodePtr arg = expr();
          if (!accept(')')) throw SyntaxError(pos_, "expected ')' after argument of " + id);
          return make_call(fn.func, arg);
        }
      }
      throw UnknownFunction(id);
    }
    for (std::size_t k = 0; k < vars_.size(); ++k)
      if (vars_[k] == id) return make_variable(k);
    if (id == "pi") return make_literal(std::numbers::pi);
    throw UnknownVariable(id);
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

void print(const Node* n, const std::vector<std::string>& vars, std::string& out) {
  switch (n->op) {
    case Op::Literal: {
      std::array<char, 64> buf{};
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n->value);
      (void)ec;
      out.append(buf.data(), ptr);
      return;
    }
    case Op::Variable:
      out += vars[n->var];
      return;
    case Op::Neg:
      out += "(-";
      print(n->lhs.get(), vars, out);
      out += ')';
      return;
    case Op::Call:
      out += func_name(n->func);
      out += '(';
      print(n->lhs.get(), vars, out);
      out += ')';
      return;
    default:
      break;
  }
  const char* sym = n->op == Op::Add   ? " + "
                    : n->op == Op::Sub ? " - "
                    : n->op == Op::Mul ? " * "
                    : n->op == Op::Div ? " / "
                                       : " ^ ";
  out += '(';
  print(n->lhs.get(), vars, out);
  out += sym;
  print(n->rhs.get(), vars, out);
  out += ')';
}

std::string subtree_string(const Node* n, const std::vector<std::string>& vars) {
  std::string s;
  print(n, vars, s);
  return s;
}

bool is_integer(double e) { return std::isfinite(e) && std::floor(e) == e && std::abs(e) < 1e9; }

// Value-only evaluation.
double eval_value(const Node* n, std::span<const double> x, const std::vector<std::string>& vars) {
  auto fail = [&](const char* why) -> double { throw DomainError(subtree_string(n, vars), why); };
  switch (n->op) {
    case Op::Literal: return n->value;
    case Op::Variable: return x[n->var];
    case Op::Add: return eval_value(n->lhs.get(), x, vars) + eval_value(n->rhs.get(), x, vars);
    case Op::Sub: return eval_value(n->lhs.get(), x, vars) - eval_value(n->rhs.get(), x, vars);
    case Op::Mul: return eval_value(n->lhs.get(), x, vars) * eval_value(n->rhs.get(), x, vars);
    case Op::Div: {
      const double d = eval_value(n->rhs.get(), x, vars);
      if (d == 0.0) return fail("division by zero");
      return eval_value(n->lhs.get(), x, vars) / d;
    }
    case Op::Neg: return -eval_value(n->lhs.get(), x, vars);
    case Op::Pow: {
      const double b = eval_value(n->lhs.get(), x, vars);
      const double e = eval_value(n->rhs.get(), x, vars);
      if (n->rhs->constant && is_integer(e)) {
        if (b == 0.0 && e < 0) return fail("zero raised to a negative power");
        return std::pow(b, e);
      }
      if (b <= 0.0) return fail("non-positive base with non-integer exponent");
      return std::pow(b, e);
    }
    case Op::Call: {
      const double a = eval_value(n->lhs.get(), x, vars);
      double v = 0.0;
      switch (n->func) {
        case Func::Sin: v = std::sin(a); break;
        case Func::Cos: v = std::cos(a); break;
        case Func::Tan:
          if (std::cos(a) == 0.0) return fail("tan pole");
          v = std::tan(a);
          break;
        case Func::Exp: v = std::exp(a); break;
        case Func::Ln:
          if (a <= 0.0) return fail("logarithm of non-positive argument");
          v = std::log(a);
          break;
        case Func::Sqrt:
          if (a < 0.0) return fail("square root of negative argument");
          v = std::sqrt(a);
          break;
        case Func::Abs: v = std::abs(a); break;
      }
      if (!std::isfinite(v)) return fail("non-finite result");
      return v;
    }
  }
  return fail("corrupt expression");
}

Jet2 eval_jet(const Node* n, std::span<const double> x, const std::vector<std::string>& vars,
              EvalDiagnostics* diag) {
  const std::size_t dim = x.size();
  auto fail = [&](const char* why) -> Jet2 { throw DomainError(subtree_string(n, vars), why); };
  switch (n->op) {
    case Op::Literal: return Jet2(dim, n->value);
    case Op::Variable: return Jet2::variable(dim, n->var, x[n->var]);
    case Op::Add: return eval_jet(n->lhs.get(), x, vars, diag) + eval_jet(n->rhs.get(), x, vars, diag);
    case Op::Sub: return eval_jet(n->lhs.get(), x, vars, diag) - eval_jet(n->rhs.get(), x, vars, diag);
    case Op::Mul: {
      if (n->lhs->constant) return eval_value(n->lhs.get(), x, vars) * eval_jet(n->rhs.get(), x, vars, diag);
      if (n->rhs->constant) return eval_jet(n->lhs.get(), x, vars, diag) * eval_value(n->rhs.get(), x, vars);
      return eval_jet(n->lhs.get(), x, vars, diag) * eval_jet(n->rhs.get(), x, vars, diag);
    }
    case Op::Div: {
      Jet2 d = eval_jet(n->rhs.get(), x, vars, diag);
      const double v = d.value();
      if (v == 0.0) return fail("division by zero");
      Jet2 num = eval_jet(n->lhs.get(), x, vars, diag);
      if (n->rhs->constant) return num * (1.0 / v);
      return num * d.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    }
    case Op::Neg: return -eval_jet(n->lhs.get(), x, vars, diag);
    case Op::Pow: {
      Jet2 b = eval_jet(n->lhs.get(), x, vars, diag);
      const double v = b.value();
      if (n->rhs->constant) {
        const double e = eval_value(n->rhs.get(), x, vars);
        if (is_integer(e)) {
          if (e == 0.0) return Jet2(dim, 1.0);
          if (v == 0.0 && e < 0) return fail("zero raised to a negative power");
          const double f = std::pow(v, e);
          const double df = e * std::pow(v, e - 1.0);
          const double ddf = (e == 1.0) ? 0.0 : e * (e - 1.0) * std::pow(v, e - 2.0);
          return b.compose(f, df, ddf);
        }
        if (v <= 0.0) return fail("non-positive base with non-integer exponent");
        return b.compose(std::pow(v, e), e * std::pow(v, e - 1.0),
                         e * (e - 1.0) * std::pow(v, e - 2.0));
      }
      if (v <= 0.0) return fail("non-positive base with variable exponent");
      Jet2 lnb = b.compose(std::log(v), 1.0 / v, -1.0 / (v * v));
      Jet2 prod = eval_jet(n->rhs.get(), x, vars, diag) * lnb;
      const double ev = std::exp(prod.value());
      return prod.compose(ev, ev, ev);
    }
    case Op::Call: {
      Jet2 a = eval_jet(n->lhs.get(), x, vars, diag);
      const double v = a.value();
      Jet2 r;
      switch (n->func) {
        case Func::Sin: r = a.compose(std::sin(v), std::cos(v), -std::sin(v)); break;
        case Func::Cos: r = a.compose(std::cos(v), -std::sin(v), -std::cos(v)); break;
        case Func::Tan: {
          const double c = std::cos(v);
          if (c == 0.0) return fail("tan pole");
          const double t = std::tan(v);
          const double sec2 = 1.0 + t * t;
          r = a.compose(t, sec2, 2.0 * t * sec2);
          break;
        }
        case Func::Exp: {
          const double e = std::exp(v);
          r = a.compose(e, e, e);
          break;
        }
        case Func::Ln:
          if (v <= 0.0) return fail("logarithm of non-positive argument");
          r = a.compose(std::log(v), 1.0 / v, -1.0 / (v * v));
          break;
        case Func::Sqrt: {
          // derivatives blow up at 0, so the jet needs a strictly positive argument
          if (v <= 0.0) return fail("square root of non-positive argument");
          const double s = std::sqrt(v);
          r = a.compose(s, 0.5 / s, -0.25 / (s * v));
          break;
        }
        case Func::Abs: {
          if (v == 0.0 && diag && !diag->non_c2) {
            diag->non_c2 = true;
            diag->where = subtree_string(n, vars);
          }
          const double sg = v < 0.0 ? -1.0 : 1.0;
          r = a.compose(std::abs(v), sg, 0.0);
          break;
        }
      }
      if (!std::isfinite(r.value())) return fail("non-finite result");
      return r;
    }
  }
  return fail("corrupt expression");
}

void collect_vars(const Node* n, const std::vector<std::string>& vars, std::set<std::string>& out) {
  if (!n) return;
  if (n->op == Op::Variable) out.insert(vars[n->var]);
  collect_vars(n->lhs.get(), vars, out);
  collect_vars(n->rhs.get(), vars, out);
}

}  // namespace

Expr Expr::parse(std::string_view src, std::vector<std::string> vars) {
  Parser p(src, vars);
  NodePtr root = p.parse();
  return Expr(std::move(root), std::move(vars));
}

std::set<std::string> Expr::free_variables() const {
  std::set<std::string> out;
  collect_vars(root_.get(), vars_, out);
  return out;
}

std::string Expr::to_string() const {
  if (!root_) return {};
  return subtree_string(root_.get(), vars_);
}

double Expr::eval(std::span<const double> point) const {
  if (point.size() != vars_.size())
    throw DomainError(to_string(), "point dimension does not match variable count");
  return eval_value(root_.get(), point, vars_);
}

Jet2 Expr::eval_jet2(std::span<const double> point, EvalDiagnostics* diag) const {
  if (point.size() != vars_.size())
    throw DomainError(to_string(), "point dimension does not match variable count");
  return eval_jet(root_.get(), point, vars_, diag);
}

bool structurally_equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::Literal: return a->value == b->value;
    case Op::Variable: return a->var == b->var;
    case Op::Call:
      if (a->func != b->func) return false;
      break;
    default: break;
  }
  return structurally_equal(a->lhs.get(), b->lhs.get()) && structurally_equal(a->rhs.get(), b->rhs.get());
}

bool operator==(const Expr& a, const Expr& b) {
  return a.vars_ == b.vars_ && structurally_equal(a.root_.get(), b.root_.get());
}

CurveJet eval_curve_jet(const Expr& x, const Expr& y, double t) {
  const double p[1] = {t};
  const Jet2 jx = x.eval_jet2(p);
  const Jet2 jy = y.eval_jet2(p);
  return {{jx.value(), jy.value()}, {jx.grad(0), jy.grad(0)}, {jx.hess(0, 0), jy.hess(0, 0)}};
}

}  // namespace minsurf::expr
