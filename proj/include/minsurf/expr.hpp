#pragma once

// Scalar expressions in named variables, evaluated together with their exact
// first and second derivatives.
//
// Grammar (whitespace is ignored):
//
//   expr    ::= term (('+' | '-') term)*
//   term    ::= unary (('*' | '/') unary)*
//   unary   ::= ('-' | '+') unary | power
//   power   ::= primary ('^' unary)?          right-associative
//   primary ::= number | name | name '(' expr ')' | '(' expr ')'
//
// `^` binds tighter than unary minus, so -x^2 == -(x^2). Functions: sin, cos,
// tan, exp, ln, sqrt, abs. The name `pi` denotes the constant unless it is
// declared as a variable.

#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minsurf/jet.hpp"
#include "minsurf/vec2.hpp"

namespace minsurf::expr {

enum class Op { Literal, Variable, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class Func { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs };

struct Node {
  Op op = Op::Literal;
  double value = 0.0;      // Literal
  std::size_t var = 0;     // Variable
  Func func = Func::Sin;   // Call
  bool constant = true;    // subtree references no variable
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

/// Set when evaluation touched a point where the expression is not C^2
/// (currently: abs at zero).
struct EvalDiagnostics {
  bool non_c2 = false;
  std::string where;
};

class Expr {
public:
  Expr() = default;

  /// Throws SyntaxError, UnknownVariable or UnknownFunction.
  static Expr parse(std::string_view src, std::vector<std::string> vars);

  const std::vector<std::string>& variables() const noexcept { return vars_; }
  /// Names actually referenced by the expression.
  std::set<std::string> free_variables() const;
  bool is_constant() const { return !root_ || root_->constant; }

  /// Fully parenthesised source form; parse(to_string()) reproduces the tree.
  std::string to_string() const;

  double eval(std::span<const double> point) const;
  /// Value, gradient and Hessian at `point`. Throws DomainError outside the
  /// natural domain of a sub-expression.
  Jet2 eval_jet2(std::span<const double> point, EvalDiagnostics* diag = nullptr) const;

  const Node* root() const noexcept { return root_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);

private:
  Expr(std::shared_ptr<const Node> root, std::vector<std::string> vars)
      : root_(std::move(root)), vars_(std::move(vars)) {}

  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
};

bool structurally_equal(const Node* a, const Node* b);

/// Position, velocity and acceleration of a parametric plane curve.
struct CurveJet {
  Vec2 pos;
  Vec2 vel;
  Vec2 acc;
};

/// Both expressions must be in the single variable t.
CurveJet eval_curve_jet(const Expr& x, const Expr& y, double t);

}  // namespace minsurf::expr
