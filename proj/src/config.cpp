#include "minsurf/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "minsurf/errors.hpp"
#include "minsurf/expr.hpp"

namespace minsurf {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed.
class Fields {
public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double real(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    throw ValidationError(field(key), "expected a number");
  }

  template <class Int>
  Int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(field(key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>)
      if (!v.is_number_unsigned()) throw ValidationError(field(key), "expected a non-negative integer");
    return v.get<Int>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) throw ValidationError(field(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(field(it.key()), "unknown key");
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

DomainSpec read_domain(const json& j) {
  Fields f(j, "domain");
  DomainSpec d;
  if (f.has("radial")) d.radial = f.string("radial");
  if (f.has("x")) d.x = f.string("x");
  if (f.has("y")) d.y = f.string("y");
  if (f.has("period")) {
    const json& p = f.raw("period");
    if (p.is_number())
      d.period = p.dump();
    else if (p.is_string())
      d.period = p.get<std::string>();
    else
      throw ValidationError("domain.period", "expected a number or an expression");
  }
  if (f.has("interior_hint")) {
    const json& h = f.raw("interior_hint");
    if (!h.is_array() || h.size() != 2 || !h[0].is_number() || !h[1].is_number())
      throw ValidationError("domain.interior_hint", "expected [x, y]");
    d.interior_hint = std::vector<double>{h[0].get<double>(), h[1].get<double>()};
  }
  f.finish();
  return d;
}

AbstractSpec read_abstract(const json& j) {
  Fields f(j, "abstract");
  AbstractSpec a;
  for (const char* k : {"n", "lambda_r", "mu_r", "R", "r", "tau", "omega"})
    if (!f.has(k)) throw ValidationError(f.field(k), "required in abstract mode");
  a.n = f.integer<int>("n");
  a.lambda_r = f.real("lambda_r");
  a.mu_r = f.real("mu_r");
  a.R = f.real("R");
  a.r = f.real("r");
  a.tau = f.real("tau");
  a.omega = f.real("omega");
  f.finish();
  return a;
}

SamplingSpec read_sampling(const json& j) {
  Fields f(j, "sampling");
  SamplingSpec s;
  if (f.has("boundary")) s.boundary = f.integer<std::size_t>("boundary");
  if (f.has("data_density")) s.data_density = f.integer<std::size_t>("data_density");
  if (f.has("barrier_density")) s.barrier_density = f.integer<std::size_t>("barrier_density");
  if (f.has("eps_neg")) s.eps_neg = f.real("eps_neg");
  if (f.has("hessian_norm")) s.hessian_norm = f.string("hessian_norm");
  f.finish();
  return s;
}

SolverSpec read_solver(const json& j) {
  Fields f(j, "solver");
  SolverSpec s;
  if (f.has("n_radial")) s.n_radial = f.integer<int>("n_radial");
  if (f.has("n_angular")) s.n_angular = f.integer<int>("n_angular");
  if (f.has("richardson")) s.richardson = f.boolean("richardson");
  if (f.has("grad_tol")) s.grad_tol = f.real("grad_tol");
  if (f.has("max_iterations")) s.max_iterations = f.integer<int>("max_iterations");
  f.finish();
  return s;
}

OutputSpec read_output(const json& j) {
  Fields f(j, "output");
  OutputSpec o;
  if (f.has("dir")) o.dir = f.string("dir");
  if (f.has("format")) o.format = f.string("format");
  if (f.has("psi_grid")) o.psi_grid = f.integer<std::size_t>("psi_grid");
  if (f.has("timings")) o.timings = f.boolean("timings");
  f.finish();
  return o;
}

void check_expr(const std::string& field, const std::string& src, std::vector<std::string> vars) {
  try {
    (void)expr::Expr::parse(src, std::move(vars));
  } catch (const Error& e) {
    throw ValidationError(field, e.what());
  }
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string to_string(Mode m) { return m == Mode::Abstract ? "abstract" : "euclidean-2d"; }

void validate(const Config& c) {
  if (c.mode == Mode::Euclidean2D) {
    if (c.abstract) throw ValidationError("abstract", "only allowed in abstract mode");
    if (!c.domain) throw ValidationError("domain", "required in euclidean-2d mode");
    if (!c.phi) throw ValidationError("phi", "required in euclidean-2d mode");
    const DomainSpec& d = *c.domain;
    const bool xy = d.x || d.y;
    if (d.radial && xy) throw ValidationError("domain", "give either 'radial' or 'x'/'y', not both");
    if (!d.radial && !xy) throw ValidationError("domain", "needs 'radial' or 'x' and 'y'");
    if (xy && !(d.x && d.y)) throw ValidationError("domain", "'x' and 'y' must be given together");
    if (d.radial) check_expr("domain.radial", *d.radial, {"t"});
    if (d.x) check_expr("domain.x", *d.x, {"t"});
    if (d.y) check_expr("domain.y", *d.y, {"t"});
    double period = 0.0;
    try {
      period = expr::Expr::parse(d.period, {}).eval({});
    } catch (const Error& e) {
      throw ValidationError("domain.period", e.what());
    }
    if (!positive(period)) throw ValidationError("domain.period", "must be positive");
    check_expr("phi", *c.phi, {"x", "y"});
  } else {
    if (!c.abstract) throw ValidationError("abstract", "required in abstract mode");
    if (c.domain) throw ValidationError("domain", "abstract mode has no domain");
    if (c.phi) throw ValidationError("phi", "abstract mode takes tau and omega directly");
    if (c.solver) throw ValidationError("solver", "abstract mode has no geometry to mesh");
    const AbstractSpec& a = *c.abstract;
    if (a.n < 2) throw ValidationError("abstract.n", "must be at least 2");
    if (!(a.lambda_r < 0.0)) throw ValidationError("abstract.lambda_r", "must be negative");
    if (!(a.mu_r >= 0.0) || !std::isfinite(a.mu_r)) throw ValidationError("abstract.mu_r", "must be non-negative");
    if (!positive(a.r)) throw ValidationError("abstract.r", "must be positive");
    if (!(a.R > a.r)) throw ValidationError("abstract.R", "must exceed r");
    if (!(a.tau >= 0.0) || !std::isfinite(a.tau)) throw ValidationError("abstract.tau", "must be non-negative");
    if (!(a.omega >= 0.0) || !std::isfinite(a.omega)) throw ValidationError("abstract.omega", "must be non-negative");
  }
  if (c.sampling.boundary < 16) throw ValidationError("sampling.boundary", "must be at least 16");
  if (c.sampling.data_density < 16) throw ValidationError("sampling.data_density", "must be at least 16");
  if (c.sampling.barrier_density < 1) throw ValidationError("sampling.barrier_density", "must be positive");
  if (!positive(c.sampling.eps_neg)) throw ValidationError("sampling.eps_neg", "must be positive");
  if (c.sampling.hessian_norm != "operator" && c.sampling.hessian_norm != "frobenius")
    throw ValidationError("sampling.hessian_norm", "expected 'operator' or 'frobenius'");
  if (c.delta && !positive(*c.delta)) throw ValidationError("delta", "must be positive");
  if (c.js_l && !positive(*c.js_l)) throw ValidationError("js_l", "must be positive");
  if (c.solver) {
    if (c.solver->n_radial < 4) throw ValidationError("solver.n_radial", "must be at least 4");
    if (c.solver->n_angular < 16) throw ValidationError("solver.n_angular", "must be at least 16");
    if (!positive(c.solver->grad_tol)) throw ValidationError("solver.grad_tol", "must be positive");
    if (c.solver->max_iterations < 1) throw ValidationError("solver.max_iterations", "must be positive");
  }
  const std::string& fmt = c.output.format;
  if (fmt != "json" && fmt != "text" && fmt != "csv-bundle")
    throw ValidationError("output.format", "expected json, text or csv-bundle");
  if (c.output.psi_grid < 1) throw ValidationError("output.psi_grid", "must be positive");
}

Config config_from_json(const json& j) {
  Fields f(j, "");
  Config c;
  if (f.has("mode")) {
    const std::string m = f.string("mode");
    if (m == "euclidean-2d")
      c.mode = Mode::Euclidean2D;
    else if (m == "abstract")
      c.mode = Mode::Abstract;
    else
      throw ValidationError("mode", "expected 'euclidean-2d' or 'abstract'");
  }
  if (f.has("domain")) c.domain = read_domain(f.raw("domain"));
  if (f.has("phi")) c.phi = f.string("phi");
  if (f.has("abstract")) c.abstract = read_abstract(f.raw("abstract"));
  if (f.has("sampling")) c.sampling = read_sampling(f.raw("sampling"));
  if (f.has("delta")) c.delta = f.real("delta");
  if (f.has("js_l")) c.js_l = f.real("js_l");
  if (f.has("solver")) c.solver = read_solver(f.raw("solver"));
  if (f.has("output")) c.output = read_output(f.raw("output"));
  if (f.has("seed")) c.seed = f.integer<std::uint64_t>("seed");
  f.finish();
  validate(c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.byte, e.what());
  }
  return config_from_json(j);
}

json config_to_json(const Config& c) {
  json j;
  j["mode"] = to_string(c.mode);
  if (c.domain) {
    json d;
    if (c.domain->radial) d["radial"] = *c.domain->radial;
    if (c.domain->x) d["x"] = *c.domain->x;
    if (c.domain->y) d["y"] = *c.domain->y;
    d["period"] = c.domain->period;
    if (c.domain->interior_hint) d["interior_hint"] = *c.domain->interior_hint;
    j["domain"] = d;
  }
  if (c.phi) j["phi"] = *c.phi;
  if (c.abstract) {
    const AbstractSpec& a = *c.abstract;
    j["abstract"] = {{"n", a.n},
                     {"lambda_r", real_to_json(a.lambda_r)},
                     {"mu_r", real_to_json(a.mu_r)},
                     {"R", real_to_json(a.R)},
                     {"r", real_to_json(a.r)},
                     {"tau", real_to_json(a.tau)},
                     {"omega", real_to_json(a.omega)}};
  }
  j["sampling"] = {{"boundary", c.sampling.boundary},
                   {"data_density", c.sampling.data_density},
                   {"barrier_density", c.sampling.barrier_density},
                   {"eps_neg", c.sampling.eps_neg},
                   {"hessian_norm", c.sampling.hessian_norm}};
  if (c.delta) j["delta"] = *c.delta;
  if (c.js_l) j["js_l"] = *c.js_l;
  if (c.solver) {
    const SolverSpec& s = *c.solver;
    j["solver"] = {{"n_radial", s.n_radial},
                   {"n_angular", s.n_angular},
                   {"richardson", s.richardson},
                   {"grad_tol", s.grad_tol},
                   {"max_iterations", s.max_iterations}};
  }
  json o = {{"format", c.output.format}, {"psi_grid", c.output.psi_grid}, {"timings", c.output.timings}};
  if (c.output.dir) o["dir"] = *c.output.dir;
  j["output"] = o;
  j["seed"] = c.seed;
  return j;
}

}  // namespace minsurf
