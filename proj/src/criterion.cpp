#include "minsurf/criterion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "minsurf/barrier.hpp"
#include "minsurf/errors.hpp"
#include "minsurf/parallel.hpp"

namespace minsurf::criterion {
namespace {

struct Extrema {
  double sup_grad = 0.0, sup_hess = 0.0, sup_lap = 0.0;
  double sup_phi = -kInf, inf_phi = kInf;
  std::size_t n = 0;

  void add(const Jet2& j, HessianNorm hn) {
    sup_grad = std::max(sup_grad, j.grad_norm());
    sup_hess = std::max(sup_hess, hn == HessianNorm::Operator ? j.hess_operator_norm() : j.hess_frobenius_norm());
    sup_lap = std::max(sup_lap, std::abs(j.laplacian()));
    sup_phi = std::max(sup_phi, j.value());
    inf_phi = std::min(inf_phi, j.value());
    ++n;
  }
};

template <class F>
double golden_max(F&& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 80 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

Extrema sample_extrema(const expr::Expr& phi, const geom::Domain2D& domain, std::size_t density, HessianNorm hn) {
  const double h = std::sqrt(domain.area() / double(density));
  const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
  const auto nx = static_cast<std::size_t>((hi.x - lo.x) / h) + 2;
  const auto ny = static_cast<std::size_t>((hi.y - lo.y) / h) + 2;
  const Vec2 origin{lo.x - 0.5 * h, lo.y - 0.5 * h};

  std::vector<std::optional<Jet2>> interior(nx * ny);
  parallel_for(nx * ny, [&](std::size_t k) {
    const Vec2 x{origin.x + h * double(k % nx), origin.y + h * double(k / nx)};
    if (domain.contains(x) != geom::Location::Inside) return;
    const double p[2] = {x.x, x.y};
    interior[k] = phi.eval_jet2(p);
  });

  const geom::BoundaryCurve& curve = domain.boundary();
  const std::size_t nb = std::max<std::size_t>(256, static_cast<std::size_t>(8.0 * std::sqrt(double(density))));
  const double dt = curve.period() / double(nb);
  auto jet_at_t = [&](double t) {
    const Vec2 x = curve.point(t);
    const double p[2] = {x.x, x.y};
    return phi.eval_jet2(p);
  };
  std::vector<Jet2> boundary(nb);
  parallel_for(nb, [&](std::size_t i) { boundary[i] = jet_at_t(dt * double(i)); });

  Extrema e;
  for (const auto& j : interior)
    if (j) e.add(*j, hn);
  for (const auto& j : boundary) e.add(j, hn);

  // Polish each boundary maximum along the curve; data extrema of smooth phi
  // typically sit on the boundary.
  using Quantity = double (*)(const Jet2&, HessianNorm);
  const std::array<Quantity, 5> quantities{
      [](const Jet2& j, HessianNorm) { return j.grad_norm(); },
      [](const Jet2& j, HessianNorm n) {
        return n == HessianNorm::Operator ? j.hess_operator_norm() : j.hess_frobenius_norm();
      },
      [](const Jet2& j, HessianNorm) { return std::abs(j.laplacian()); },
      [](const Jet2& j, HessianNorm) { return j.value(); },
      [](const Jet2& j, HessianNorm) { return -j.value(); },
  };
  std::array<double, 5> polished{};
  for (std::size_t q = 0; q < quantities.size(); ++q) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < nb; ++i)
      if (quantities[q](boundary[i], hn) > quantities[q](boundary[best], hn)) best = i;
    const double t = dt * double(best);
    polished[q] = golden_max([&](double s) { return quantities[q](jet_at_t(s), hn); }, t - dt, t + dt);
  }
  e.sup_grad = std::max(e.sup_grad, polished[0]);
  e.sup_hess = std::max(e.sup_hess, polished[1]);
  e.sup_lap = std::max(e.sup_lap, polished[2]);
  e.sup_phi = std::max(e.sup_phi, polished[3]);
  e.inf_phi = std::min(e.inf_phi, -polished[4]);
  return e;
}

DataStats to_stats(const Extrema& e) {
  DataStats s;
  s.sup_grad = e.sup_grad;
  s.sup_hess = e.sup_hess;
  s.sup_lap = e.sup_lap;
  s.tau = std::max({e.sup_lap, e.sup_grad, e.sup_hess});
  s.sup_phi = e.sup_phi;
  s.inf_phi = e.inf_phi;
  s.omega = std::max(0.0, e.sup_phi - e.inf_phi);
  s.n_points = e.n;
  return s;
}

}  // namespace

DataStats data_stats(const expr::Expr& phi, const geom::Domain2D& domain, const StatsOptions& opts) {
  if (phi.variables().size() != 2) throw ValidationError("phi", "boundary data must be a function of (x, y)");
  const DataStats coarse = to_stats(sample_extrema(phi, domain, opts.density, opts.hessian_norm));
  DataStats fine = to_stats(sample_extrema(phi, domain, 4 * opts.density, opts.hessian_norm));
  const double d_tau = std::abs(fine.tau - coarse.tau);
  const double d_omega = std::abs(fine.omega - coarse.omega);
  fine.error_estimate = std::max(d_tau, d_omega);
  if (d_tau > 1e-3 * fine.tau + 1e-14 || d_omega > 1e-3 * fine.omega + 1e-14)
    throw NotConverged("data suprema changed by " + std::to_string(fine.error_estimate) +
                       " under refinement; raise the sampling density");
  return fine;
}

GeometrySummary GeometrySummary::euclidean(double r, int n) {
  GeometrySummary g;
  g.n = n;
  g.r = r;
  g.lambda_r = -1.0 / r;
  g.mu_r = 1.0 / r;
  g.R = kInf;
  g.source = GeometrySource::ComputedFromDomain;
  return g;
}

bool GeometrySummary::is_euclidean() const {
  if (std::isfinite(R) || !(r > 0.0)) return false;
  const double inv = 1.0 / r;
  return std::abs(lambda_r + inv) <= 1e-12 * inv && std::abs(mu_r - inv) <= 1e-12 * inv;
}

double a_of_tau(double tau) { return (2.0 * tau * tau + 4.0 * tau + 3.0) / (1.0 + 2.0 * tau * tau); }

CriterionConstants constants(double tau, const GeometrySummary& geom) {
  if (!(tau > kTauMin)) throw DegenerateData("tau <= 1e-8: the criterion constants are undefined");
  if (!(geom.lambda_r < 0.0)) throw DegenerateData("lambda_r must be negative");
  if (!(geom.mu_r >= 0.0)) throw DegenerateData("mu_r must be non-negative");
  if (geom.n < 2) throw DegenerateData("dimension must be at least 2");
  CriterionConstants k;
  k.tau = tau;
  k.n = geom.n;
  k.r = geom.r;
  k.R = geom.R;
  k.lambda_r = geom.lambda_r;
  k.mu_r = geom.mu_r;
  const double t2 = tau * tau;
  k.rho = tau * (1.0 + 2.0 * t2);
  k.a = (2.0 * t2 * tau + 4.0 * t2 + 3.0 * tau) / k.rho;
  k.b = -(t2 + 2.0 * tau + 2.0) / k.rho;
  k.c = t2 / k.rho;
  k.theta = k.a + k.b * double(k.n - 1) * k.lambda_r + k.c * k.mu_r;
  k.sigma = k.rho * (1.0 - k.theta);
  const double analytic = std::log(k.theta) / (k.rho * (k.theta - 1.0));
  k.delta_max = std::isfinite(k.R) ? std::min(k.R - k.r, analytic) : analytic;
  return k;
}

CriterionConstants constants(const DataStats& stats, const GeometrySummary& geom) {
  return constants(stats.tau, geom);
}

double osc_bound_mo(const CriterionConstants& k, double delta) {
  if (!(delta > 0.0 && delta < k.delta_max))
    throw DeltaOutOfRange("delta = " + std::to_string(delta) + " outside (0, " + std::to_string(k.delta_max) + ")");
  const double q = k.rho * (k.theta - 1.0);
  const double num = k.theta * (-std::expm1(-q * delta)) - q * delta;
  const double bound = num / (q * (k.theta - 1.0));
  const double psi = barrier::psi_value(k.rho, k.sigma, delta);
  const double scale = 1.0 + k.theta * delta + std::abs(bound);
  if (std::abs(bound - psi) > 1e-12 * scale)
    throw InternalError("oscillation bound and barrier profile disagree at delta = " + std::to_string(delta));
  return bound;
}

double optimal_delta(const CriterionConstants& k) {
  const double cap = k.delta_max * (1.0 - 1e-6);
  auto f = [&](double d) { return osc_bound_mo(k, d); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = cap * 1e-9, b = cap;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && (b - a) > 1e-14 * cap; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  double best = fc > fd ? c : d;
  if (f(cap) >= f(best)) best = cap;
  return best;
}

HadamardBounds hadamard_bounds(const CriterionConstants& k) {
  if (std::isfinite(k.R)) throw RequiresInfiniteR("closed-form bounds need R = infinity");
  if (!(k.theta > 1.0)) throw DegenerateData("theta must exceed 1");
  const double denom = k.rho * (k.theta - 1.0) * (k.theta - 1.0);
  HadamardBounds h;
  h.hc = (k.theta - std::log(k.theta) - 1.0) / denom;
  h.hc2 = (k.a - std::log(k.a) - 1.0) / denom;
  return h;
}

CorollaryResult corollary_sh(const CriterionConstants& k, double omega, const GeometrySummary& geom) {
  CorollaryResult out;
  const double fa = std::sqrt(k.a - std::log(k.a) - 1.0);
  const double s = std::sqrt(k.rho * std::max(0.0, omega));
  if (s == 0.0) {
    out.sh_lhs = -kInf;  // limit omega -> 0+
  } else {
    out.sh_lhs = (fa - s * (k.a + k.c * k.mu_r - 1.0)) / (s * k.b * double(k.n - 1));
  }
  out.sh_pass = out.sh_lhs <= k.lambda_r && out.sh_lhs < 0.0;

  if (geom.is_euclidean()) {
    out.she_evaluated = true;
    const double denom = fa - (k.a - 1.0) * s;
    if (!(denom > 0.0)) {
      out.she_value = kInf;
      out.she_pass = false;
      out.she_reason = "NegativeDenominator";
    } else {
      out.she_value = s * (k.c - k.b * double(k.n - 1)) / denom;
      out.she_pass = out.she_value > 0.0 && out.she_value <= geom.r;
      if (!out.she_pass) out.she_reason = out.she_value > geom.r ? "exceeds r" : "non-positive";
    }
  }
  return out;
}

JenkinsSerrin jenkins_serrin_b(double l, double k_bound, double sup_d2phi, double sup_dphi, double H_script, int n) {
  if (!(l > 0.0)) throw ValidationError("l", "must be positive");
  JenkinsSerrin js;
  js.l_prime = l / std::sqrt(2.0);
  js.A = std::max({std::numbers::pi / js.l_prime, k_bound, sup_d2phi});
  js.C = js.A / std::pow(1.0 + sup_dphi * sup_dphi, 8.0 * n);
  js.H = H_script;
  const double pre = 1.0 / (16.0 * n * js.A);
  if (js.H <= 0.0)
    js.B = kInf;
  else if (js.C <= js.H)
    js.B = pre * js.C / js.H;
  else
    js.B = pre * (1.0 + std::log(js.C / js.H));
  return js;
}

bool js_graph_radius_verify(const geom::Domain2D& domain, double l, std::size_t n_samples) {
  if (!(l > 0.0)) throw ValidationError("l", "must be positive");
  const geom::BoundaryCurve& curve = domain.boundary();
  const std::size_t n = n_samples;
  std::vector<Vec2> P(n), T(n);
  parallel_for(n, [&](std::size_t i) {
    const double t = curve.period() * double(i) / double(n);
    P[i] = curve.point(t);
    T[i] = curve.tangent(t);
  });
  std::vector<char> ok(n, 1);
  parallel_for(n, [&](std::size_t i) {
    auto inside = [&](std::size_t j) { return norm(P[j] - P[i]) < l; };
    auto wrap = [&](long long j) { return static_cast<std::size_t>(((j % (long long)n) + (long long)n) % (long long)n); };
    long long fwd = 0, bwd = 0;
    while (fwd < (long long)n && inside(wrap((long long)i + fwd + 1))) ++fwd;
    while (bwd < (long long)n && inside(wrap((long long)i - bwd - 1))) ++bwd;
    if (fwd + bwd + 1 >= (long long)n) {  // the ball swallows the whole curve
      ok[i] = 0;
      return;
    }
    // (i) connectivity: nothing outside the run may enter the ball
    for (long long j = fwd + 1; j < (long long)n - bwd; ++j)
      if (inside(wrap((long long)i + j))) {
        ok[i] = 0;
        return;
      }
    const Vec2 Ti = T[i], Ni = perp(T[i]);
    double prev = -kInf;
    for (long long j = -bwd; j <= fwd; ++j) {
      const std::size_t q = wrap((long long)i + j);
      // (ii) injective projection onto the tangent line
      const double u = dot(P[q] - P[i], Ti);
      if (!(u > prev)) {
        ok[i] = 0;
        return;
      }
      prev = u;
      // (iii) slope of the graph below 1
      if (!(std::abs(dot(T[q], Ni)) < std::abs(dot(T[q], Ti)))) {
        ok[i] = 0;
        return;
      }
    }
  });
  return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::MeanConvex: return "mean-convex";
    case Branch::ConstantData: return "constant-data";
    case Branch::CriterionMo: return "criterion-mo";
    case Branch::CorollarySh: return "corollary-sh";
    case Branch::Fails: return "fails";
  }
  return "?";
}

Verdict evaluate_conditions(const DataStats& stats, const GeometrySummary& geom, const VerdictOptions& opts) {
  Verdict v;
  v.stats = stats;
  v.geometry = geom;
  if (!(stats.tau > kTauMin)) {
    if (stats.omega < 1e-8) {
      v.branch = Branch::ConstantData;
      v.solvable = true;
      return v;
    }
    throw DegenerateData("tau below 1e-8 while the oscillation is not: inconsistent data");
  }
  const CriterionConstants k = constants(stats, geom);
  v.constants = k;
  const double omega = stats.omega;

  v.delta_opt = optimal_delta(k);
  v.bound_mo_opt = osc_bound_mo(k, v.delta_opt);
  v.chosen_delta = opts.delta.value_or(v.delta_opt);
  v.bound_mo = osc_bound_mo(k, v.chosen_delta);
  v.checks.push_back({"mo", v.bound_mo, v.bound_mo - omega, omega <= v.bound_mo});
  v.checks.push_back({"mo_opt", v.bound_mo_opt, v.bound_mo_opt - omega, omega <= v.bound_mo_opt});

  if (!std::isfinite(k.R)) {
    const HadamardBounds hb = hadamard_bounds(k);
    v.bound_hc = hb.hc;
    v.bound_hc2 = hb.hc2;
    v.checks.push_back({"hc", hb.hc, hb.hc - omega, omega <= hb.hc});
    v.checks.push_back({"hc2", hb.hc2, hb.hc2 - omega, omega <= hb.hc2});
  }

  const CorollaryResult cor = corollary_sh(k, omega, geom);
  v.corollary = cor;
  v.sh_lhs = cor.sh_lhs;
  // sh rearranges to omega <= hc2
  const double sh_bound = (k.a - std::log(k.a) - 1.0) / (k.rho * (k.theta - 1.0) * (k.theta - 1.0));
  v.checks.push_back({"sh", sh_bound, sh_bound - omega, cor.sh_pass});
  if (cor.she_evaluated) {
    v.she_value = cor.she_value;
    v.checks.push_back({"she", sh_bound, sh_bound - omega, cor.she_pass});
  }

  if (v.checks[0].pass)
    v.branch = Branch::CriterionMo;
  else if (cor.sh_pass)
    v.branch = Branch::CorollarySh;
  else
    v.branch = Branch::Fails;
  v.solvable = v.branch != Branch::Fails;
  return v;
}

Verdict assemble_verdict(const geom::Domain2D& domain, geom::BoundaryClassification cls,
                         std::optional<geom::ExteriorRadius> exterior, const DataStats& stats,
                         const VerdictOptions& opts) {
  Verdict v;
  if (!cls.has_negative_part()) {
    v.stats = stats;
    v.branch = Branch::MeanConvex;
    v.solvable = true;
  } else {
    geom::ExteriorRadius ext = exterior ? std::move(*exterior) : geom::exterior_radius(domain, cls);
    v = evaluate_conditions(stats, GeometrySummary::euclidean(ext.r), opts);
    v.exterior = std::move(ext);
  }

  if (opts.js_l) {
    const double H = -cls.kappa_min;
    v.jenkins_serrin = jenkins_serrin_b(*opts.js_l, cls.kappa_max_abs, stats.sup_hess, stats.sup_grad, H, 2);
    v.js_B = v.jenkins_serrin->B;
    v.js_graph_ok = js_graph_radius_verify(domain, *opts.js_l);
    v.checks.push_back({"jenkins_serrin", v.js_B, v.js_B - stats.omega, stats.omega <= v.js_B});
  }
  v.classification = std::move(cls);
  return v;
}

Verdict verdict(const geom::Domain2D& domain, const expr::Expr& phi, const VerdictOptions& opts) {
  geom::BoundaryClassification cls = geom::classify_boundary(domain, opts.boundary_samples, opts.eps_neg);
  return assemble_verdict(domain, std::move(cls), std::nullopt, data_stats(phi, domain, opts.stats), opts);
}

}  // namespace minsurf::criterion
