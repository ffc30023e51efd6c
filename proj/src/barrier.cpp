#include "minsurf/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "minsurf/errors.hpp"
#include "minsurf/parallel.hpp"

namespace minsurf::barrier {

BarrierProfile BarrierProfile::unchecked(double rho, double sigma, double delta, geom::ExteriorSphere sphere) {
  BarrierProfile p;
  p.rho = rho;
  p.sigma = sigma;
  p.c1 = (rho - sigma) / sigma;
  p.delta = delta;
  p.sphere = sphere;
  return p;
}

BarrierProfile make_profile(const criterion::CriterionConstants& k, double delta, geom::ExteriorSphere sphere) {
  if (!(k.sigma < 0.0)) throw DegenerateData("sigma must be negative (theta > 1)");
  if (!(delta > 0.0 && delta < k.delta_max))
    throw DeltaOutOfRange("delta = " + std::to_string(delta) + " outside (0, " + std::to_string(k.delta_max) + ")");
  return BarrierProfile::unchecked(k.rho, k.sigma, delta, sphere);
}

double psi_value(double rho, double sigma, double s) {
  const double c1 = (rho - sigma) / sigma;
  return (rho * s - c1 * std::expm1(sigma * s)) / sigma;
}

PsiJet psi_unchecked(const BarrierProfile& p, double s) {
  const double e = std::exp(p.sigma * s);
  PsiJet j;
  j.psi = (p.rho * s - p.c1 * std::expm1(p.sigma * s)) / p.sigma;
  j.dpsi = 1.0 - p.c1 * std::expm1(p.sigma * s);
  j.ddpsi = -p.c1 * p.sigma * e;
  return j;
}

PsiJet psi_jet(const BarrierProfile& p, double s) {
  if (!(s >= 0.0 && s <= p.delta))
    throw OutOfRange("s = " + std::to_string(s) + " outside [0, " + std::to_string(p.delta) + "]");
  return psi_unchecked(p, s);
}

PsiProperties psi_properties(const BarrierProfile& p, double omega, std::size_t n_grid) {
  if (n_grid == 0) n_grid = 1;
  double min_d = std::numeric_limits<double>::infinity(), max_d = -min_d, max_dd = -min_d;
  for (std::size_t i = 0; i <= n_grid; ++i) {
    const PsiJet j = psi_unchecked(p, p.delta * double(i) / double(n_grid));
    min_d = std::min(min_d, j.dpsi);
    max_d = std::max(max_d, j.dpsi);
    max_dd = std::max(max_dd, j.ddpsi);
  }
  const double psi0 = psi_unchecked(p, 0.0).psi;
  const double psid = psi_unchecked(p, p.delta).psi;

  PsiProperties out;
  out.checks.push_back({"psi(0) = 0", 0.0 - std::abs(psi0), std::abs(psi0) <= 1e-15});
  out.checks.push_back({"psi' > 0", min_d, min_d > 0.0});
  out.checks.push_back({"psi' <= 1", 1.0 - max_d, max_d <= 1.0 + 1e-14});
  out.checks.push_back({"psi'' < 0", -max_dd, max_dd < 0.0});
  out.checks.push_back({"psi(delta) >= omega", psid - omega, psid >= omega});
  out.pass = std::all_of(out.checks.begin(), out.checks.end(), [](const PropertyCheck& c) { return c.pass; });
  return out;
}

double minimal_operator(const Jet2& u) {
  double g2 = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) g2 += u.grad(i) * u.grad(i);
  return (1.0 + g2) * u.laplacian() - u.hess_form(u.gradient(), u.gradient());
}

Jet2 w_jet(const Jet2& phi, const Jet2& d, const PsiJet& psi) {
  return phi + d.compose(psi.psi, psi.dpsi, psi.ddpsi);
}

HwDecomposition hw_decomposition(const Jet2& phi, const Jet2& d, const PsiJet& psi) {
  const std::vector<double>& gphi = phi.gradient();
  const std::vector<double>& E = d.gradient();
  double e_dot = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) e_dot += E[i] * gphi[i];
  HwDecomposition h;
  h.t1 = phi.hess_form(gphi, gphi);
  h.t2 = psi.dpsi * (2.0 * phi.hess_form(E, gphi) + d.hess_form(gphi, gphi));
  h.t3 = psi.dpsi * psi.dpsi * phi.hess_form(E, E);
  h.t4 = psi.ddpsi * (e_dot + psi.dpsi) * (e_dot + psi.dpsi);
  return h;
}

namespace {

struct PointEval {
  double M = 0.0;
  double offset = 0.0;  // sign * (barrier - phi), >= 0 expected
  double value = 0.0;   // barrier value
  double d = 0.0;
};

PointEval evaluate(const expr::Expr& phi, const BarrierProfile& profile, Vec2 x, double sign) {
  const double pt[2] = {x.x, x.y};
  const Jet2 pj = phi.eval_jet2(pt);
  const Jet2 dj = geom::distance_jet(profile.sphere, x);
  const double s = std::clamp(dj.value(), 0.0, profile.delta);
  PsiJet ps = psi_unchecked(profile, s);
  ps.psi *= sign;
  ps.dpsi *= sign;
  ps.ddpsi *= sign;
  const Jet2 wj = w_jet(pj, dj, ps);
  PointEval e;
  e.M = minimal_operator(wj);
  e.offset = sign * (wj.value() - pj.value());
  e.value = wj.value();
  e.d = dj.value();
  return e;
}

BarrierCheckReport verify(const geom::Domain2D& domain, const expr::Expr& phi, const BarrierProfile& profile,
                          const BarrierOptions& opts, Side side) {
  const double sign = side == Side::Upper ? 1.0 : -1.0;
  const geom::RegionSample region = geom::sample_region(domain, profile.sphere, profile.delta, opts.density);
  const std::vector<Vec2> pts = region.all();
  const std::size_t n_cap_begin = region.interior.size() + region.boundary_trace.size();

  std::vector<PointEval> ev(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { ev[i] = evaluate(phi, profile, pts[i], sign); });

  BarrierCheckReport rep;
  rep.side = side;
  rep.n_points = pts.size();
  rep.spacing = region.spacing;
  auto note = [&](std::string what, Vec2 at, double value) {
    ++rep.n_violations;
    if (rep.violations.size() < opts.max_recorded) rep.violations.push_back({std::move(what), at, value});
  };

  // ordered reduction; the first index wins ties
  rep.extreme_M = sign * -std::numeric_limits<double>::infinity();
  rep.min_offset = std::numeric_limits<double>::infinity();
  const double d_tol = 1e-9 * (1.0 + profile.sphere.r);
  std::optional<double> cap;
  const std::optional<double> level = side == Side::Upper ? opts.sup_phi : opts.inf_phi;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const PointEval& e = ev[i];
    if (sign * e.M > sign * rep.extreme_M) {
      rep.extreme_M = e.M;
      rep.extreme_M_at = pts[i];
    }
    if (e.offset < rep.min_offset) {
      rep.min_offset = e.offset;
      rep.min_offset_at = pts[i];
    }
    if (sign * e.M > 0.0) note(side == Side::Upper ? "M(w) > 0" : "M(xi) < 0", pts[i], e.M);
    if (e.offset < 0.0) note(side == Side::Upper ? "w < phi" : "xi > phi", pts[i], e.offset);
    if (e.d < -d_tol) note("exterior disk meets the domain", pts[i], e.d);
    if (e.d > profile.delta + d_tol) note("sample outside the ball", pts[i], e.d - profile.delta);
    if (i >= n_cap_begin && level) {
      const double m = sign * (e.value - *level);
      cap = cap ? std::min(*cap, m) : m;
    }
  }
  if (level && !region.cap.empty()) {
    rep.cap_margin = cap;
    if (*cap < 0.0) note(side == Side::Upper ? "w < sup phi on the cap" : "xi > inf phi on the cap",
                         region.cap.front(), *cap);
  }

  const PointEval at_p = evaluate(phi, profile, profile.sphere.p, sign);
  rep.tangency_offset = sign * at_p.offset;
  if (std::abs(rep.tangency_offset) > opts.tangency_tol)
    note("barrier differs from phi at the tangency point", profile.sphere.p, rep.tangency_offset);

  rep.pass = rep.n_violations == 0;
  return rep;
}

}  // namespace

BarrierCheckReport verify_upper_barrier(const geom::Domain2D& domain, const expr::Expr& phi,
                                        const BarrierProfile& profile, const BarrierOptions& opts) {
  return verify(domain, phi, profile, opts, Side::Upper);
}

BarrierCheckReport verify_lower_barrier(const geom::Domain2D& domain, const expr::Expr& phi,
                                        const BarrierProfile& profile, const BarrierOptions& opts) {
  return verify(domain, phi, profile, opts, Side::Lower);
}

void write_psi_csv(std::ostream& os, const BarrierProfile& p, std::size_t n_grid) {
  if (n_grid == 0) n_grid = 1;
  os << "s,psi,dpsi,ddpsi\n";
  char buf[160];
  for (std::size_t i = 0; i <= n_grid; ++i) {
    const double s = p.delta * double(i) / double(n_grid);
    const PsiJet j = psi_unchecked(p, s);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s, j.psi, j.dpsi, j.ddpsi);
    os << buf;
  }
}

}  // namespace minsurf::barrier
