#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "minsurf/criterion.hpp"
#include "minsurf/domain.hpp"
#include "minsurf/expr.hpp"
#include "minsurf/jet.hpp"

namespace minsurf::barrier {

/// psi(s) = (1/sigma) [rho s - c1 (e^{sigma s} - 1)], c1 = (rho - sigma) / sigma,
/// the solution of psi'' - sigma psi' + rho = 0 with psi(0) = 0, psi'(0) = 1.
struct BarrierProfile {
  double rho = 0.0;
  double sigma = 0.0;
  double c1 = 0.0;
  double delta = 0.0;
  geom::ExteriorSphere sphere;

  /// No admissibility checks; used to probe out-of-contract profiles.
  static BarrierProfile unchecked(double rho, double sigma, double delta, geom::ExteriorSphere sphere = {});
};

/// Validated profile: sigma < 0 and 0 < delta < delta_max. Throws DeltaOutOfRange.
BarrierProfile make_profile(const criterion::CriterionConstants& k, double delta, geom::ExteriorSphere sphere = {});

/// psi(s) without range checks.
double psi_value(double rho, double sigma, double s);

struct PsiJet {
  double psi = 0.0;
  double dpsi = 0.0;
  double ddpsi = 0.0;
};

PsiJet psi_unchecked(const BarrierProfile& p, double s);
/// Throws OutOfRange unless 0 <= s <= delta.
PsiJet psi_jet(const BarrierProfile& p, double s);

struct PropertyCheck {
  std::string name;
  double margin = 0.0;  // >= 0 means pass (strict properties need > 0)
  bool pass = false;
};

struct PsiProperties {
  std::vector<PropertyCheck> checks;
  bool pass = false;
};

/// psi(0) = 0, 0 < psi' <= 1, psi'' < 0 on a grid of [0, delta], psi(delta) >= omega.
PsiProperties psi_properties(const BarrierProfile& p, double omega, std::size_t n_grid = 1000);

/// M(u) = (1 + |grad u|^2) lap u - hess u (grad u, grad u).
double minimal_operator(const Jet2& u);

/// Jet of phi + psi(d).
Jet2 w_jet(const Jet2& phi, const Jet2& d, const PsiJet& psi);

/// hess w (grad w, grad w) split as t1 + t2 + t3 + t4 with E = grad d:
///   t1 = hess phi (grad phi, grad phi)
///   t2 = psi' [2 hess phi (E, grad phi) + hess d (grad phi, grad phi)]
///   t3 = psi'^2 hess phi (E, E)
///   t4 = psi'' (E . grad phi + psi')^2
/// Valid when d is a distance function (|E| = 1 and hess d E = 0).
struct HwDecomposition {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  double sum() const { return t1 + t2 + t3 + t4; }
};
HwDecomposition hw_decomposition(const Jet2& phi, const Jet2& d, const PsiJet& psi);

enum class Side { Upper, Lower };

struct Violation {
  std::string what;
  Vec2 at;
  double value = 0.0;
};

struct BarrierCheckReport {
  Side side = Side::Upper;
  std::size_t n_points = 0;
  double spacing = 0.0;
  // Upper: max M(w). Lower: min M(xi).
  double extreme_M = 0.0;
  Vec2 extreme_M_at;
  // min |barrier - phi| over the samples (w - phi or phi - xi).
  double min_offset = 0.0;
  Vec2 min_offset_at;
  // barrier(p) - phi(p) at the tangency point.
  double tangency_offset = 0.0;
  // Upper: min over the cap of w - sup phi; lower: min of inf phi - xi.
  std::optional<double> cap_margin;
  std::size_t n_violations = 0;
  std::vector<Violation> violations;  // first few, in sample order
  bool pass = false;
};

struct BarrierOptions {
  std::size_t density = 10000;
  // Data extrema for the cap condition; skipped when absent.
  std::optional<double> sup_phi;
  std::optional<double> inf_phi;
  double tangency_tol = 1e-10;
  std::size_t max_recorded = 16;
};

/// Samples Lambda = B_{r+delta}(p0) ∩ domain and checks w(p) = phi(p),
/// w >= phi and M(w) <= 0. Throws EmptyRegion.
BarrierCheckReport verify_upper_barrier(const geom::Domain2D& domain, const expr::Expr& phi,
                                        const BarrierProfile& profile, const BarrierOptions& opts = {});
/// Same for xi = phi - psi(d): xi <= phi and M(xi) >= 0.
BarrierCheckReport verify_lower_barrier(const geom::Domain2D& domain, const expr::Expr& phi,
                                        const BarrierProfile& profile, const BarrierOptions& opts = {});

/// Header "s,psi,dpsi,ddpsi" followed by n_grid + 1 rows over [0, delta].
void write_psi_csv(std::ostream& os, const BarrierProfile& p, std::size_t n_grid);

}  // namespace minsurf::barrier
