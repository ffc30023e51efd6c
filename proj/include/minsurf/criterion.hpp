#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "minsurf/domain.hpp"
#include "minsurf/expr.hpp"

namespace minsurf::criterion {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Below this tau the constants a, b, c are not defined (they divide by rho).
inline constexpr double kTauMin = 1e-8;

enum class HessianNorm { Operator, Frobenius };

/// Suprema of the boundary data over the closure of the domain.
struct DataStats {
  double tau = 0.0;  // max(sup |lap phi|, sup |grad phi|, sup |hess phi|)
  double omega = 0.0;  // sup phi - inf phi
  double sup_grad = 0.0;
  double sup_hess = 0.0;
  double sup_lap = 0.0;
  double sup_phi = 0.0;
  double inf_phi = 0.0;
  double error_estimate = 0.0;  // largest change under one refinement doubling
  std::size_t n_points = 0;
};

struct StatsOptions {
  std::size_t density = 4096;  // target number of interior grid points
  HessianNorm hessian_norm = HessianNorm::Operator;
};

/// Samples phi on an interior grid plus the boundary (boundary extrema are
/// polished along the curve), refines once, and throws NotConverged if the
/// change exceeds 1e-3 of the value.
DataStats data_stats(const expr::Expr& phi, const geom::Domain2D& domain, const StatsOptions& opts = {});

enum class GeometrySource { ComputedFromDomain, UserSupplied };

struct GeometrySummary {
  int n = 2;
  double lambda_r = 0.0;  // < 0
  double mu_r = 0.0;      // > 0
  double r = 0.0;
  double R = kInf;
  GeometrySource source = GeometrySource::ComputedFromDomain;

  /// Euclidean plane: lambda_r = -1/r, mu_r = 1/r, R = inf.
  static GeometrySummary euclidean(double r, int n = 2);
  bool is_euclidean() const;
};

struct CriterionConstants {
  double tau = 0.0;
  double rho = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double theta = 0.0;
  double sigma = 0.0;  // rho * (1 - theta)
  double delta_max = 0.0;  // min(R - r, ln(theta) / (rho (theta - 1)))
  double r = 0.0;
  double R = kInf;
  int n = 2;
  double lambda_r = 0.0;
  double mu_r = 0.0;
};

/// Throws DegenerateData if stats.tau <= kTauMin.
CriterionConstants constants(const DataStats& stats, const GeometrySummary& geom);
/// Same, from tau alone.
CriterionConstants constants(double tau, const GeometrySummary& geom);

/// a(tau) = (2 tau^2 + 4 tau + 3) / (1 + 2 tau^2).
double a_of_tau(double tau);

/// Right-hand side of the oscillation condition at delta. Throws
/// DeltaOutOfRange unless 0 < delta < delta_max.
double osc_bound_mo(const CriterionConstants& k, double delta);

struct HadamardBounds {
  double hc = 0.0;   // (theta - ln theta - 1) / (rho (theta - 1)^2)
  double hc2 = 0.0;  // (a - ln a - 1) / (rho (theta - 1)^2)
};

/// Closed forms valid when R = inf; throws RequiresInfiniteR otherwise.
HadamardBounds hadamard_bounds(const CriterionConstants& k);

struct CorollaryResult {
  double sh_lhs = 0.0;
  bool sh_pass = false;
  bool she_evaluated = false;  // Euclidean geometry only
  double she_value = 0.0;
  bool she_pass = false;
  std::string she_reason;  // set when she_pass is false
};

CorollaryResult corollary_sh(const CriterionConstants& k, double omega, const GeometrySummary& geom);

struct JenkinsSerrin {
  double l_prime = 0.0;
  double A = 0.0;
  double C = 0.0;
  double H = 0.0;
  double B = 0.0;
};

/// Classical oscillation bound. `H_script` = max over the boundary of -kappa.
JenkinsSerrin jenkins_serrin_b(double l, double k_bound, double sup_d2phi, double sup_dphi, double H_script,
                               int n);

/// Checks that for every boundary sample p, the boundary inside B_l(p) is one
/// connected piece that is a graph over the tangent line at p with slope < 1.
bool js_graph_radius_verify(const geom::Domain2D& domain, double l, std::size_t n_samples = 2048);

enum class Branch { MeanConvex, ConstantData, CriterionMo, CorollarySh, Fails };
std::string to_string(Branch b);

struct ConditionCheck {
  std::string name;
  double bound = 0.0;
  double margin = 0.0;  // bound - omega; positive means pass
  bool pass = false;
};

struct VerdictOptions {
  std::size_t boundary_samples = 1024;
  double eps_neg = 1e-8;
  StatsOptions stats;
  std::optional<double> delta;  // explicit delta instead of the optimised one
  std::optional<double> js_l;
};

struct Verdict {
  Branch branch = Branch::Fails;
  bool solvable = false;
  double chosen_delta = 0.0;
  double delta_opt = 0.0;
  double bound_mo = 0.0;  // at chosen_delta
  double bound_mo_opt = 0.0;
  double bound_hc = 0.0;
  double bound_hc2 = 0.0;
  double sh_lhs = 0.0;
  double she_value = 0.0;
  double js_B = kInf;
  std::vector<ConditionCheck> checks;

  geom::BoundaryClassification classification;
  std::optional<geom::ExteriorRadius> exterior;
  std::optional<GeometrySummary> geometry;
  DataStats stats;
  std::optional<CriterionConstants> constants;
  std::optional<CorollaryResult> corollary;
  std::optional<JenkinsSerrin> jenkins_serrin;
  std::optional<bool> js_graph_ok;
};

/// Maximises the mo bound over delta in (0, delta_max (1 - 1e-6)].
double optimal_delta(const CriterionConstants& k);

/// Evaluates every condition from precomputed pieces; shared by the Euclidean
/// pipeline and the abstract (user-supplied geometry) mode.
Verdict evaluate_conditions(const DataStats& stats, const GeometrySummary& geom, const VerdictOptions& opts);

/// Verdict from an existing classification and data statistics. The
/// exterior-radius fit runs here when the boundary has a negative part and
/// `exterior` is empty.
Verdict assemble_verdict(const geom::Domain2D& domain, geom::BoundaryClassification cls,
                         std::optional<geom::ExteriorRadius> exterior, const DataStats& stats,
                         const VerdictOptions& opts = {});

/// Full pipeline on a planar domain.
Verdict verdict(const geom::Domain2D& domain, const expr::Expr& phi, const VerdictOptions& opts = {});

}  // namespace minsurf::criterion
