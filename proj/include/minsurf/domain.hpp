#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minsurf/expr.hpp"
#include "minsurf/jet.hpp"
#include "minsurf/vec2.hpp"

namespace minsurf::geom {

/// Closed regular plane curve t -> (x(t), y(t)), t in [0, period].
///
/// Curves are normalised to counterclockwise orientation at construction
/// (orientation is detected from the signed area); `reversed()` reports
/// whether the input had to be flipped, in which case the stored curve is
/// t -> gamma(-t).
class BoundaryCurve {
public:
  enum class Form { Parametric, Radial };

  static BoundaryCurve parametric(expr::Expr x, expr::Expr y, double period);
  static BoundaryCurve parametric(std::string_view x, std::string_view y, double period);
  /// xi(t) * (cos t, sin t).
  static BoundaryCurve radial(std::string_view xi, double period);

  expr::CurveJet jet(double t) const;
  Vec2 point(double t) const;
  /// Unit tangent and outward unit normal (interior on the left).
  Vec2 tangent(double t) const;
  Vec2 outward_normal(double t) const;

  double period() const noexcept { return period_; }
  bool reversed() const noexcept { return reversed_; }
  Form form() const noexcept { return form_; }
  const expr::Expr& x_expr() const noexcept { return x_; }
  const expr::Expr& y_expr() const noexcept { return y_; }
  /// Only for Form::Radial.
  const expr::Expr& radial_expr() const noexcept { return xi_; }

private:
  BoundaryCurve() = default;
  void validate_and_orient();

  expr::Expr x_, y_, xi_;
  double period_ = 0.0;
  bool reversed_ = false;
  Form form_ = Form::Parametric;
};

/// kappa = cross(gamma', gamma'') / |gamma'|^3 for the given parametrisation.
double curvature(const expr::CurveJet& j);

/// Signed curvature with respect to the inner normal: positive where the
/// domain is locally convex. Throws DegenerateVelocity if |gamma'| < 1e-12.
double signed_curvature(const BoundaryCurve& curve, double t);

enum class Location { Inside, Boundary, Outside };

/// Bounded planar domain enclosed by a simple closed curve. Membership and fit
/// tests run against a dense polyline of the boundary; points close to the
/// polyline are resolved against the exact curve.
class Domain2D {
public:
  explicit Domain2D(BoundaryCurve boundary, std::optional<Vec2> interior_hint = std::nullopt,
                    std::size_t polyline_samples = 4096);

  const BoundaryCurve& boundary() const noexcept { return boundary_; }
  const std::optional<Vec2>& interior_hint() const noexcept { return hint_; }

  const std::vector<Vec2>& polyline() const noexcept { return poly_; }
  double polyline_param(std::size_t i) const { return boundary_.period() * double(i) / double(poly_.size()); }
  /// Denser uniform-in-t sample of the boundary (n points).
  std::vector<Vec2> boundary_samples(std::size_t n) const;

  double area() const noexcept { return area_; }
  Vec2 bbox_min() const noexcept { return lo_; }
  Vec2 bbox_max() const noexcept { return hi_; }
  double diameter() const noexcept { return norm(hi_ - lo_); }
  /// Interior hint if given, else the area centroid.
  Vec2 center() const;

  /// Three-valued membership; points within 1e-9 of the curve are Boundary.
  Location contains(Vec2 x) const;
  /// Distance to the exact curve near the polyline's closest segment; also
  /// reports the curve parameter of the closest point.
  double boundary_distance(Vec2 x, double* t_closest = nullptr) const;

private:
  int winding_number(Vec2 x) const;
  bool near_polyline(Vec2 x) const;
  void build_index();
  void check_simple() const;

  BoundaryCurve boundary_;
  std::optional<Vec2> hint_;
  std::vector<Vec2> poly_;
  double max_segment_ = 0.0;
  // segment buckets: horizontal bands for the winding number, square cells for proximity
  std::vector<std::vector<std::uint32_t>> bands_;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::size_t cells_x_ = 0, cells_y_ = 0;
  double cell_ = 0.0;
  double area_ = 0.0;
  Vec2 centroid_, lo_, hi_;
};

struct CurvatureSample {
  double t = 0.0;
  Vec2 point;
  double kappa = 0.0;
};

/// Parameter interval [t_begin, t_end] (t_end may exceed the period when the
/// arc wraps through t = 0) on which kappa < 0, extended to its zero crossings.
struct NegativeArc {
  double t_begin = 0.0;
  double t_end = 0.0;
  double t_min = 0.0;
  double kappa_min = 0.0;
};

struct BoundaryClassification {
  std::vector<CurvatureSample> samples;
  double kappa_min = 0.0;
  double t_kappa_min = 0.0;
  double kappa_max_abs = 0.0;
  std::vector<NegativeArc> negative_arcs;
  double eps_neg = 1e-8;
  std::size_t n_samples = 0;

  bool has_negative_part() const noexcept { return !negative_arcs.empty(); }
  /// True if t (taken modulo the period) lies in the closure of an arc.
  bool in_negative_part(double t, double period) const;
};

/// Samples kappa on a uniform grid, doubling until kappa_min moves by less
/// than 1e-4 (NotConverged past 2^20 samples), then polishes the extrema.
BoundaryClassification classify_boundary(const Domain2D& domain, std::size_t n_samples = 1024,
                                         double eps_neg = 1e-8);

struct ExteriorSphere {
  double t_tangency = 0.0;
  Vec2 p;   // tangency point on the boundary
  Vec2 p0;  // centre, p + r * outward normal
  double r = 0.0;
};

struct ExteriorRadius {
  double r = 0.0;
  double osculating_bound = 0.0;  // min over the negative part of 1/|kappa|
  double fit_bound = 0.0;         // largest radius the complement admits
  std::vector<ExteriorSphere> spheres;  // one per arc, at its curvature minimiser
};

/// Largest uniform radius r such that at every sampled point of the negative
/// part the tangent exterior disk of radius r misses the domain, capped by the
/// osculating bound. Throws NoNegativePart or FitFailure.
ExteriorRadius exterior_radius(const Domain2D& domain, const BoundaryClassification& cls);

/// Tangent exterior sphere of radius r at boundary parameter t.
ExteriorSphere exterior_sphere_at(const Domain2D& domain, double t, double r);

/// Smallest |q - p0| - r over the given boundary points (>= -tol means the
/// disk lies in the complement up to tol).
double disk_clearance(const ExteriorSphere& sphere, std::span<const Vec2> boundary);

/// Jet of d(x) = |x - p0| - r. Throws CenterSingularity within 1e-9 of p0.
Jet2 distance_jet(const ExteriorSphere& sphere, Vec2 x);

/// Sample points of Lambda = B_{r+delta}(p0) ∩ domain.
struct RegionSample {
  std::vector<Vec2> interior;        // grid points strictly inside
  std::vector<Vec2> boundary_trace;  // points of the boundary curve inside the ball
  std::vector<Vec2> cap;             // points of the sphere |x - p0| = r + delta inside the domain
  double spacing = 0.0;

  std::size_t size() const { return interior.size() + boundary_trace.size() + cap.size(); }
  std::vector<Vec2> all() const;
};

/// Quasi-uniform grid with at least `density` interior points when the
/// region allows it. Throws EmptyRegion if nothing qualifies.
RegionSample sample_region(const Domain2D& domain, const ExteriorSphere& sphere, double delta,
                           std::size_t density);

}  // namespace minsurf::geom
