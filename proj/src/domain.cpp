#include "minsurf/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "minsurf/errors.hpp"
#include "minsurf/parallel.hpp"

namespace minsurf::geom {
namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr std::size_t kOrientationSamples = 4096;
constexpr std::size_t kMaxClassifySamples = std::size_t{1} << 20;

double shoelace(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) a += cross(pts[i], pts[(i + 1) % n]);
  return 0.5 * a;
}

/// Golden-section minimisation of f on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, int iters = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
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
  return fc < fd ? c : d;
}

/// Root of f on [a, b] with f(a) and f(b) of opposite sign (or zero).
template <class F>
double bisect_root(F&& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 100 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryCurve

BoundaryCurve BoundaryCurve::parametric(expr::Expr x, expr::Expr y, double period) {
  if (!(period > 0.0) || !std::isfinite(period)) throw InvalidCurve("period must be positive");
  for (const auto* e : {&x, &y})
    if (e->variables() != std::vector<std::string>{"t"})
      throw InvalidCurve("curve expressions must be in the single variable t");
  BoundaryCurve c;
  c.x_ = std::move(x);
  c.y_ = std::move(y);
  c.period_ = period;
  c.validate_and_orient();
  return c;
}

BoundaryCurve BoundaryCurve::parametric(std::string_view x, std::string_view y, double period) {
  return parametric(expr::Expr::parse(x, {"t"}), expr::Expr::parse(y, {"t"}), period);
}

BoundaryCurve BoundaryCurve::radial(std::string_view xi, double period) {
  expr::Expr r = expr::Expr::parse(xi, {"t"});  // diagnostics refer to the user's text
  const std::string src = r.to_string();
  BoundaryCurve c = parametric(expr::Expr::parse(src + " * cos(t)", {"t"}),
                               expr::Expr::parse(src + " * sin(t)", {"t"}), period);
  c.xi_ = std::move(r);
  c.form_ = Form::Radial;
  return c;
}

void BoundaryCurve::validate_and_orient() {
  reversed_ = false;
  const Vec2 a = point(0.0), b = point(period_);
  if (norm(a - b) > 1e-9) throw InvalidCurve("curve is not closed: |gamma(0) - gamma(period)| > 1e-9");
  std::vector<Vec2> pts(kOrientationSamples);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = period_ * double(i) / double(pts.size());
    const auto j = jet(t);
    if (norm(j.vel) < 1e-12) throw InvalidCurve("curve is not regular near t = " + std::to_string(t));
    pts[i] = j.pos;
  }
  const double area = shoelace(pts);
  if (std::abs(area) < 1e-14) throw InvalidCurve("curve encloses no area");
  reversed_ = area < 0.0;
}

expr::CurveJet BoundaryCurve::jet(double t) const {
  auto j = expr::eval_curve_jet(x_, y_, reversed_ ? -t : t);
  if (reversed_) j.vel = -j.vel;
  return j;
}

Vec2 BoundaryCurve::point(double t) const {
  const double s[1] = {reversed_ ? -t : t};
  return {x_.eval(s), y_.eval(s)};
}

Vec2 BoundaryCurve::tangent(double t) const {
  const Vec2 v = jet(t).vel;
  return v * (1.0 / norm(v));
}

Vec2 BoundaryCurve::outward_normal(double t) const {
  const Vec2 u = tangent(t);
  return {u.y, -u.x};
}

double curvature(const expr::CurveJet& j) {
  const double speed = norm(j.vel);
  if (speed < 1e-12) throw DegenerateVelocity("|gamma'| < 1e-12");
  return cross(j.vel, j.acc) / (speed * speed * speed);
}

double signed_curvature(const BoundaryCurve& curve, double t) { return curvature(curve.jet(t)); }

// ---------------------------------------------------------------------------
// Domain2D

Domain2D::Domain2D(BoundaryCurve boundary, std::optional<Vec2> interior_hint, std::size_t polyline_samples)
    : boundary_(std::move(boundary)), hint_(interior_hint) {
  if (polyline_samples < 64) throw std::invalid_argument("polyline_samples must be at least 64");
  poly_ = boundary_samples(polyline_samples);
  area_ = shoelace(poly_);
  double cx = 0.0, cy = 0.0;
  lo_ = hi_ = poly_.front();
  for (std::size_t i = 0, n = poly_.size(); i < n; ++i) {
    const Vec2 a = poly_[i], b = poly_[(i + 1) % n];
    const double w = cross(a, b);
    cx += (a.x + b.x) * w;
    cy += (a.y + b.y) * w;
    max_segment_ = std::max(max_segment_, norm(b - a));
    lo_ = {std::min(lo_.x, a.x), std::min(lo_.y, a.y)};
    hi_ = {std::max(hi_.x, a.x), std::max(hi_.y, a.y)};
  }
  centroid_ = {cx / (6.0 * area_), cy / (6.0 * area_)};
  build_index();
  check_simple();
  if (hint_ && contains(*hint_) != Location::Inside)
    throw InvalidCurve("interior hint does not lie inside the domain");
}

std::vector<Vec2> Domain2D::boundary_samples(std::size_t n) const {
  std::vector<Vec2> pts(n);
  parallel_for(n, [&](std::size_t i) { pts[i] = boundary_.point(boundary_.period() * double(i) / double(n)); });
  return pts;
}

Vec2 Domain2D::center() const { return hint_ ? *hint_ : centroid_; }

void Domain2D::check_simple() const {
  const std::size_t n = poly_.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto seg_min_x = [&](std::size_t i) { return std::min(poly_[i].x, poly_[(i + 1) % n].x); };
  auto seg_max_x = [&](std::size_t i) { return std::max(poly_[i].x, poly_[(i + 1) % n].x); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seg_min_x(a) < seg_min_x(b); });
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    const double xmax = seg_max_x(i);
    for (std::size_t m = k + 1; m < n && seg_min_x(order[m]) <= xmax; ++m) {
      const std::size_t j = order[m];
      const std::size_t diff = i > j ? i - j : j - i;
      if (diff <= 1 || diff == n - 1) continue;  // adjacent segments share a vertex
      if (segments_intersect(poly_[i], poly_[(i + 1) % n], poly_[j], poly_[(j + 1) % n]))
        throw InvalidCurve("boundary curve is not simple (sampled segments intersect)");
    }
  }
}

void Domain2D::build_index() {
  const std::size_t n = poly_.size();
  const double height = std::max(hi_.y - lo_.y, 1e-300);
  bands_.assign(std::max<std::size_t>(1, n / 8), {});
  const double band_h = height / double(bands_.size());
  auto band = [&](double y) {
    return std::min(bands_.size() - 1, static_cast<std::size_t>(std::max(0.0, (y - lo_.y) / band_h)));
  };
  cell_ = std::max({2.0 * max_segment_, (hi_.x - lo_.x) / 256.0, height / 256.0, 1e-300});
  cells_x_ = static_cast<std::size_t>((hi_.x - lo_.x) / cell_) + 1;
  cells_y_ = static_cast<std::size_t>(height / cell_) + 1;
  cells_.assign(cells_x_ * cells_y_, {});
  auto cx = [&](double x) { return std::min(cells_x_ - 1, static_cast<std::size_t>(std::max(0.0, (x - lo_.x) / cell_))); };
  auto cy = [&](double y) { return std::min(cells_y_ - 1, static_cast<std::size_t>(std::max(0.0, (y - lo_.y) / cell_))); };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly_[i], b = poly_[(i + 1) % n];
    for (std::size_t k = band(std::min(a.y, b.y)), e = band(std::max(a.y, b.y)); k <= e; ++k)
      bands_[k].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t ky = cy(std::min(a.y, b.y)), ey = cy(std::max(a.y, b.y)); ky <= ey; ++ky)
      for (std::size_t kx = cx(std::min(a.x, b.x)), ex = cx(std::max(a.x, b.x)); kx <= ex; ++kx)
        cells_[ky * cells_x_ + kx].push_back(static_cast<std::uint32_t>(i));
  }
}

bool Domain2D::near_polyline(Vec2 x) const {
  const std::size_t n = poly_.size();
  auto clamp_cell = [](double v, std::size_t count) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, double(count - 1)));
  };
  const std::size_t x0 = clamp_cell(std::floor((x.x - max_segment_ - lo_.x) / cell_), cells_x_);
  const std::size_t x1 = clamp_cell(std::floor((x.x + max_segment_ - lo_.x) / cell_), cells_x_);
  const std::size_t y0 = clamp_cell(std::floor((x.y - max_segment_ - lo_.y) / cell_), cells_y_);
  const std::size_t y1 = clamp_cell(std::floor((x.y + max_segment_ - lo_.y) / cell_), cells_y_);
  for (std::size_t ky = y0; ky <= y1; ++ky)
    for (std::size_t kx = x0; kx <= x1; ++kx)
      for (std::uint32_t i : cells_[ky * cells_x_ + kx]) {
        const Vec2 a = poly_[i];
        const Vec2 ab = poly_[(i + 1) % n] - a;
        const double len2 = norm2(ab);
        const double s = len2 > 0.0 ? std::clamp(dot(x - a, ab) / len2, 0.0, 1.0) : 0.0;
        if (norm(a + s * ab - x) <= max_segment_) return true;
      }
  return false;
}

int Domain2D::winding_number(Vec2 x) const {
  int wn = 0;
  if (x.y < lo_.y || x.y > hi_.y) return 0;
  const double band_h = std::max(hi_.y - lo_.y, 1e-300) / double(bands_.size());
  const std::size_t k = std::min(bands_.size() - 1, static_cast<std::size_t>((x.y - lo_.y) / band_h));
  for (std::uint32_t i : bands_[k]) {
    const std::size_t n = poly_.size();
    const Vec2 a = poly_[i], b = poly_[(i + 1) % n];
    if (a.y <= x.y) {
      if (b.y > x.y && cross(b - a, x - a) > 0.0) ++wn;
    } else if (b.y <= x.y && cross(b - a, x - a) < 0.0) {
      --wn;
    }
  }
  return wn;
}

double Domain2D::boundary_distance(Vec2 x, double* t_closest) const {
  const std::size_t n = poly_.size();
  const double dt = boundary_.period() / double(n);
  double best = std::numeric_limits<double>::infinity();
  double t0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly_[i], b = poly_[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = norm2(ab);
    double s = len2 > 0.0 ? std::clamp(dot(x - a, ab) / len2, 0.0, 1.0) : 0.0;
    const double d = norm(a + s * ab - x);
    if (d < best) {
      best = d;
      t0 = (double(i) + s) * dt;
    }
  }
  // Newton on f(t) = |gamma(t) - x|^2 / 2, kept within one segment of the start.
  double t = t0;
  for (int it = 0; it < 30; ++it) {
    const auto j = boundary_.jet(t);
    const Vec2 r = j.pos - x;
    const double g = dot(r, j.vel);
    double h = norm2(j.vel) + dot(r, j.acc);
    if (h <= 0.0) h = norm2(j.vel);
    const double step = std::clamp(-g / h, -dt, dt);
    t = std::clamp(t + step, t0 - 2.0 * dt, t0 + 2.0 * dt);
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(t))) break;
  }
  const double d = norm(boundary_.point(t) - x);
  if (t_closest) *t_closest = t;
  return std::min(d, best);
}

Location Domain2D::contains(Vec2 x) const {
  if (x.x < lo_.x - max_segment_ || x.x > hi_.x + max_segment_ || x.y < lo_.y - max_segment_ ||
      x.y > hi_.y + max_segment_)
    return Location::Outside;
  // far from the polyline the winding number decides
  if (!near_polyline(x)) return winding_number(x) != 0 ? Location::Inside : Location::Outside;

  double t = 0.0;
  const double d = boundary_distance(x, &t);
  if (d <= kBoundaryTol) return Location::Boundary;
  return dot(x - boundary_.point(t), boundary_.outward_normal(t)) > 0.0 ? Location::Outside : Location::Inside;
}

// ---------------------------------------------------------------------------
// Curvature classification

bool BoundaryClassification::in_negative_part(double t, double period) const {
  for (const auto& arc : negative_arcs) {
    double u = std::fmod(t - arc.t_begin, period);
    if (u < 0.0) u += period;
    if (u <= arc.t_end - arc.t_begin) return true;
  }
  return false;
}

BoundaryClassification classify_boundary(const Domain2D& domain, std::size_t n_samples, double eps_neg) {
  if (n_samples < 64) throw std::invalid_argument("classify_boundary needs at least 64 samples");
  const BoundaryCurve& curve = domain.boundary();
  const double period = curve.period();
  auto kappa = [&](double t) { return signed_curvature(curve, t); };

  auto scan = [&](std::size_t n) {
    std::vector<CurvatureSample> s(n);
    parallel_for(n, [&](std::size_t i) {
      const double t = period * double(i) / double(n);
      const auto j = curve.jet(t);
      s[i] = {t, j.pos, curvature(j)};
    });
    return s;
  };
  auto min_kappa = [](const std::vector<CurvatureSample>& s) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& x : s) m = std::min(m, x.kappa);
    return m;
  };

  std::size_t n = n_samples;
  auto samples = scan(n);
  double kmin = min_kappa(samples);
  for (;;) {
    if (2 * n > kMaxClassifySamples)
      throw NotConverged("curvature extrema did not converge within 2^20 samples");
    auto finer = scan(2 * n);
    const double kfine = min_kappa(finer);
    const bool done = std::abs(kfine - kmin) < 1e-4;
    samples = std::move(finer);
    kmin = kfine;
    n *= 2;
    if (done) break;
  }

  BoundaryClassification cls;
  cls.eps_neg = eps_neg;
  cls.n_samples = n;
  const double h = period / double(n);

  std::size_t imin = 0, iabs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i].kappa < samples[imin].kappa) imin = i;
    if (std::abs(samples[i].kappa) > std::abs(samples[iabs].kappa)) iabs = i;
  }
  {
    const double t = golden_min(kappa, samples[imin].t - h, samples[imin].t + h);
    cls.t_kappa_min = std::fmod(t + period, period);
    cls.kappa_min = std::min(kappa(t), samples[imin].kappa);
    const double ta = golden_min([&](double s) { return -std::abs(kappa(s)); }, samples[iabs].t - h,
                                 samples[iabs].t + h);
    cls.kappa_max_abs = std::max(std::abs(kappa(ta)), std::abs(samples[iabs].kappa));
  }

  // Maximal cyclic runs of kappa < -eps_neg.
  std::vector<char> neg(n);
  for (std::size_t i = 0; i < n; ++i) neg[i] = samples[i].kappa < -eps_neg;
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i)
    if (!neg[i]) {
      start = i;
      break;
    }
  if (start == n) throw InvalidCurve("curvature negative everywhere; orientation is inconsistent");

  auto kappa_at = [&](long long idx) {
    const long long m = static_cast<long long>(n);
    return samples[static_cast<std::size_t>(((idx % m) + m) % m)].kappa;
  };
  for (std::size_t k = 1; k <= n; ++k) {
    const long long i = static_cast<long long>(start + k);
    if (!neg[static_cast<std::size_t>(i % static_cast<long long>(n))]) continue;
    if (neg[static_cast<std::size_t>((i - 1) % static_cast<long long>(n))]) continue;
    // i is the first index of a run
    long long last = i;
    while (neg[static_cast<std::size_t>((last + 1) % static_cast<long long>(n))]) ++last;
    long long lo = i - 1;
    while (kappa_at(lo) < 0.0) --lo;
    long long hi = last + 1;
    while (kappa_at(hi) < 0.0) ++hi;
    NegativeArc arc;
    arc.t_begin = bisect_root(kappa, double(lo) * h, double(lo + 1) * h);
    arc.t_end = bisect_root([&](double t) { return -kappa(t); }, double(hi - 1) * h, double(hi) * h);
    long long arg = i;
    for (long long q = i; q <= last; ++q)
      if (kappa_at(q) < kappa_at(arg)) arg = q;
    const double tm = golden_min(kappa, std::max(arc.t_begin, double(arg - 1) * h),
                                 std::min(arc.t_end, double(arg + 1) * h));
    arc.t_min = tm;
    arc.kappa_min = std::min(kappa(tm), kappa_at(arg));
    if (arc.kappa_min == kappa_at(arg) && kappa(tm) > kappa_at(arg)) arc.t_min = double(arg) * h;
    // normalise to t_begin in [0, period)
    const double shift = std::floor(arc.t_begin / period) * period;
    arc.t_begin -= shift;
    arc.t_end -= shift;
    arc.t_min -= shift;
    if (arc.t_min < 0.0) arc.t_min += period;
    cls.negative_arcs.push_back(arc);
  }
  std::sort(cls.negative_arcs.begin(), cls.negative_arcs.end(),
            [](const NegativeArc& a, const NegativeArc& b) { return a.t_begin < b.t_begin; });
  cls.samples = std::move(samples);
  return cls;
}

// ---------------------------------------------------------------------------
// Exterior spheres

ExteriorSphere exterior_sphere_at(const Domain2D& domain, double t, double r) {
  const BoundaryCurve& c = domain.boundary();
  ExteriorSphere s;
  s.t_tangency = t;
  s.p = c.point(t);
  s.p0 = s.p + r * c.outward_normal(t);
  s.r = r;
  return s;
}

double disk_clearance(const ExteriorSphere& sphere, std::span<const Vec2> boundary) {
  double m = std::numeric_limits<double>::infinity();
  for (const Vec2& q : boundary) m = std::min(m, norm(q - sphere.p0) - sphere.r);
  return m;
}

ExteriorRadius exterior_radius(const Domain2D& domain, const BoundaryClassification& cls) {
  if (!cls.has_negative_part()) throw NoNegativePart("the boundary has no non-mean-convex part");
  const BoundaryCurve& curve = domain.boundary();
  const double period = curve.period();

  std::vector<double> ts;
  for (const auto& arc : cls.negative_arcs) {
    ts.push_back(arc.t_begin);
    ts.push_back(arc.t_end);
    ts.push_back(arc.t_min);
  }
  for (const auto& s : cls.samples)
    if (cls.in_negative_part(s.t, period)) ts.push_back(s.t);

  ExteriorRadius out;
  out.osculating_bound = std::numeric_limits<double>::infinity();
  for (const auto& arc : cls.negative_arcs)
    out.osculating_bound = std::min(out.osculating_bound, 1.0 / std::abs(arc.kappa_min));

  // For a disk tangent at p with outward normal nu, a boundary point q with
  // w = (q - p).nu > 0 stays outside the disk iff r <= |q - p|^2 / (2 w).
  const std::vector<Vec2>& boundary = domain.polyline();
  const double scale = domain.diameter();
  std::vector<double> fit(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) {
    const Vec2 p = curve.point(ts[k]);
    const Vec2 nu = curve.outward_normal(ts[k]);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : boundary) {
      const Vec2 d = q - p;
      const double w = dot(d, nu);
      if (w > 1e-14 * scale) best = std::min(best, norm2(d) / (2.0 * w));
    }
    fit[k] = best;
  });
  out.fit_bound = std::numeric_limits<double>::infinity();
  for (double f : fit) out.fit_bound = std::min(out.fit_bound, f);

  out.r = std::min(out.osculating_bound, out.fit_bound);
  if (!(out.r > 1e-9 * scale) || !std::isfinite(out.r))
    throw FitFailure("no exterior disk of positive radius fits at the non-mean-convex boundary");
  for (const auto& arc : cls.negative_arcs) out.spheres.push_back(exterior_sphere_at(domain, arc.t_min, out.r));
  return out;
}

Jet2 distance_jet(const ExteriorSphere& sphere, Vec2 x) {
  const Vec2 v = x - sphere.p0;
  const double rho = norm(v);
  if (rho < 1e-9) throw CenterSingularity("point coincides with the sphere centre");
  const Vec2 n = v * (1.0 / rho);
  Jet2 j(2, rho - sphere.r);
  j.grad(0) = n.x;
  j.grad(1) = n.y;
  j.hess(0, 0) = (1.0 - n.x * n.x) / rho;
  j.hess(0, 1) = -n.x * n.y / rho;
  j.hess(1, 1) = (1.0 - n.y * n.y) / rho;
  return j;
}

// ---------------------------------------------------------------------------
// Region sampling

std::vector<Vec2> RegionSample::all() const {
  std::vector<Vec2> out;
  out.reserve(size());
  out.insert(out.end(), interior.begin(), interior.end());
  out.insert(out.end(), boundary_trace.begin(), boundary_trace.end());
  out.insert(out.end(), cap.begin(), cap.end());
  return out;
}

RegionSample sample_region(const Domain2D& domain, const ExteriorSphere& sphere, double delta,
                           std::size_t density) {
  if (!(delta > 0.0)) throw std::invalid_argument("sample_region needs delta > 0");
  if (density == 0) throw std::invalid_argument("sample_region needs a positive density");
  const double R = sphere.r + delta;
  const Vec2 lo{std::max(sphere.p0.x - R, domain.bbox_min().x), std::max(sphere.p0.y - R, domain.bbox_min().y)};
  const Vec2 hi{std::min(sphere.p0.x + R, domain.bbox_max().x), std::min(sphere.p0.y + R, domain.bbox_max().y)};

  RegionSample out;
  auto in_ball = [&](Vec2 x) { return norm(x - sphere.p0) <= R; };

  auto grid = [&](double h) {
    std::vector<Vec2> pts;
    if (!(hi.x > lo.x && hi.y > lo.y)) return pts;
    const auto nx = static_cast<std::size_t>(std::floor((hi.x - lo.x) / h)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor((hi.y - lo.y) / h)) + 1;
    std::vector<char> keep(nx * ny, 0);
    parallel_for(nx * ny, [&](std::size_t k) {
      const Vec2 x{lo.x + h * double(k % nx), lo.y + h * double(k / nx)};
      keep[k] = in_ball(x) && domain.contains(x) == Location::Inside;
    });
    for (std::size_t k = 0; k < nx * ny; ++k)
      if (keep[k]) pts.push_back({lo.x + h * double(k % nx), lo.y + h * double(k / nx)});
    return pts;
  };

  if (hi.x > lo.x && hi.y > lo.y) {
    // coarse pass to estimate the region's area
    const double hc = std::max(hi.x - lo.x, hi.y - lo.y) / 64.0;
    const double est = double(grid(hc).size()) * hc * hc;
    double h = est > 0.0 ? std::sqrt(est / double(density)) : hc / std::sqrt(double(density));
    for (int attempt = 0; attempt < 12; ++attempt) {
      out.interior = grid(h);
      out.spacing = h;
      if (out.interior.size() >= density) break;
      if (out.interior.empty() && est == 0.0) break;  // sliver below grid resolution
      h *= 0.85;
    }
  }

  // boundary curve inside the ball, including the tangency point itself
  const std::size_t nb = std::max<std::size_t>(domain.polyline().size(), 4 * density / 10);
  for (const Vec2& q : domain.boundary_samples(nb))
    if (in_ball(q)) out.boundary_trace.push_back(q);
  if (in_ball(sphere.p) && domain.contains(sphere.p) == Location::Boundary) out.boundary_trace.push_back(sphere.p);

  // the cap |x - p0| = R inside the domain
  const std::size_t nc = std::max<std::size_t>(256, static_cast<std::size_t>(4.0 * std::sqrt(double(density))));
  std::vector<char> keep(nc, 0);
  parallel_for(nc, [&](std::size_t k) {
    const double a = 2.0 * std::numbers::pi * double(k) / double(nc);
    keep[k] = domain.contains(sphere.p0 + R * Vec2{std::cos(a), std::sin(a)}) == Location::Inside;
  });
  for (std::size_t k = 0; k < nc; ++k) {
    const double a = 2.0 * std::numbers::pi * double(k) / double(nc);
    if (keep[k]) out.cap.push_back(sphere.p0 + R * Vec2{std::cos(a), std::sin(a)});
  }

  if (out.size() == 0) throw EmptyRegion("no sample point lies in B(p0, r + delta) ∩ domain");
  return out;
}

}  // namespace minsurf::geom
