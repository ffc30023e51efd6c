#include "minsurf/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "minsurf/parallel.hpp"

namespace minsurf::fem {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

struct Element {
  double area = 0.0;
  std::array<Vec2, 3> g;  // gradients of the barycentric coordinates
};

std::vector<Element> elements(const Mesh& mesh) {
  std::vector<Element> el(mesh.triangles.size());
  for (std::size_t k = 0; k < el.size(); ++k) {
    const auto& tr = mesh.triangles[k];
    const Vec2 p[3] = {mesh.nodes[tr[0]], mesh.nodes[tr[1]], mesh.nodes[tr[2]]};
    el[k].area = signed_area(p[0], p[1], p[2]);
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = p[(i + 1) % 3], b = p[(i + 2) % 3];
      el[k].g[i] = Vec2{a.y - b.y, b.x - a.x} * (0.5 / el[k].area);
    }
  }
  return el;
}

Vec2 element_gradient(const Mesh& mesh, const Element& e, std::size_t k, std::span<const double> u) {
  const auto& tr = mesh.triangles[k];
  return u[tr[0]] * e.g[0] + u[tr[1]] * e.g[1] + u[tr[2]] * e.g[2];
}

double energy_impl(const Mesh& mesh, const std::vector<Element>& el, std::span<const double> u) {
  std::vector<double> part(el.size());
  parallel_for(el.size(), [&](std::size_t k) {
    const Vec2 q = element_gradient(mesh, el[k], k, u);
    part[k] = el[k].area * std::sqrt(1.0 + norm2(q));
  });
  double e = 0.0;
  for (double v : part) e += v;
  return e;
}

// E(v) - E(u) summed per triangle without cancelling the large common part.
double energy_change(const Mesh& mesh, const std::vector<Element>& el, std::span<const double> u,
                     std::span<const double> v) {
  std::vector<double> part(el.size());
  parallel_for(el.size(), [&](std::size_t k) {
    const Vec2 q0 = element_gradient(mesh, el[k], k, u);
    const Vec2 q1 = element_gradient(mesh, el[k], k, v);
    const double w0 = std::sqrt(1.0 + norm2(q0)), w1 = std::sqrt(1.0 + norm2(q1));
    part[k] = el[k].area * dot(q1 - q0, q1 + q0) / (w0 + w1);
  });
  double d = 0.0;
  for (double p : part) d += p;
  return d;
}

struct Local {
  std::array<double, 3> grad;
  std::array<double, 9> hess;
};

std::vector<Local> local_terms(const Mesh& mesh, const std::vector<Element>& el, std::span<const double> u) {
  std::vector<Local> loc(el.size());
  parallel_for(el.size(), [&](std::size_t k) {
    const Element& e = el[k];
    const Vec2 q = element_gradient(mesh, e, k, u);
    const double W = std::sqrt(1.0 + norm2(q));
    double qg[3];
    for (int i = 0; i < 3; ++i) {
      qg[i] = dot(q, e.g[i]);
      loc[k].grad[i] = e.area * qg[i] / W;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        loc[k].hess[3 * i + j] = e.area * (dot(e.g[i], e.g[j]) / W - qg[i] * qg[j] / (W * W * W));
  });
  return loc;
}

std::vector<double> accumulate_gradient(const Mesh& mesh, const std::vector<Local>& loc) {
  std::vector<double> g(mesh.size(), 0.0);
  for (std::size_t k = 0; k < loc.size(); ++k)
    for (int i = 0; i < 3; ++i) g[mesh.triangles[k][i]] += loc[k].grad[i];
  return g;
}

double interior_max_norm(const Mesh& mesh, const std::vector<double>& g) {
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mesh.boundary[i]) m = std::max(m, std::abs(g[i]));
  return m;
}

}  // namespace

double Mesh::h() const {
  double h = 0.0;
  for (const auto& tr : triangles)
    for (int i = 0; i < 3; ++i) h = std::max(h, norm(nodes[tr[i]] - nodes[tr[(i + 1) % 3]]));
  return h;
}

Mesh triangulate_star(const geom::Domain2D& domain, int n_radial, int n_angular) {
  if (n_radial < 4 || n_angular < 16) throw std::invalid_argument("mesh needs n_radial >= 4 and n_angular >= 16");
  const geom::BoundaryCurve& curve = domain.boundary();
  const Vec2 c = domain.center();
  const double P = curve.period();

  // visibility: the polar angle about c must increase strictly along the curve
  const std::size_t ns = 8192;
  std::vector<double> ts(ns + 1), ang(ns + 1);
  for (std::size_t k = 0; k <= ns; ++k) {
    ts[k] = P * double(k) / double(ns);
    const expr::CurveJet j = curve.jet(ts[k]);
    const Vec2 v = j.pos - c;
    if (!(cross(v, j.vel) > 1e-12 * norm(v) * norm(j.vel)))
      throw NotStarShaped("boundary point (" + std::to_string(j.pos.x) + ", " + std::to_string(j.pos.y) +
                          ") is not visible from the centre");
    const double raw = std::atan2(v.y, v.x);
    ang[k] = k == 0 ? raw : ang[k - 1] + wrap_angle(raw - ang[k - 1]);
  }
  if (std::abs(ang[ns] - ang[0] - kTwoPi) > 1e-6) throw NotStarShaped("boundary does not wind once around the centre");

  auto angle_at = [&](double t, std::size_t k) {
    const Vec2 v = curve.point(t) - c;
    return ang[k] + wrap_angle(std::atan2(v.y, v.x) - ang[k]);
  };

  Mesh m;
  m.n_radial = n_radial;
  m.n_angular = n_angular;
  m.center = c;
  std::vector<double> ray_t(n_angular);
  std::vector<Vec2> ray_end(n_angular);
  for (int j = 0; j < n_angular; ++j) {
    const double target = ang[0] + kTwoPi * double(j) / double(n_angular);
    if (j == 0) {
      ray_t[j] = 0.0;
    } else {
      const std::size_t k = std::upper_bound(ang.begin(), ang.end(), target) - ang.begin() - 1;
      double lo = ts[k], hi = ts[std::min(k + 1, ns)];
      for (int it = 0; it < 100 && hi - lo > 1e-15 * P; ++it) {
        const double mid = 0.5 * (lo + hi);
        (angle_at(mid, k) < target ? lo : hi) = mid;
      }
      ray_t[j] = 0.5 * (lo + hi);
    }
    ray_end[j] = curve.point(ray_t[j]);
  }

  m.nodes.reserve(1 + std::size_t(n_radial) * n_angular);
  m.nodes.push_back(c);
  m.boundary.push_back(0);
  m.t.push_back(std::numeric_limits<double>::quiet_NaN());
  for (int i = 1; i <= n_radial; ++i)
    for (int j = 0; j < n_angular; ++j) {
      const bool on_boundary = i == n_radial;
      const double s = double(i) / double(n_radial);
      m.nodes.push_back(on_boundary ? ray_end[j] : c + s * (ray_end[j] - c));
      m.boundary.push_back(on_boundary);
      m.t.push_back(on_boundary ? ray_t[j] : std::numeric_limits<double>::quiet_NaN());
    }

  auto add = [&](int a, int b, int d) {
    if (signed_area(m.nodes[a], m.nodes[b], m.nodes[d]) < 0.0) std::swap(b, d);
    if (!(signed_area(m.nodes[a], m.nodes[b], m.nodes[d]) > 1e-14))
      throw std::logic_error("degenerate triangle in the polar mesh");
    m.triangles.push_back({a, b, d});
  };
  for (int j = 0; j < n_angular; ++j) add(0, m.node(1, j), m.node(1, j + 1));
  for (int i = 1; i < n_radial; ++i)
    for (int j = 0; j < n_angular; ++j) {
      const int a = m.node(i, j), b = m.node(i, j + 1), c2 = m.node(i + 1, j + 1), d = m.node(i + 1, j);
      add(a, b, c2);
      add(a, c2, d);
    }
  return m;
}

double energy(const Mesh& mesh, std::span<const double> u) { return energy_impl(mesh, elements(mesh), u); }

std::vector<double> energy_gradient(const Mesh& mesh, std::span<const double> u) {
  return accumulate_gradient(mesh, local_terms(mesh, elements(mesh), u));
}

SolveResult solve(const Mesh& mesh, const expr::Expr& phi, const SolveOptions& opts) {
  std::vector<double> u(mesh.size());
  double bsum = 0.0;
  std::size_t bn = 0;
  for (std::size_t i = 0; i < mesh.size(); ++i)
    if (mesh.boundary[i]) {
      const double p[2] = {mesh.nodes[i].x, mesh.nodes[i].y};
      u[i] = phi.eval(p);
      bsum += u[i];
      ++bn;
    }
  const double mean = bn ? bsum / double(bn) : 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i)
    if (!mesh.boundary[i]) {
      const double p[2] = {mesh.nodes[i].x, mesh.nodes[i].y};
      try {
        u[i] = phi.eval(p);
        if (!std::isfinite(u[i])) u[i] = mean;
      } catch (const DomainError&) {
        u[i] = mean;
      }
    }
  return solve(mesh, std::move(u), opts);
}

SolveResult solve(const Mesh& mesh, std::vector<double> u, const SolveOptions& opts) {
  if (u.size() != mesh.size()) throw std::invalid_argument("initial vector does not match the mesh");
  const std::vector<Element> el = elements(mesh);

  std::vector<int> unknown(mesh.size(), -1);
  int n_unknowns = 0;
  for (std::size_t i = 0; i < mesh.size(); ++i)
    if (!mesh.boundary[i]) unknown[i] = n_unknowns++;

  SolveResult res;
  double E = energy_impl(mesh, el, u);
  std::vector<Local> loc = local_terms(mesh, el, u);
  std::vector<double> g = accumulate_gradient(mesh, loc);
  double gn = interior_max_norm(mesh, g);
  res.energy.push_back(E);
  res.grad_norm.push_back(gn);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  std::vector<Eigen::Triplet<double>> trip;
  while (gn >= opts.grad_tol && res.iterations < opts.max_iterations) {
    trip.clear();
    trip.reserve(loc.size() * 9);
    for (std::size_t k = 0; k < loc.size(); ++k) {
      const auto& tr = mesh.triangles[k];
      for (int a = 0; a < 3; ++a) {
        const int ia = unknown[tr[a]];
        if (ia < 0) continue;
        for (int b = 0; b < 3; ++b) {
          const int ib = unknown[tr[b]];
          if (ib >= 0) trip.emplace_back(ia, ib, loc[k].hess[3 * a + b]);
        }
      }
    }
    Eigen::SparseMatrix<double> H(n_unknowns, n_unknowns);
    H.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(n_unknowns);
    for (std::size_t i = 0; i < mesh.size(); ++i)
      if (unknown[i] >= 0) rhs[unknown[i]] = -g[i];
    if (res.iterations == 0) ldlt.analyzePattern(H);
    ldlt.factorize(H);
    if (ldlt.info() != Eigen::Success) throw InternalError("sparse factorisation of the energy Hessian failed");
    const Eigen::VectorXd step = ldlt.solve(rhs);

    double slope = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i)
      if (unknown[i] >= 0) slope += g[i] * step[unknown[i]];

    std::vector<double> trial(u);
    double alpha = 1.0, dE = 0.0;
    bool accepted = false;
    // below this the predicted decrease is lost in the rounding of E
    const double noise = 1e-13 * std::abs(E);
    for (int h = 0; h <= opts.max_halvings && -slope > noise; ++h, alpha *= 0.5) {
      for (std::size_t i = 0; i < mesh.size(); ++i)
        if (unknown[i] >= 0) trial[i] = u[i] + alpha * step[unknown[i]];
      dE = energy_change(mesh, el, u, trial);
      if (dE <= opts.armijo * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // the decrease can still fall below rounding; take the full step if it
      // does not raise the energy and shrinks the gradient
      for (std::size_t i = 0; i < mesh.size(); ++i)
        if (unknown[i] >= 0) trial[i] = u[i] + step[unknown[i]];
      dE = energy_change(mesh, el, u, trial);
      const std::vector<Local> l2 = local_terms(mesh, el, trial);
      const double gn2 = interior_max_norm(mesh, accumulate_gradient(mesh, l2));
      if (!(dE <= noise && gn2 < gn)) {
        res.u = u;
        res.max_residual = gn;
        res.stop_reason = "LineSearchStall";
        char msg[96];
        std::snprintf(msg, sizeof msg, "no energy decrease along the Newton direction (gradient %.3g)", gn);
        throw SolveStalled(msg,
                           std::move(res));
      }
    }
    u.swap(trial);
    E += dE;
    loc = local_terms(mesh, el, u);
    g = accumulate_gradient(mesh, loc);
    gn = interior_max_norm(mesh, g);
    ++res.iterations;
    res.energy.push_back(E);
    res.grad_norm.push_back(gn);
  }
  res.converged = gn < opts.grad_tol;
  res.stop_reason = res.converged ? "gradient below tolerance" : "iteration limit";
  res.max_residual = gn;
  res.u = std::move(u);
  return res;
}

SolutionCheck verify_solution(const Mesh& mesh, std::span<const double> u, const expr::Expr& phi,
                              std::span<const barrier::BarrierProfile> barriers, double tol_mesh) {
  SolutionCheck sc;
  sc.tol_mesh = tol_mesh;
  sc.boundary_min = std::numeric_limits<double>::infinity();
  sc.boundary_max = -sc.boundary_min;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (!mesh.boundary[i]) continue;
    const double p[2] = {mesh.nodes[i].x, mesh.nodes[i].y};
    const double f = phi.eval(p);
    sc.boundary_min = std::min(sc.boundary_min, f);
    sc.boundary_max = std::max(sc.boundary_max, f);
    sc.trace_error = std::max(sc.trace_error, std::abs(u[i] - f));
  }
  sc.trace_pass = sc.trace_error == 0.0;

  sc.mp_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (mesh.boundary[i]) continue;
    const double m = std::min(u[i] - sc.boundary_min, sc.boundary_max - u[i]);
    if (m < sc.mp_margin) {
      sc.mp_margin = m;
      sc.mp_worst_node = int(i);
    }
  }
  sc.mp_pass = sc.mp_margin >= 0.0;

  sc.bracket_margin = std::numeric_limits<double>::infinity();
  for (const barrier::BarrierProfile& b : barriers) {
    const double R = b.sphere.r + b.delta;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const double dist = norm(mesh.nodes[i] - b.sphere.p0);
      if (dist > R) continue;
      ++sc.bracket_nodes;
      const double p[2] = {mesh.nodes[i].x, mesh.nodes[i].y};
      const double f = phi.eval(p);
      const double psi = barrier::psi_unchecked(b, std::clamp(dist - b.sphere.r, 0.0, b.delta)).psi;
      const double m = std::min(f + psi + tol_mesh - u[i], u[i] - (f - psi) + tol_mesh);
      if (m < sc.bracket_margin) {
        sc.bracket_margin = m;
        sc.bracket_worst_node = int(i);
      }
    }
  }
  if (sc.bracket_nodes == 0) sc.bracket_margin = 0.0;
  sc.bracket_pass = sc.bracket_margin >= 0.0;
  return sc;
}

Richardson richardson(const geom::Domain2D& domain, const expr::Expr& phi, int n_radial, int n_angular,
                      const SolveOptions& opts) {
  Richardson r;
  std::vector<Mesh> meshes;
  for (int k = 0; k < 3; ++k) {
    const int s = 1 << k;
    meshes.push_back(triangulate_star(domain, n_radial * s, n_angular * s));
    r.levels.push_back({n_radial * s, n_angular * s, solve(meshes.back(), phi, opts)});
  }
  auto value = [&](int level, int ring, int ray) {
    const int s = 1 << level;
    return r.levels[level].result.u[meshes[level].node(ring * s, ray * s)];
  };
  for (int i = 0; i <= n_radial; ++i)
    for (int j = 0; j < (i == 0 ? 1 : n_angular); ++j) {
      r.diff_coarse = std::max(r.diff_coarse, std::abs(value(0, i, j) - value(1, i, j)));
      r.diff_fine = std::max(r.diff_fine, std::abs(value(1, i, j) - value(2, i, j)));
    }
  r.ratio = r.diff_fine > 0.0 ? r.diff_coarse / r.diff_fine : std::numeric_limits<double>::infinity();
  // e_fine ~ diff_fine / (ratio - 1); doubled for safety
  const double q = std::isfinite(r.ratio) ? std::max(r.ratio, 2.0) : 4.0;
  r.tol_fine = 2.0 * r.diff_fine / (q - 1.0);
  r.tol_mid = r.tol_fine * q;
  return r;
}

void write_solution_csv(std::ostream& os, const Mesh& mesh, std::span<const double> u) {
  os << "x,y,u\n";
  char buf[128];
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", mesh.nodes[i].x, mesh.nodes[i].y, u[i]);
    os << buf;
  }
}

void write_triangles_csv(std::ostream& os, const Mesh& mesh) {
  os << "a,b,c\n";
  for (const auto& t : mesh.triangles) os << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

}  // namespace minsurf::fem
