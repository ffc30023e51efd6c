#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "minsurf/barrier.hpp"
#include "minsurf/domain.hpp"
#include "minsurf/errors.hpp"
#include "minsurf/expr.hpp"

namespace minsurf::fem {

/// Structured polar triangulation of a star-shaped domain. Node 0 is the
/// centre; ring i (1..n_radial) ray j sits at index 1 + (i - 1) n_angular + j.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<char> boundary;                 // per node
  std::vector<double> t;                      // curve parameter of boundary nodes, NaN elsewhere
  int n_radial = 0;
  int n_angular = 0;
  Vec2 center;

  int node(int ring, int ray) const { return ring == 0 ? 0 : 1 + (ring - 1) * n_angular + (ray % n_angular); }
  std::size_t size() const { return nodes.size(); }
  /// Longest triangle edge.
  double h() const;
};

/// Throws NotStarShaped if some boundary point is not visible from the
/// domain centre, std::invalid_argument for n_radial < 4 or n_angular < 16.
Mesh triangulate_star(const geom::Domain2D& domain, int n_radial, int n_angular);

/// Discrete area sum over T of |T| sqrt(1 + |grad u_T|^2).
double energy(const Mesh& mesh, std::span<const double> u);
/// dE/du at every node (boundary entries included).
std::vector<double> energy_gradient(const Mesh& mesh, std::span<const double> u);

struct SolveOptions {
  double grad_tol = 1e-10;
  int max_iterations = 200;
  double armijo = 1e-4;
  int max_halvings = 60;
};

struct SolveResult {
  std::vector<double> u;
  std::vector<double> energy;     // per accepted iterate, starting with the initial guess
  std::vector<double> grad_norm;  // max-norm over interior nodes, same indexing
  int iterations = 0;
  bool converged = false;
  double max_residual = 0.0;
  std::string stop_reason;
};

/// Raised when backtracking cannot decrease the energy; carries the last iterate.
class SolveStalled : public LineSearchStall {
public:
  SolveStalled(const std::string& what, SolveResult last) : LineSearchStall(what), last_(std::move(last)) {}
  const SolveResult& last() const noexcept { return last_; }

private:
  SolveResult last_;
};

/// Damped Newton on the discrete area with u = phi on boundary nodes; the
/// interior is initialised with phi as well (mean boundary value where phi
/// cannot be evaluated).
SolveResult solve(const Mesh& mesh, const expr::Expr& phi, const SolveOptions& opts = {});
/// Same with explicit boundary/initial values.
SolveResult solve(const Mesh& mesh, std::vector<double> u0, const SolveOptions& opts = {});

struct SolutionCheck {
  // maximum principle
  double boundary_min = 0.0;
  double boundary_max = 0.0;
  double mp_margin = 0.0;  // min over interior of min(u - bmin, bmax - u)
  int mp_worst_node = -1;
  bool mp_pass = false;
  // barrier bracket over nodes inside Lambda
  double tol_mesh = 0.0;
  std::size_t bracket_nodes = 0;
  double bracket_margin = 0.0;  // min of (w + tol - u) and (u - xi + tol)
  int bracket_worst_node = -1;
  bool bracket_pass = true;
  // boundary trace
  double trace_error = 0.0;
  bool trace_pass = false;

  bool pass() const { return mp_pass && bracket_pass && trace_pass; }
};

SolutionCheck verify_solution(const Mesh& mesh, std::span<const double> u, const expr::Expr& phi,
                              std::span<const barrier::BarrierProfile> barriers, double tol_mesh);

struct RichardsonLevel {
  int n_radial = 0;
  int n_angular = 0;
  SolveResult result;
};

struct Richardson {
  std::vector<RichardsonLevel> levels;  // coarse to fine, each refined by 2 in both directions
  double diff_coarse = 0.0;  // max |u_0 - u_1| on the coarsest nodes
  double diff_fine = 0.0;    // max |u_1 - u_2| on the same nodes
  double ratio = 0.0;
  /// Error estimates for the two finest levels.
  double tol_mid = 0.0;
  double tol_fine = 0.0;
};

/// Solves on (n_radial, n_angular) * {1, 2, 4} and compares nodal values on
/// the coarsest mesh's nodes.
Richardson richardson(const geom::Domain2D& domain, const expr::Expr& phi, int n_radial, int n_angular,
                      const SolveOptions& opts = {});

/// "x,y,u" rows, one per node.
void write_solution_csv(std::ostream& os, const Mesh& mesh, std::span<const double> u);
/// "a,b,c" node index triples.
void write_triangles_csv(std::ostream& os, const Mesh& mesh);

}  // namespace minsurf::fem
