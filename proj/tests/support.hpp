#pragma once

// Shared fixtures for the test binaries.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "minsurf/domain.hpp"
#include "minsurf/expr.hpp"

namespace testing {

inline const char* kExampleRadial = "sqrt(4*cos(2*t) + sqrt(16*cos(2*t)^2 + 12))";
inline const char* kExamplePhi = "exp(-y)/20 + 1";

inline minsurf::geom::Domain2D example_domain() {
  return minsurf::geom::Domain2D(minsurf::geom::BoundaryCurve::radial(kExampleRadial, 2 * M_PI));
}

inline minsurf::geom::Domain2D unit_disk() {
  return minsurf::geom::Domain2D(minsurf::geom::BoundaryCurve::parametric("cos(t)", "sin(t)", 2 * M_PI));
}

inline minsurf::expr::Expr phi_xy(const std::string& s) { return minsurf::expr::Expr::parse(s, {"x", "y"}); }

// Random smooth expressions in x and y, kept in a range where values and
// derivatives stay moderate on [-1, 1]^2.
class ExprGen {
public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  std::string make(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    const std::string a = make(depth - 1);
    switch (pick(11)) {
      case 0: return "(" + a + " + " + make(depth - 1) + ")";
      case 1: return "(" + a + " - " + make(depth - 1) + ")";
      case 2: return "(" + a + ")*(" + make(depth - 1) + ")";
      case 3: return "(" + a + ")/(2 + sin(" + make(depth - 1) + "))";
      case 4: return "sin(" + a + ")";
      case 5: return "cos(" + a + ")";
      case 6: return "exp(sin(" + a + "))";
      case 7: return "sqrt(1 + (" + a + ")^2)";
      case 8: return "ln(3 + cos(" + a + "))";
      case 9: return "(" + a + ")^2";
      default: return "-(" + a + ")";
    }
  }

  double coord() { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng_); }

private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::string leaf() {
    switch (pick(4)) {
      case 0: return "x";
      case 1: return "y";
      case 2: return "(x*y)";
      default: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", std::uniform_real_distribution<double>(-2.0, 2.0)(rng_));
        return buf;
      }
    }
  }

  std::mt19937_64 rng_;
};

// Largest relative gap between the jet of e at p and central differences.
// The gradient is differenced from values, the Hessian from the jet gradient.
inline double ad_fd_gap(const minsurf::expr::Expr& e, double px, double py) {
  const double h = 1e-5;
  const double p[2] = {px, py};
  const minsurf::Jet2 j = e.eval_jet2(p);
  double worst = 0.0;
  auto gap = [&](double ad, double fd) {
    const double g = std::abs(ad - fd) / (std::abs(ad) + 1e-2);
    worst = std::max(worst, g);
  };
  for (int k = 0; k < 2; ++k) {
    double pp[2] = {px, py}, pm[2] = {px, py};
    pp[k] += h;
    pm[k] -= h;
    gap(j.grad(k), (e.eval(pp) - e.eval(pm)) / (2 * h));
    const minsurf::Jet2 jp = e.eval_jet2(pp), jm = e.eval_jet2(pm);
    for (int l = 0; l < 2; ++l) gap(j.hess(l, k), (jp.grad(l) - jm.grad(l)) / (2 * h));
  }
  return worst;
}

}  // namespace testing
