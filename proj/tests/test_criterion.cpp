#include <doctest.h>

#include <cmath>
#include <random>

#include "minsurf/barrier.hpp"
#include "minsurf/criterion.hpp"
#include "minsurf/errors.hpp"
#include "support.hpp"

using namespace minsurf;
using namespace minsurf::criterion;

namespace {

GeometrySummary example_geometry() { return GeometrySummary::euclidean(1.0 / 0.45); }

GeometrySummary abstract_geometry(double lambda, double mu, int n = 2, double R = kInf, double r = 1.0) {
  GeometrySummary g;
  g.n = n;
  g.lambda_r = lambda;
  g.mu_r = mu;
  g.R = R;
  g.r = r;
  g.source = GeometrySource::UserSupplied;
  return g;
}

DataStats stats_of(double tau, double omega) {
  DataStats s;
  s.tau = tau;
  s.omega = omega;
  return s;
}

}  // namespace

TEST_CASE("constants for the worked example") {
  // extended-precision values for tau = 0.1871, lambda = -0.45, mu = 0.45
  const CriterionConstants k = constants(0.1871, example_geometry());
  CHECK(k.rho == doctest::Approx(0.200199398622).epsilon(1e-11));
  CHECK(k.a == doctest::Approx(3.568567356043454).epsilon(1e-13));
  CHECK(k.b == doctest::Approx(-12.034034200816282).epsilon(1e-13));
  CHECK(k.c == doctest::Approx(0.17485771805986399).epsilon(1e-13));
  CHECK(k.theta == doctest::Approx(9.0625687195377194).epsilon(1e-13));
  CHECK(k.delta_max == doctest::Approx(1.3655432551155667).epsilon(1e-13));
  CHECK(osc_bound_mo(k, 1.0) == doctest::Approx(0.43371891005666339).epsilon(1e-12));
  const HadamardBounds h = hadamard_bounds(k);
  CHECK(h.hc == doctest::Approx(0.45016382130988464).epsilon(1e-12));
  CHECK(h.hc2 == doctest::Approx(0.099616309354228077).epsilon(1e-12));
}

TEST_CASE("a(tau) peaks at 2 + sqrt(3)") {
  double best = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double tau = std::pow(10.0, -4.0 + 8.0 * i / 200000.0);
    const double a = a_of_tau(tau);
    CHECK(a > 1.0);
    best = std::max(best, a);
  }
  CHECK(best == doctest::Approx(3.7321).epsilon(1e-4 / 3.7321));
  CHECK(best <= 2 + std::sqrt(3.0) + 1e-12);
  CHECK(a_of_tau((std::sqrt(3.0) - 1) / 2) == doctest::Approx(2 + std::sqrt(3.0)).epsilon(1e-14));
  CHECK(constants(0.37, example_geometry()).a == doctest::Approx(a_of_tau(0.37)).epsilon(1e-14));
}

TEST_CASE("theta tends to a as the curvature bounds vanish") {
  for (double tau : {0.05, 0.5, 3.0}) {
    const CriterionConstants k = constants(tau, abstract_geometry(-1e-12, 1e-12));
    CHECK(k.theta == doctest::Approx(k.a).epsilon(1e-10));
    CHECK(k.b < 0);
    CHECK(k.c > 0);
  }
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(constants(0.0, example_geometry()), DegenerateData);
  CHECK_THROWS_AS(constants(1e-9, example_geometry()), DegenerateData);
  CHECK_THROWS_AS(constants(0.2, abstract_geometry(0.1, 0.1)), DegenerateData);
  const CriterionConstants k = constants(0.2, example_geometry());
  CHECK_THROWS_AS(osc_bound_mo(k, 0.0), DeltaOutOfRange);
  CHECK_THROWS_AS(osc_bound_mo(k, k.delta_max), DeltaOutOfRange);
  CHECK_THROWS_AS(osc_bound_mo(k, 2 * k.delta_max), DeltaOutOfRange);
  CHECK_THROWS_AS(hadamard_bounds(constants(0.2, abstract_geometry(-0.5, 0.5, 2, 10.0, 1.0))), RequiresInfiniteR);
}

TEST_CASE("delta_max respects a finite R") {
  const CriterionConstants k = constants(0.2, abstract_geometry(-0.5, 0.5, 3, 1.5, 1.0));
  CHECK(k.delta_max == doctest::Approx(0.5));
}

TEST_CASE("oscillation bound equals the barrier profile at delta") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double tau = std::pow(10.0, -2 + 3 * U(rng));
    const CriterionConstants k = constants(tau, abstract_geometry(-2 * U(rng) - 1e-3, 2 * U(rng), 2 + i % 3));
    const double delta = k.delta_max * (1e-3 + 0.998 * U(rng));
    const double b = osc_bound_mo(k, delta);
    const double p = barrier::psi_value(k.rho, k.sigma, delta);
    CHECK(std::abs(b - p) <= 1e-12 * (1 + std::abs(b)));
  }
}

TEST_CASE("oscillation bound is increasing and tends to delta at zero") {
  const CriterionConstants k = constants(0.1871, example_geometry());
  double prev = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double b = osc_bound_mo(k, k.delta_max * i / 1000.0);
    CHECK(b > prev);
    prev = b;
  }
  CHECK(osc_bound_mo(k, 1e-8) / 1e-8 == doctest::Approx(1.0).epsilon(1e-7));
  const double d = optimal_delta(k);
  CHECK(d == doctest::Approx(k.delta_max).epsilon(1e-5));
}

TEST_CASE("hc is the limit of the oscillation bound at delta_max") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 200; ++i) {
    const CriterionConstants k = constants(std::pow(10.0, -2 + 3 * U(rng)), abstract_geometry(-2 * U(rng) - 1e-3, 2 * U(rng)));
    const HadamardBounds h = hadamard_bounds(k);
    CHECK(osc_bound_mo(k, k.delta_max * (1 - 1e-12)) == doctest::Approx(h.hc).epsilon(1e-10));
  }
  // with no curvature contribution theta = a and the two bounds coincide
  const CriterionConstants k = constants(0.4, abstract_geometry(-1e-15, 0.0));
  const HadamardBounds h = hadamard_bounds(k);
  CHECK(h.hc2 == doctest::Approx(h.hc).epsilon(1e-12));
}

TEST_CASE("sh holds exactly when omega <= hc2") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0, 1);
  int agree = 0, sh = 0, skipped = 0;
  for (int i = 0; i < 10000; ++i) {
    const double tau = std::pow(10.0, -2 + 3 * U(rng));
    const double lambda = -std::pow(10.0, -2 + 3 * U(rng));
    const GeometrySummary g = i % 2 ? GeometrySummary::euclidean(-1 / lambda)
                                    : abstract_geometry(lambda, 3 * U(rng), 2 + i % 4);
    const CriterionConstants k = constants(tau, g);
    const HadamardBounds h = hadamard_bounds(k);
    const double omega = h.hc2 * 2 * U(rng);
    if (std::abs(omega - h.hc2) < 1e-9 * h.hc2) {
      ++skipped;
      continue;
    }
    const CorollaryResult c = corollary_sh(k, omega, g);
    agree += c.sh_pass == (omega <= h.hc2);
    sh += c.sh_pass;
    CHECK(h.hc2 <= h.hc);
    if (c.sh_pass) CHECK(omega <= h.hc);
  }
  CHECK(agree + skipped == 10000);
  CHECK(sh > 1000);
}

TEST_CASE("corollary on the worked example") {
  const CriterionConstants k = constants(0.1871, example_geometry());
  const CorollaryResult c = corollary_sh(k, 0.17, example_geometry());
  CHECK_FALSE(c.sh_pass);
  REQUIRE(c.she_evaluated);
  CHECK(c.she_value > 1 / 0.45);
  CHECK_FALSE(c.she_pass);
  CHECK(c.she_reason == "exceeds r");

  const CorollaryResult z = corollary_sh(k, 0.0, example_geometry());
  CHECK(z.sh_lhs == -kInf);
  CHECK(z.sh_pass);

  // large oscillation makes the SHE denominator negative
  const CorollaryResult big = corollary_sh(k, 50.0, example_geometry());
  CHECK_FALSE(big.she_pass);
  CHECK(big.she_reason == "NegativeDenominator");
}

TEST_CASE("Jenkins-Serrin bound") {
  // l' = 0.25 / sqrt 2, A = pi / l'
  const JenkinsSerrin js = jenkins_serrin_b(0.25, 0.824, 0.0937, 0.1877, 0.45, 2);
  CHECK(js.l_prime == doctest::Approx(0.25 / std::sqrt(2.0)));
  CHECK(js.A == doctest::Approx(4 * std::sqrt(2.0) * M_PI).epsilon(1e-14));
  CHECK(js.C == doctest::Approx(js.A / std::pow(1 + 0.1877 * 0.1877, 16)).epsilon(1e-14));
  CHECK(js.B == doctest::Approx((1 + std::log(js.C / 0.45)) / (32 * js.A)).epsilon(1e-14));
  CHECK(js.B == doctest::Approx(0.0072).epsilon(0.0002 / 0.0072));

  // C <= H branch: A = 2, C = 2, H = 4 gives 1/64 * 1/2
  const JenkinsSerrin small = jenkins_serrin_b(M_PI * std::sqrt(2.0) / 2, 0.0, 0.0, 0.0, 4.0, 1);
  CHECK(small.A == doctest::Approx(2.0));
  CHECK(small.B == doctest::Approx(1.0 / 64).epsilon(1e-14));
  CHECK(jenkins_serrin_b(1.0, 1.0, 1.0, 0.0, 0.0, 2).B == kInf);

  // the two finite branches meet at C = H
  const JenkinsSerrin at = jenkins_serrin_b(1.0, 0.0, 0.0, 0.0, 0.0, 2);
  const double H = at.C;
  const double lo = jenkins_serrin_b(1.0, 0.0, 0.0, 0.0, H * (1 + 1e-12), 2).B;
  const double hi = jenkins_serrin_b(1.0, 0.0, 0.0, 0.0, H * (1 - 1e-12), 2).B;
  CHECK(lo == doctest::Approx(hi).epsilon(1e-10));
  CHECK_THROWS_AS(jenkins_serrin_b(0.0, 1, 1, 1, 1, 2), ValidationError);
}

TEST_CASE("graph radius verification") {
  const geom::Domain2D disk = testing::unit_disk();
  CHECK(js_graph_radius_verify(disk, 0.5));
  CHECK_FALSE(js_graph_radius_verify(disk, 3.0));
  CHECK(js_graph_radius_verify(testing::example_domain(), 0.25));
}

TEST_CASE("data statistics") {
  const geom::Domain2D disk = testing::unit_disk();
  const DataStats lin = data_stats(testing::phi_xy("x"), disk);
  CHECK(lin.sup_grad == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.sup_hess == 0.0);
  CHECK(lin.tau == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.omega == doctest::Approx(2.0).epsilon(1e-9));

  const DataStats flat = data_stats(testing::phi_xy("3"), disk);
  CHECK(flat.tau == 0.0);
  CHECK(flat.omega == 0.0);

  const DataStats quad = data_stats(testing::phi_xy("x^2 - y^2"), disk);
  CHECK(quad.sup_hess == doctest::Approx(2.0));
  CHECK(quad.sup_lap == doctest::Approx(0.0).scale(1));
  CHECK(quad.tau == doctest::Approx(2.0).epsilon(1e-9));

  StatsOptions fro;
  fro.hessian_norm = HessianNorm::Frobenius;
  CHECK(data_stats(testing::phi_xy("x^2 - y^2"), disk, fro).sup_hess == doctest::Approx(2 * std::sqrt(2.0)));
}

TEST_CASE("example data statistics") {
  const DataStats s = data_stats(testing::phi_xy(testing::kExamplePhi), testing::example_domain());
  // extremes of y on the boundary are +-sqrt(7)/2 (the lobes are horizontal)
  const double ymax = std::sqrt(7.0) / 2;
  CHECK(s.tau == doctest::Approx(std::exp(ymax) / 20).epsilon(1e-6));
  CHECK(s.omega == doctest::Approx((std::exp(ymax) - std::exp(-ymax)) / 20).epsilon(1e-6));
}

TEST_CASE("verdicts") {
  const geom::Domain2D disk = testing::unit_disk();
  CHECK(verdict(disk, testing::phi_xy("x^2 - y^2")).branch == Branch::MeanConvex);

  const geom::Domain2D dom = testing::example_domain();
  VerdictOptions o;
  o.delta = 1.0;
  o.js_l = 0.25;
  const Verdict v = verdict(dom, testing::phi_xy(testing::kExamplePhi), o);
  CHECK(v.branch == Branch::CriterionMo);
  CHECK(v.solvable);
  CHECK(v.bound_mo == doctest::Approx(0.433).epsilon(0.01));
  REQUIRE(v.jenkins_serrin);
  CHECK(v.jenkins_serrin->B < v.stats.omega);
  CHECK(v.js_graph_ok.value_or(false));

  const Verdict flat = verdict(dom, testing::phi_xy("2"));
  CHECK(flat.branch == Branch::ConstantData);
  CHECK(flat.solvable);

  const Verdict steep = verdict(dom, testing::phi_xy("exp(-y)/2 + 1"));
  CHECK(steep.branch == Branch::Fails);
  CHECK_FALSE(steep.solvable);
  o.js_l.reset();
  CHECK_THROWS_AS(verdict(dom, testing::phi_xy("exp(-y)/2 + 1"), o), DeltaOutOfRange);

  CHECK_THROWS_AS(evaluate_conditions(stats_of(1e-10, 0.5), example_geometry(), {}), DegenerateData);
  CHECK(evaluate_conditions(stats_of(0.3, 0.01), abstract_geometry(-0.2, 0.2, 3), {}).branch == Branch::CriterionMo);
}

TEST_CASE("branch names") {
  CHECK(to_string(Branch::MeanConvex) == "mean-convex");
  CHECK(to_string(Branch::CriterionMo) == "criterion-mo");
  CHECK(to_string(Branch::CorollarySh) == "corollary-sh");
  CHECK(to_string(Branch::Fails) == "fails");
}
