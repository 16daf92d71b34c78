#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "lcmfit/inference.hpp"
#include "lcmfit/oracle.hpp"

using namespace lcmfit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Three Poisson cells, identity design; only the first is zero, so only its mean
// moves along the constancy space.
GlmModel single_cell_model() {
  VectorXd y(3);
  y << 0, 4, 2;
  return GlmModel(MatrixXd::Identity(3, 3), y, Family::poisson());
}

CiProblem separation_problem(const GlmModel& model, const LcmResult& lcm, Index k, double alpha = 0.05) {
  return make_ci_problem(model, lcm, alpha, MeanTarget{k});
}

}  // namespace

TEST_CASE("boundary probability") {
  const GlmModel model = single_cell_model();
  VectorXd beta = VectorXd::Zero(3);
  CHECK(boundary_probability(model, CanonicalPoint(model, beta), {}) == 1.0);
  beta[0] = std::log(-std::log(0.05));
  CHECK(boundary_probability(model, CanonicalPoint(model, beta), {0}) == doctest::Approx(0.05).epsilon(1e-14));
  // Nonzero fixed counts use the Poisson mass function.
  beta[1] = std::log(4.0);
  const double pmf = std::exp(-4.0) * std::pow(4.0, 4) / 24.0;
  CHECK(boundary_probability(model, CanonicalPoint(model, beta), {1}) == doctest::Approx(pmf).epsilon(1e-12));

  VectorXd trials(2);
  trials << 3, 1;
  VectorXd y(2);
  y << 2, 1;
  const GlmModel binom(MatrixXd::Identity(2, 2), y, Family::bernoulli(trials));
  const CanonicalPoint zero(binom, VectorXd::Zero(2));
  CHECK(boundary_probability(binom, zero, {0, 1}) == doctest::Approx(3.0 / 8.0 * 0.5));

  const GlmModel sep = testing::separation_model();
  const LcmResult lcm = iterate_to_lcm(sep);
  const VectorXd delta = lcm.rounds.at(0).dor->delta;
  const VectorXd far = lcm.initial_fit.beta_hat + 1e4 * delta;
  CHECK(boundary_probability(sep, CanonicalPoint(sep, far), lcm.support.fixed) == doctest::Approx(1.0));
}

TEST_CASE("single zero cell has the closed form upper bound") {
  const GlmModel model = single_cell_model();
  const LcmResult lcm = iterate_to_lcm(model);
  REQUIRE(lcm.support.fixed == std::vector<Index>{0});
  const OneSidedInterval ci = one_sided_ci(make_ci_problem(model, lcm, 0.05, MeanTarget{0}));
  CHECK(ci.lower == 0.0);
  CHECK(std::abs(ci.upper + std::log(0.05)) < 1e-6);
  CHECK(ci.achieved_constraint == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(ci.target_id == "mu[0]");

  double prev = ci.upper;
  for (double alpha : {0.5, 0.9, 0.99, 0.9999}) {
    const OneSidedInterval tight = one_sided_ci(make_ci_problem(model, lcm, alpha, MeanTarget{0}));
    CHECK(std::abs(tight.upper + std::log(alpha)) < 1e-6);
    CHECK(tight.upper < prev);
    prev = tight.upper;
  }
  CHECK(prev < 1e-3);

  const OneSidedInterval grid = oracle::oracle_ci_grid(make_ci_problem(model, lcm, 0.05, MeanTarget{0}));
  CHECK(std::abs(grid.upper + std::log(0.05)) < 1e-4);
}

TEST_CASE("separation data intervals") {
  const GlmModel sep = testing::separation_model();
  const LcmResult lcm = iterate_to_lcm(sep);
  for (Index k = 0; k < 8; ++k) {
    const CiProblem problem = separation_problem(sep, lcm, k);
    const OneSidedInterval ci = one_sided_ci(problem);
    CHECK(ci.lower <= ci.upper);
    if (k < 4) {
      CHECK(ci.lower == 0.0);
      CHECK(ci.upper < 1.0);
      CHECK(ci.upper > 0.0);
    } else {
      CHECK(ci.upper == 1.0);
      CHECK(ci.lower > 0.0);
      CHECK(ci.lower < 1.0);
    }
    // The probability constraint binds at the finite endpoint.
    CHECK(ci.achieved_constraint >= 0.05 - 1e-8);
    CHECK(ci.achieved_constraint <= 0.05 + 1e-4);

    const OneSidedInterval grid = oracle::oracle_ci_grid(problem);
    CHECK(std::abs(grid.lower - ci.lower) < 1e-4);
    CHECK(std::abs(grid.upper - ci.upper) < 1e-4);
  }
  // Symmetric design: the intervals mirror each other.
  const OneSidedInterval first = one_sided_ci(separation_problem(sep, lcm, 0));
  const OneSidedInterval last = one_sided_ci(separation_problem(sep, lcm, 7));
  CHECK(first.upper == doctest::Approx(1.0 - last.lower).epsilon(1e-8));
}

TEST_CASE("smaller alpha gives wider intervals") {
  const GlmModel sep = testing::separation_model();
  const LcmResult lcm = iterate_to_lcm(sep);
  for (Index k : {1, 6}) {
    const OneSidedInterval wide = one_sided_ci(separation_problem(sep, lcm, k, 0.01));
    const OneSidedInterval mid = one_sided_ci(separation_problem(sep, lcm, k, 0.05));
    const OneSidedInterval narrow = one_sided_ci(separation_problem(sep, lcm, k, 0.2));
    CHECK(wide.lower <= mid.lower);
    CHECK(mid.lower <= narrow.lower);
    CHECK(wide.upper >= mid.upper);
    CHECK(mid.upper >= narrow.upper);
  }
}

TEST_CASE("endpoints do not depend on the constancy basis") {
  const GlmModel sep = testing::separation_model();
  const LcmResult lcm = iterate_to_lcm(sep);
  for (double angle : {0.3, 1.1, 2.5}) {
    MatrixXd r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    for (Index k : {0, 5}) {
      CiProblem problem = separation_problem(sep, lcm, k);
      const OneSidedInterval base = one_sided_ci(problem);
      problem.gamma_basis = problem.gamma_basis * r;
      const OneSidedInterval rotated = one_sided_ci(problem);
      CHECK(std::abs(base.lower - rotated.lower) < 1e-6);
      CHECK(std::abs(base.upper - rotated.upper) < 1e-6);
    }
  }
}

TEST_CASE("linear target") {
  const GlmModel sep = testing::separation_model();
  const LcmResult lcm = iterate_to_lcm(sep);
  VectorXd c(2);
  c << 1.0, 0.0;
  const CiProblem problem = make_ci_problem(sep, lcm, 0.05, LinearTarget{c});
  const OneSidedInterval ci = one_sided_ci(problem);
  CHECK(ci.target_id == "linear");
  CHECK(ci.lower == -kInf);
  CHECK(std::isfinite(ci.upper));
  const OneSidedInterval grid = oracle::oracle_ci_grid(problem);
  CHECK(grid.lower == -kInf);
  CHECK(std::abs(grid.upper - ci.upper) < 1e-4 * std::max(1.0, std::abs(ci.upper)));
}

TEST_CASE("targets that are not on the boundary") {
  const GlmModel model = single_cell_model();
  const LcmResult lcm = iterate_to_lcm(model);
  CHECK_THROWS_AS(one_sided_ci(make_ci_problem(model, lcm, 0.05, MeanTarget{1})), NonBoundaryTarget);
  VectorXd c(3);
  c << 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(one_sided_ci(make_ci_problem(model, lcm, 0.05, LinearTarget{c})), NonBoundaryTarget);
  CHECK_THROWS_AS(one_sided_ci(make_ci_problem(model, lcm, 1.5, MeanTarget{0})), InvalidModel);

  VectorXd y(3);
  y << 2, 4, 2;
  const GlmModel interior(MatrixXd::Identity(3, 3), y, Family::poisson());
  const LcmResult none = iterate_to_lcm(interior);
  CHECK_THROWS_AS(one_sided_ci(make_ci_problem(interior, none, 0.05, MeanTarget{0})), NonBoundaryTarget);
}
