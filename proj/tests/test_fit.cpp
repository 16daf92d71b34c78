#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "lcmfit/fit.hpp"
#include "lcmfit/nullspace.hpp"

using namespace lcmfit;

namespace {

bool nondecreasing(const std::vector<double>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k] < trace[k - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  FitConfig bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidModel);
  FitConfig bad_tol;
  bad_tol.rel_tol = 0.0;
  CHECK_THROWS_AS(bad_tol.validate(), InvalidModel);
  CHECK_NOTHROW(FitConfig{}.validate());
}

TEST_CASE("Poisson intercept-only fit is the log of the mean") {
  VectorXd y(3);
  y << 1, 2, 3;
  const GlmModel model(MatrixXd::Ones(3, 1), y, Family::poisson());
  const FitResult fit = fit_mle(model);
  CHECK(fit.beta_hat[0] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(fit.converged_interior);
  CHECK(nondecreasing(fit.loglik_trace));

  // Refitting from the optimum leaves the likelihood where it was.
  const FitResult again = fit_mle(model, {}, fit.beta_hat);
  CHECK(std::abs(again.loglik() - fit.loglik()) < 1e-12);
}

TEST_CASE("symmetric binomial case") {
  const GlmModel model(MatrixXd::Ones(1, 1), VectorXd::Ones(1), Family::bernoulli(VectorXd::Constant(1, 2.0)));
  const FitResult fit = fit_mle(model);
  CHECK(std::abs(fit.beta_hat[0]) < 1e-10);
  CHECK(fit.converged_interior);
}

TEST_CASE("Poisson regression matches an independent Newton solve") {
  MatrixXd m(6, 2);
  m << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4, 1, 5;
  VectorXd y(6);
  y << 1, 1, 3, 2, 6, 9;
  const GlmModel model(m, y, Family::poisson());
  const FitResult fit = fit_mle(model);
  // Oracle: plain Newton-Raphson on the score equations.
  VectorXd b = VectorXd::Zero(2);
  for (int it = 0; it < 100; ++it) {
    const VectorXd mu = (m * b).array().exp();
    const VectorXd g = m.transpose() * (y - mu);
    const MatrixXd h = m.transpose() * mu.asDiagonal() * m;
    b += h.ldlt().solve(g);
  }
  CHECK((fit.beta_hat - b).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.converged_interior);
  const MatrixXd expected = fisher_information(model, CanonicalPoint(model, fit.beta_hat)).matrix;
  CHECK((fit.fisher.matrix - expected).norm() == 0.0);
}

TEST_CASE("separated logistic data") {
  const GlmModel model = testing::separation_model();
  const FitResult fit = fit_mle(model);
  CHECK(nondecreasing(fit.loglik_trace));
  CHECK(std::abs(fit.loglik()) < 1e-6);
  CHECK_FALSE(fit.converged_interior);
  CHECK(symmetric_eigen(fit.fisher.matrix).values[0] < 1e-6);

  // More iterations push beta further out while the likelihood creeps up.
  FitConfig short_run;
  short_run.max_iterations = 5;
  FitConfig long_run;
  long_run.max_iterations = 10;
  const FitResult a = fit_mle(model, short_run);
  const FitResult b = fit_mle(model, long_run);
  CHECK(b.beta_hat.norm() > a.beta_hat.norm());
  CHECK(b.loglik() >= a.loglik());
}

TEST_CASE("traces are monotone on random separated data") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const GlmModel model = testing::random_separated_bernoulli(rng, 30, 3);
    FitConfig config;
    config.record_iterates = true;
    const FitResult fit = fit_mle(model, config);
    CHECK(nondecreasing(fit.loglik_trace));
    CHECK(fit.iterates.size() == fit.loglik_trace.size());
  }
}
