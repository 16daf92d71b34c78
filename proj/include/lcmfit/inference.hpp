#pragma once

#include <string>
#include <variant>
#include <vector>

#include "lcmfit/completion.hpp"
#include "lcmfit/expfam.hpp"

namespace lcmfit {

/// Mean-value parameter of response component k. Bernoulli targets are reported on the
/// success-probability scale, Poisson targets on the mean scale.
struct MeanTarget {
  Index k = 0;
};

/// Linear functional c^T beta of the submodel parameter.
struct LinearTarget {
  VectorXd c;
};

using CiTarget = std::variant<MeanTarget, LinearTarget>;

/// One-sided confidence interval problem on the constancy space.
///
/// The feasible set is {beta_hat + gamma_basis * u : P(Y_I = y_I) >= alpha}. The model is
/// held by pointer and must outlive the problem.
struct CiProblem {
  const GlmModel* model = nullptr;
  VectorXd beta_hat;      // LCM fit embedded in R^p
  MatrixXd gamma_basis;   // p x j, orthonormal columns
  std::vector<Index> fixed;
  double alpha = 0.05;
  CiTarget target = MeanTarget{};

  void validate() const;
};

/// Builds the interval problem for an LCM result: beta_hat from the LCM fit and
/// gamma_basis spanning the constancy space of the limiting conditional model.
CiProblem make_ci_problem(const GlmModel& model, const LcmResult& lcm, double alpha, CiTarget target);

struct OneSidedInterval {
  std::string target_id;
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;
  double achieved_constraint = 1.0;  // P(Y_I = y_I) at the finite endpoint
  std::string solver_status;
  int newton_steps = 0;
};

/// log P_beta(Y_I = y_I) including binomial coefficients and factorials.
double log_boundary_probability(const GlmModel& model, const CanonicalPoint& point, const std::vector<Index>& fixed);

/// P_beta(Y_I = y_I). Returns 1 for an empty index set.
double boundary_probability(const GlmModel& model, const CanonicalPoint& point, const std::vector<Index>& fixed);

std::string target_id(const CiTarget& target);

/// Solves min and max of the target over the feasible set.
///
/// The log probability is concave in u, so the feasible set is convex and each finite
/// endpoint is found by a log-barrier Newton method. An endpoint is infinite exactly
/// when a recession direction of the feasible set moves the target; that side is
/// reported at the end of the parameter range (0 or 1 for probabilities, 0 for
/// Poisson means, -inf or +inf for linear functionals).
///
/// Throws NonBoundaryTarget for mean targets outside the fixed set, targets that do not
/// vary over the constancy space, or targets bounded on both sides. Throws
/// SolverFailure when no feasible point is found.
OneSidedInterval one_sided_ci(const CiProblem& problem);

}  // namespace lcmfit
