#pragma once

#include <optional>
#include <vector>

#include "lcmfit/expfam.hpp"

namespace lcmfit {

enum class StepControl { halving_line_search };

struct FitConfig {
  int max_iterations = 200;
  double rel_tol = 1e-10;   // log-likelihood change, relative to 1 + |l|
  double grad_tol = 1e-8;   // gradient sup-norm, relative to 1 + |l|
  StepControl step_control = StepControl::halving_line_search;
  /// Keep every iterate in FitResult::iterates.
  bool record_iterates = false;

  void validate() const;
};

enum class StopReason { likelihood_converged, gradient_converged, max_iterations, no_ascent };

const char* to_string(StopReason reason) noexcept;

struct FitResult {
  VectorXd beta_hat;
  std::vector<double> loglik_trace;  // nondecreasing; entry 0 is the starting point
  std::vector<VectorXd> iterates;    // filled when FitConfig::record_iterates
  double grad_norm = 0.0;            // |score|_inf / (1 + |l|) at beta_hat
  FisherInfo fisher;                 // at beta_hat
  bool converged_interior = false;
  int iterations = 0;
  StopReason stop_reason = StopReason::max_iterations;
  /// Largest eigenvalue of the Fisher information at the starting point; the scale
  /// against which a fully degenerate information matrix is judged.
  double reference_scale = 1.0;

  double loglik() const { return loglik_trace.empty() ? 0.0 : loglik_trace.back(); }
};

/// Monotone Newton ascent on the log likelihood starting at beta = 0 (or `start`).
///
/// Each iteration solves (F + tau I) d = score, with tau = 0 when the Cholesky factor of F
/// exists and otherwise tau = 1e-10 (1 + tr F / p) doubled up to 1e-2 (1 + tr F / p), and
/// halves the step (at most 50 times) until the log likelihood increases. On data whose
/// MLE exists only in the completion the iterates diverge while l approaches its
/// supremum; the fit then stops when l changes by less than rel_tol.
///
/// Throws SingularStep when no inflation makes the Newton system solvable.
FitResult fit_mle(const GlmModel& model, const FitConfig& config = {},
                  const std::optional<VectorXd>& start = std::nullopt);

}  // namespace lcmfit
