#include "lcmfit/fit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

#include "lcmfit/nullspace.hpp"

namespace lcmfit {

const char* to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::likelihood_converged: return "likelihood_converged";
    case StopReason::gradient_converged: return "gradient_converged";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::no_ascent: return "no_ascent";
  }
  return "unknown";
}

void FitConfig::validate() const {
  if (max_iterations < 1) throw InvalidModel("max_iterations must be >= 1");
  if (!(rel_tol > 0) || !(grad_tol > 0)) throw InvalidModel("tolerances must be positive");
}

namespace {

constexpr int kMaxHalvings = 50;

VectorXd newton_direction(const MatrixXd& fisher, const VectorXd& grad) {
  const Index p = fisher.rows();
  {
    Eigen::LLT<MatrixXd> llt(fisher);
    if (llt.info() == Eigen::Success) {
      VectorXd d = llt.solve(grad);
      if (d.allFinite()) return d;
    }
  }
  const double scale = 1.0 + fisher.trace() / static_cast<double>(p);
  for (double tau = 1e-10 * scale; tau <= 1e-2 * scale; tau *= 2.0) {
    MatrixXd inflated = fisher;
    inflated.diagonal().array() += tau;
    Eigen::LLT<MatrixXd> llt(inflated);
    if (llt.info() != Eigen::Success) continue;
    VectorXd d = llt.solve(grad);
    if (d.allFinite()) return d;
  }
  throw SingularStep("Newton system is singular even after diagonal inflation");
}

double largest_eigenvalue(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

FitResult fit_mle(const GlmModel& model, const FitConfig& config, const std::optional<VectorXd>& start) {
  config.validate();
  FitResult result;
  VectorXd beta = start ? *start : VectorXd::Zero(model.p());
  CanonicalPoint point(model, beta);
  double l = log_likelihood(model, point);
  result.loglik_trace.push_back(l);
  if (config.record_iterates) result.iterates.push_back(beta);

  FisherInfo fisher = fisher_information(model, point);
  {
    // Reference scale comes from beta = 0 regardless of the start, so refits agree.
    const FisherInfo at_zero =
        start ? fisher_information(model, CanonicalPoint(model, VectorXd::Zero(model.p()))) : fisher;
    result.reference_scale = std::max(largest_eigenvalue(at_zero.matrix), 0.0);
  }
  VectorXd grad = score(model, point);

  for (;;) {
    const double scaled_grad = grad.cwiseAbs().maxCoeff() / (1.0 + std::abs(l));
    if (result.iterations >= config.max_iterations) {
      result.stop_reason = StopReason::max_iterations;
      break;
    }
    const VectorXd direction = newton_direction(fisher.matrix, grad);
    // A small gradient only ends the fit when the Newton step also predicts no
    // further gain; along a diverging sequence the gradient is small but the step is not.
    const double predicted = 0.5 * grad.dot(direction);
    if (scaled_grad <= config.grad_tol && predicted <= config.rel_tol * (1.0 + std::abs(l))) {
      result.stop_reason = StopReason::gradient_converged;
      break;
    }

    double step = 1.0;
    bool improved = false;
    VectorXd trial;
    double l_trial = l;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      trial = beta + step * direction;
      if (!trial.allFinite()) continue;
      l_trial = log_likelihood(model, trial);
      if (std::isfinite(l_trial) && l_trial > l) {
        improved = true;
        break;
      }
    }
    if (!improved) {
      result.stop_reason = StopReason::no_ascent;
      break;
    }

    const double change = l_trial - l;
    beta = std::move(trial);
    l = l_trial;
    ++result.iterations;
    result.loglik_trace.push_back(l);
    if (config.record_iterates) result.iterates.push_back(beta);
    point = CanonicalPoint(model, beta);
    fisher = fisher_information(model, point);
    grad = score(model, point);
    if (change <= config.rel_tol * (1.0 + std::abs(l))) {
      result.stop_reason = StopReason::likelihood_converged;
      break;
    }
  }

  result.beta_hat = beta;
  result.fisher = std::move(fisher);
  result.grad_norm = grad.cwiseAbs().maxCoeff() / (1.0 + std::abs(l));
  NullBasisOptions nb_options;
  nb_options.reference_scale = result.reference_scale;
  const NullBasis nb = null_basis(result.fisher, nb_options);
  result.converged_interior = result.grad_norm <= config.grad_tol && nb.j == 0;
  return result;
}

}  // namespace lcmfit
