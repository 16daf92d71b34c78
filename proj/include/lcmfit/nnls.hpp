#pragma once

#include <optional>

#include "lcmfit/expfam.hpp"

namespace lcmfit {

struct NnlsResult {
  VectorXd x;
  VectorXd residual;  // A x - b
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set solution of min |A x - b| subject to x >= 0.
NnlsResult nnls(const MatrixXd& a, const VectorXd& b, int max_iterations = 0);

/// Least distance programming: min |x| subject to g x >= h.
/// Returns nullopt when the constraints are infeasible.
std::optional<VectorXd> least_distance(const MatrixXd& g, const VectorXd& h);

}  // namespace lcmfit
