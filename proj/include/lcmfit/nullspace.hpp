#pragma once

#include <optional>

#include "lcmfit/expfam.hpp"

namespace lcmfit {

struct SymmetricEigen {
  VectorXd values;   // nonincreasing
  MatrixXd vectors;  // orthonormal columns matching `values`
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted nonincreasing.
/// Throws NotSymmetric when |A - A^T| exceeds 1e-10 relative to |A|.
SymmetricEigen symmetric_eigen(const MatrixXd& a);

enum class EpsilonSource { user, spectral_gap, fully_degenerate, no_gap };

const char* to_string(EpsilonSource source) noexcept;

/// Estimated null space of a Fisher information matrix: the span of the eigenvectors
/// whose eigenvalues fall below the threshold epsilon.
struct NullBasis {
  VectorXd eigenvalues;  // nonincreasing
  double threshold = 0.0;
  EpsilonSource source = EpsilonSource::user;
  MatrixXd basis;  // p x j, orthonormal columns
  Index j = 0;
};

/// Options for the automatic threshold.
///
/// `reference_scale` is the size of the information the model carries when it is far
/// from degenerate (the largest eigenvalue of the Fisher information at the starting
/// point of the fit). The absolute floor below which every eigenvalue counts as null is
/// 1e-8 * (reference_scale + lambda_max).
struct NullBasisOptions {
  std::optional<double> epsilon;
  double reference_scale = 1.0;
};

NullBasis null_basis(const FisherInfo& fisher, const NullBasisOptions& options = {});
NullBasis null_basis(const FisherInfo& fisher, double epsilon);

/// Threshold picked by the spectral-gap rule for nonincreasing eigenvalues.
std::pair<double, EpsilonSource> auto_epsilon(const VectorXd& eigenvalues, double reference_scale = 1.0);

/// Spectral norm of the difference of the orthogonal projectors onto span(v1), span(v2).
double subspace_distance(const MatrixXd& v1, const MatrixXd& v2);

}  // namespace lcmfit
