#include "lcmfit/nullspace.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lcmfit {

const char* to_string(EpsilonSource source) noexcept {
  switch (source) {
    case EpsilonSource::user: return "user";
    case EpsilonSource::spectral_gap: return "spectral_gap";
    case EpsilonSource::fully_degenerate: return "fully_degenerate";
    case EpsilonSource::no_gap: return "no_gap";
  }
  return "unknown";
}

SymmetricEigen symmetric_eigen(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw NotSymmetric("matrix is not square");
  const double scale = a.cwiseAbs().maxCoeff();
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300))
    throw NotSymmetric("matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw NotSymmetric("eigensolver failed to converge");
  // Eigen returns ascending order.
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

std::pair<double, EpsilonSource> auto_epsilon(const VectorXd& eigenvalues, double reference_scale) {
  const Index p = eigenvalues.size();
  if (p == 0) return {0.0, EpsilonSource::no_gap};
  const double lmax = std::max(eigenvalues[0], 0.0);
  const double floor = 1e-8 * (reference_scale + lmax);
  if (eigenvalues.maxCoeff() < floor) return {2.0 * floor, EpsilonSource::fully_degenerate};

  // Eigenvalues below the eigensolver's rounding level are indistinguishable from zero;
  // clamping them there keeps noise from posing as a spectral gap.
  const double noise = static_cast<double>(p) * std::numeric_limits<double>::epsilon() * lmax;
  const double positive_floor = std::max(noise, std::numeric_limits<double>::min());
  double best_ratio = 0.0;
  Index best = -1;
  for (Index k = 0; k + 1 < p; ++k) {
    const double next = eigenvalues[k + 1];
    if (!(next < 1e-4 * lmax)) continue;
    const double ratio = std::max(eigenvalues[k], positive_floor) / std::max(next, positive_floor);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  if (best < 0) return {floor, EpsilonSource::no_gap};
  const double upper = std::max(eigenvalues[best], positive_floor);
  const double lower = std::max(eigenvalues[best + 1], positive_floor);
  return {std::sqrt(upper * lower), EpsilonSource::spectral_gap};
}

namespace {

NullBasis build_basis(const SymmetricEigen& eig, double epsilon, EpsilonSource source) {
  NullBasis nb;
  nb.eigenvalues = eig.values;
  nb.threshold = epsilon;
  nb.source = source;
  const Index p = eig.values.size();
  Index first = p;
  while (first > 0 && eig.values[first - 1] < epsilon) --first;
  nb.j = p - first;
  nb.basis = eig.vectors.rightCols(nb.j);
  if (nb.j > 0) {
    // Re-orthonormalize; eigenvectors from a clustered spectrum can drift slightly.
    Eigen::HouseholderQR<MatrixXd> qr(nb.basis);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(p, nb.j);
    // Keep the eigenvector orientation of the first column set.
    for (Index k = 0; k < nb.j; ++k)
      if (q.col(k).dot(nb.basis.col(k)) < 0) q.col(k) = -q.col(k);
    nb.basis = std::move(q);
  }
  return nb;
}

}  // namespace

NullBasis null_basis(const FisherInfo& fisher, const NullBasisOptions& options) {
  const SymmetricEigen eig = symmetric_eigen(fisher.matrix);
  if (options.epsilon) {
    if (!(*options.epsilon > 0)) throw InvalidModel("epsilon must be positive");
    return build_basis(eig, *options.epsilon, EpsilonSource::user);
  }
  const auto [eps, source] = auto_epsilon(eig.values, options.reference_scale);
  return build_basis(eig, eps, source);
}

NullBasis null_basis(const FisherInfo& fisher, double epsilon) {
  NullBasisOptions options;
  options.epsilon = epsilon;
  return null_basis(fisher, options);
}

double subspace_distance(const MatrixXd& v1, const MatrixXd& v2) {
  const Index p = std::max(v1.rows(), v2.rows());
  MatrixXd diff = MatrixXd::Zero(p, p);
  if (v1.cols() > 0) diff += v1 * v1.transpose();
  if (v2.cols() > 0) diff -= v2 * v2.transpose();
  if (p == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(diff, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace lcmfit
