#include "lcmfit/nnls.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <vector>

namespace lcmfit {

namespace {

VectorXd passive_least_squares(const MatrixXd& a, const VectorXd& b, const std::vector<Index>& passive) {
  MatrixXd sub(a.rows(), static_cast<Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(passive[k]);
  return sub.completeOrthogonalDecomposition().solve(b);
}

}  // namespace

NnlsResult nnls(const MatrixXd& a, const VectorXd& b, int max_iterations) {
  const Index n = a.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(10 * n + 50);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max(a.cwiseAbs().colwise().sum().maxCoeff(), 1.0) *
                     static_cast<double>(std::max(a.rows(), n));

  NnlsResult out;
  out.x = VectorXd::Zero(n);
  std::vector<bool> is_passive(static_cast<std::size_t>(n), false);
  std::vector<bool> blocked(static_cast<std::size_t>(n), false);

  for (;;) {
    const VectorXd w = a.transpose() * (b - a * out.x);
    Index t = -1;
    double best = tol;
    for (Index j = 0; j < n; ++j)
      if (!is_passive[j] && !blocked[j] && w[j] > best) {
        best = w[j];
        t = j;
      }
    if (t < 0) {
      out.converged = true;
      break;
    }
    if (++out.iterations > max_iterations) break;
    is_passive[t] = true;

    for (int inner = 0; inner <= 3 * n + 10; ++inner) {
      std::vector<Index> passive;
      for (Index j = 0; j < n; ++j)
        if (is_passive[j]) passive.push_back(j);
      const VectorXd z_p = passive_least_squares(a, b, passive);
      VectorXd z = VectorXd::Zero(n);
      for (std::size_t k = 0; k < passive.size(); ++k) z[passive[k]] = z_p[static_cast<Index>(k)];

      bool feasible = true;
      for (Index j : passive)
        if (z[j] <= 0) feasible = false;
      if (feasible) {
        out.x = z;
        break;
      }
      double alpha = 1.0;
      for (Index j : passive)
        if (z[j] <= 0) {
          const double denom = out.x[j] - z[j];
          if (denom > 0) alpha = std::min(alpha, out.x[j] / denom);
        }
      out.x += alpha * (z - out.x);
      bool removed = false;
      for (Index j : passive)
        if (out.x[j] <= tol * std::max(1.0, out.x.cwiseAbs().maxCoeff())) {
          out.x[j] = 0.0;
          is_passive[j] = false;
          // In exact arithmetic the entering column stays positive; if rounding pushes
          // it straight back out, keep it from re-entering immediately.
          if (j == t) blocked[j] = true;
          removed = true;
        }
      if (!removed) break;
    }
    // A column that was just blocked may re-enter once the solution has moved.
    for (Index j = 0; j < n; ++j)
      if (blocked[j] && j != t) blocked[j] = false;
  }
  out.residual = a * out.x - b;
  return out;
}

std::optional<VectorXd> least_distance(const MatrixXd& g, const VectorXd& h) {
  const Index m = g.rows();
  const Index k = g.cols();
  MatrixXd e(k + 1, m);
  e.topRows(k) = g.transpose();
  e.row(k) = h.transpose();
  VectorXd f = VectorXd::Zero(k + 1);
  f[k] = 1.0;
  const NnlsResult sol = nnls(e, f);
  const VectorXd& r = sol.residual;
  if (r.norm() <= 1e-12 || !(r[k] < -1e-14)) return std::nullopt;
  VectorXd x = -r.head(k) / r[k];
  return x;
}

}  // namespace lcmfit
