#include <cmath>
#include <numbers>
#include <vector>

#include "lcmfit/oracle.hpp"

namespace lcmfit::oracle {

namespace {

// Side of the range an observation sits on: -1 at zero, +1 at the Bernoulli trial
// count, 0 strictly inside.
int bound_side(const GlmModel& model, Index i) {
  const double yi = model.y()[i];
  if (yi == 0) return -1;
  if (model.family().is_bernoulli() && yi == model.trials(i)) return 1;
  return 0;
}

// Dense tableau simplex for max c^T x subject to A x <= b, x >= 0 with b >= 0, using
// Bland's rule. Returns the optimal x, or nothing when the objective is unbounded.
struct Simplex {
  std::vector<std::vector<double>> t;  // (m + 1) x (nv + m + 1); last row is the objective
  std::vector<int> basis;
  int m = 0;
  int nv = 0;

  Simplex(const std::vector<std::vector<double>>& a, const std::vector<double>& b, const std::vector<double>& c)
      : m(static_cast<int>(a.size())), nv(static_cast<int>(c.size())) {
    t.assign(static_cast<std::size_t>(m + 1), std::vector<double>(static_cast<std::size_t>(nv + m + 1), 0.0));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < nv; ++j) t[i][j] = a[i][j];
      t[i][nv + i] = 1.0;
      t[i][nv + m] = b[i];
      basis.push_back(nv + i);
    }
    for (int j = 0; j < nv; ++j) t[m][j] = -c[j];
  }

  void pivot(int row, int col) {
    const double inv = 1.0 / t[row][col];
    for (double& v : t[row]) v *= inv;
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = t[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j <= nv + m; ++j) t[i][j] -= f * t[row][j];
    }
    basis[row] = col;
  }

  std::optional<std::vector<double>> solve(double eps) {
    const int width = nv + m;
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < width; ++j)
        if (t[m][j] < -eps) {
          enter = j;
          break;
        }
      if (enter < 0) {
        std::vector<double> x(static_cast<std::size_t>(nv), 0.0);
        for (int i = 0; i < m; ++i)
          if (basis[i] < nv) x[basis[i]] = t[i][width];
        return x;
      }
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] <= eps) continue;
        const double ratio = t[i][width] / t[i][enter];
        if (leave < 0 || ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return std::nullopt;
      pivot(leave, enter);
    }
    throw SolverFailure("oracle simplex did not terminate");
  }
};

std::vector<double> row_of(const GlmModel& model, Index i) {
  std::vector<double> r(static_cast<std::size_t>(model.p()));
  for (Index k = 0; k < model.p(); ++k) r[k] = model.M()(i, k);
  return r;
}

}  // namespace

BoundaryStatus oracle_boundary_status(const GlmModel& model) {
  const Index n = model.n();
  const Index p = model.p();
  if (n * p > 200000) throw TooLarge("model too large for the oracle linear programs");

  // Direction-of-recession constraints on delta = x+ - x-, shared by every program.
  std::vector<std::vector<double>> cone;
  for (Index i = 0; i < n; ++i) {
    const auto r = row_of(model, i);
    const int side = bound_side(model, i);
    auto add = [&](double s) {
      std::vector<double> row(static_cast<std::size_t>(2 * p));
      for (Index k = 0; k < p; ++k) {
        row[k] = s * r[k];
        row[p + k] = -s * r[k];
      }
      cone.push_back(std::move(row));
    };
    // Zero: (M delta)_i <= 0. Trial count: -(M delta)_i <= 0. Inside: both.
    if (side <= 0) add(1.0);
    if (side >= 0) add(-1.0);
  }

  double scale = 1.0;
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < p; ++k) scale = std::max(scale, std::abs(model.M()(i, k)));
  const double eps = 1e-11 * scale;

  BoundaryStatus status;
  VectorXd sum = VectorXd::Zero(p);
  for (Index i = 0; i < n; ++i) {
    const int side = bound_side(model, i);
    if (side == 0) continue;
    // Strictness of component i: -side_sign * (M delta)_i with side_sign = +1 at zero.
    const double s = side < 0 ? 1.0 : -1.0;
    const auto r = row_of(model, i);
    std::vector<double> c(static_cast<std::size_t>(2 * p));
    for (Index k = 0; k < p; ++k) {
      c[k] = -s * r[k];
      c[p + k] = s * r[k];
    }
    auto a = cone;
    a.push_back(c);
    std::vector<double> b(a.size(), 0.0);
    b.back() = 1.0;
    Simplex lp(a, b, c);
    const auto x = lp.solve(eps);
    if (!x) throw SolverFailure("oracle linear program unexpectedly unbounded");
    double value = 0.0;
    for (Index k = 0; k < 2 * p; ++k) value += c[k] * (*x)[k];
    if (value > 0.5) {
      status.fixed.push_back(i);
      for (Index k = 0; k < p; ++k) sum[k] += (*x)[k] - (*x)[p + k];
    }
  }
  status.on_boundary = !status.fixed.empty();
  if (status.on_boundary) status.witness = sum / sum.norm();
  return status;
}

BoundaryStatus oracle_boundary_status_grid(const GlmModel& model, double resolution) {
  const Index p = model.p();
  if (p > 3) throw TooLarge("direction grid is limited to p <= 3");
  const Index n = model.n();
  constexpr double tol = 1e-9;
  std::vector<bool> strict(static_cast<std::size_t>(n), false);
  VectorXd sum = VectorXd::Zero(p);
  bool any = false;

  auto test = [&](const VectorXd& d) {
    std::vector<double> zeta(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < p; ++k) zeta[i] += model.M()(i, k) * d[k];
    bool nonzero = false;
    for (Index i = 0; i < n; ++i) {
      const int side = bound_side(model, i);
      if (side < 0 && zeta[i] > tol) return;
      if (side > 0 && zeta[i] < -tol) return;
      if (side == 0 && std::abs(zeta[i]) > tol) return;
      nonzero = nonzero || std::abs(zeta[i]) > tol;
    }
    if (!nonzero) return;
    any = true;
    sum += d;
    for (Index i = 0; i < n; ++i)
      if (std::abs(zeta[i]) > tol) strict[i] = true;
  };

  const double pi = std::numbers::pi;
  if (p == 1) {
    test(VectorXd::Constant(1, 1.0));
    test(VectorXd::Constant(1, -1.0));
  } else if (p == 2) {
    const int steps = static_cast<int>(std::ceil(2 * pi / resolution));
    for (int s = 0; s < steps; ++s) {
      const double a = 2 * pi * s / steps;
      test((VectorXd(2) << std::cos(a), std::sin(a)).finished());
    }
  } else {
    const int lat_steps = static_cast<int>(std::ceil(pi / resolution));
    for (int s = 0; s <= lat_steps; ++s) {
      const double phi = pi * s / lat_steps;
      const int lon_steps = std::max(1, static_cast<int>(std::ceil(2 * pi * std::sin(phi) / resolution)));
      for (int q = 0; q < lon_steps; ++q) {
        const double lam = 2 * pi * q / lon_steps;
        test((VectorXd(3) << std::sin(phi) * std::cos(lam), std::sin(phi) * std::sin(lam), std::cos(phi)).finished());
      }
    }
  }

  BoundaryStatus status;
  status.on_boundary = any;
  for (Index i = 0; i < n; ++i)
    if (strict[i]) status.fixed.push_back(i);
  if (any) status.witness = sum / sum.norm();
  return status;
}

}  // namespace lcmfit::oracle
