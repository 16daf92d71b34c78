#pragma once

#include <optional>
#include <vector>

#include "lcmfit/expfam.hpp"
#include "lcmfit/inference.hpp"

// Brute-force reference computations for desk-scale models. Nothing here calls the
// fitting, null-space, recession or interval code of the main library.
namespace lcmfit::oracle {

/// Largest number of responses any enumeration visits.
inline constexpr long long kMaxEnumeration = 1LL << 20;

/// Default Poisson truncation: 10 * max(1, max y).
int default_cap(const GlmModel& model);

struct SupportEnumeration {
  std::vector<VectorXd> points;  // distinct values of M^T y' over enumerated y'
  long long responses = 0;       // number of responses y' visited
  int cap = 0;                   // Poisson truncation bound per cell (0 for Bernoulli)
  bool truncated = false;
};

/// Enumerates every response in the sample space (Bernoulli) or in {0..cap}^n
/// (Poisson) and collects the canonical statistics.
/// Throws TooLarge beyond kMaxEnumeration responses.
SupportEnumeration enumerate_support(const GlmModel& model, std::optional<int> cap = std::nullopt);

/// True iff <M^T y' - M^T y, delta> <= tol for every y' in the sample space.
///
/// Bernoulli models are enumerated exhaustively. Poisson models are enumerated over
/// {0..cap}^n when that is at most kMaxEnumeration responses; otherwise the maximum over
/// the box is taken cell by cell, which is exact because the inner product is separable.
/// A violation found within the box is definitive. Outside it, increasing any cell with
/// zeta_i > 0 only enlarges a violation that already shows at y_i + 1 <= cap.
bool oracle_dor_verify(const GlmModel& model, const VectorXd& delta, std::optional<int> cap = std::nullopt,
                       double tol = 1e-9);

struct BoundaryStatus {
  bool on_boundary = false;
  std::optional<VectorXd> witness;  // unit vector
  std::vector<Index> fixed;         // components moved by some direction of recession
};

/// Exact detection by one linear program per bound component: maximize the strictness
/// -s_i (M delta)_i, capped at 1, over directions of recession. The witness is the sum
/// of the per-component maximizers, which is strict on every component found.
BoundaryStatus oracle_boundary_status(const GlmModel& model);

/// Direction grid over the unit sphere in R^p, p <= 3, at the given angular
/// resolution. Detects only direction-of-recession cones with nonempty interior.
/// Throws TooLarge for p > 3.
BoundaryStatus oracle_boundary_status_grid(const GlmModel& model, double resolution = 1e-3);

struct GridSpec {
  int radial = 200;
  int angular = 720;
  double radius = 200.0;
  int zoom_points = 21;  // per axis
  int zoom_levels = 300;
};

/// Polar grid over u followed by zooming Cartesian grids around the best feasible
/// point on each side. `lower` and `upper` are the extreme target values found.
/// Throws TooLarge when the constancy space has dimension above 3.
OneSidedInterval oracle_ci_grid(const CiProblem& problem, const GridSpec& grid = {});

}  // namespace lcmfit::oracle
