#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <variant>

#include "lcmfit/oracle.hpp"

namespace lcmfit::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log probability of the observed fixed components and the target, both affine in u.
struct GridProblem {
  bool poisson = false;
  bool mean_target = false;
  std::vector<double> theta0;
  std::vector<std::vector<double>> a;  // |I| x j
  std::vector<double> y;
  std::vector<double> trials;
  double log_norm = 0.0;
  double level = 0.0;
  std::vector<double> w;
  double offset = 0.0;
  int j = 0;

  double log_prob(const std::vector<double>& u) const {
    double total = log_norm;
    for (std::size_t r = 0; r < theta0.size(); ++r) {
      double th = theta0[r];
      for (int k = 0; k < j; ++k) th += a[r][k] * u[k];
      if (poisson) {
        total += y[r] * th - std::exp(th);
      } else {
        // y log p + (t - y) log(1 - p) with p = 1 / (1 + e^-th)
        const double log1pexp = std::max(th, 0.0) + std::log1p(std::exp(-std::abs(th)));
        total += y[r] * (th - log1pexp) - (trials[r] - y[r]) * log1pexp;
      }
    }
    return total;
  }

  double target(const std::vector<double>& u) const {
    double v = offset;
    for (int k = 0; k < j; ++k) v += w[k] * u[k];
    return v;
  }

  double to_scale(double eta) const {
    if (!mean_target) return eta;
    return poisson ? std::exp(eta) : 1.0 / (1.0 + std::exp(-eta));
  }
};

// Unit directions covering the sphere in R^j.
std::vector<std::vector<double>> directions(int j, int angular) {
  std::vector<std::vector<double>> out;
  const double pi = std::numbers::pi;
  if (j == 1) return {{1.0}, {-1.0}};
  if (j == 2) {
    for (int s = 0; s < angular; ++s) {
      const double a = 2 * pi * s / angular;
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  const int count = 10 * angular;
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int s = 0; s < count; ++s) {
    const double z = 1.0 - 2.0 * (s + 0.5) / count;
    const double rad = std::sqrt(1.0 - z * z);
    out.push_back({rad * std::cos(golden * s), rad * std::sin(golden * s), z});
  }
  return out;
}

struct SideResult {
  double value = 0.0;  // on the affine target scale
  std::vector<double> u;
  bool escaped = false;
  double resolution = 0.0;
};

std::vector<double> along(const std::vector<double>& c, double r, const std::vector<double>& d) {
  std::vector<double> u(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) u[k] = c[k] + r * d[k];
  return u;
}

// Most feasible point of the polar grid around the origin.
std::vector<double> feasible_center(const GridProblem& g, const GridSpec& spec) {
  const auto dirs = directions(g.j, spec.angular);
  std::vector<double> best(static_cast<std::size_t>(g.j), 0.0);
  double best_h = g.log_prob(best);
  const std::vector<double> origin(static_cast<std::size_t>(g.j), 0.0);
  for (int m = 1; m <= spec.radial; ++m) {
    const double frac = static_cast<double>(m) / spec.radial;
    for (const auto& d : dirs) {
      const auto u = along(origin, spec.radius * frac * frac, d);
      const double h = g.log_prob(u);
      if (h > best_h) {
        best_h = h;
        best = u;
      }
    }
  }
  if (!(best_h > g.level)) throw SolverFailure("no strictly feasible grid point");
  return best;
}

struct Ray {
  double score = -kInf;
  std::vector<double> u;
  bool infinite = false;
};

// The feasible set is convex and contains the center, so along each ray it is an
// interval [0, r*]; bisect for r*.
Ray cast(const GridProblem& g, const std::vector<double>& center, const std::vector<double>& d, double sign) {
  Ray ray;
  double lo = 0.0;
  double hi = 1.0;
  while (g.log_prob(along(center, hi, d)) >= g.level) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) {
      ray.infinite = true;
      break;
    }
  }
  if (!ray.infinite)
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g.log_prob(along(center, mid, d)) >= g.level)
        lo = mid;
      else
        hi = mid;
    }
  ray.u = along(center, lo, d);
  ray.score = sign * g.target(ray.u);
  return ray;
}

std::vector<double> normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

// Orthonormal basis of the tangent space of the sphere at d.
std::vector<std::vector<double>> tangent_basis(const std::vector<double>& d) {
  const int j = static_cast<int>(d.size());
  std::vector<std::vector<double>> out;
  for (int axis = 0; axis < j && static_cast<int>(out.size()) < j - 1; ++axis) {
    std::vector<double> e(static_cast<std::size_t>(j), 0.0);
    e[axis] = 1.0;
    auto project = [&](const std::vector<double>& b) {
      double dot = 0.0;
      for (int k = 0; k < j; ++k) dot += e[k] * b[k];
      for (int k = 0; k < j; ++k) e[k] -= dot * b[k];
    };
    project(d);
    for (const auto& b : out) project(b);
    double norm = 0.0;
    for (double x : e) norm += x * x;
    if (norm > 1e-6) out.push_back(normalized(e));
  }
  return out;
}

// Best feasible value of sign * target over rays from the center, on a coarse angular
// grid refined by zooming in the tangent plane of the best direction.
SideResult search_side(const GridProblem& g, const GridSpec& spec, const std::vector<double>& center, double sign) {
  SideResult best;
  double w_norm = 0.0;
  for (double v : g.w) w_norm += v * v;
  w_norm = std::sqrt(w_norm);
  auto escapes = [&](const Ray& ray, const std::vector<double>& d) {
    double slope = 0.0;
    for (int k = 0; k < g.j; ++k) slope += sign * g.w[k] * d[k];
    return ray.infinite && slope > 1e-12 * w_norm;
  };

  Ray top;
  std::vector<double> top_dir;
  for (const auto& d : directions(g.j, spec.angular)) {
    const Ray ray = cast(g, center, d, sign);
    if (escapes(ray, d)) {
      best.escaped = true;
      return best;
    }
    if (ray.score > top.score) {
      top = ray;
      top_dir = d;
    }
  }

  double half = g.j == 1 ? 0.0 : 4.0 * std::numbers::pi / spec.angular;
  if (g.j == 3) half = 4.0 * std::sqrt(4.0 * std::numbers::pi / (10.0 * spec.angular));
  const int pts = spec.zoom_points;
  for (int level = 0; level < spec.zoom_levels && half > 1e-13; ++level) {
    const auto tangents = tangent_basis(top_dir);
    const auto base = top_dir;
    bool edge = false;
    std::vector<int> idx(tangents.size(), 0);
    for (;;) {
      std::vector<double> d = base;
      bool on_edge = false;
      for (std::size_t t = 0; t < tangents.size(); ++t) {
        const double s = half * (2.0 * idx[t] / (pts - 1) - 1.0);
        for (int k = 0; k < g.j; ++k) d[k] += s * tangents[t][k];
        on_edge = on_edge || idx[t] == 0 || idx[t] == pts - 1;
      }
      d = normalized(d);
      const Ray ray = cast(g, center, d, sign);
      if (escapes(ray, d)) {
        best.escaped = true;
        return best;
      }
      if (ray.score > top.score) {
        top = ray;
        top_dir = d;
        edge = on_edge;
      }
      std::size_t t = 0;
      while (t < idx.size() && idx[t] == pts - 1) idx[t++] = 0;
      if (t == idx.size()) break;
      ++idx[t];
    }
    half = edge ? std::min(2.0 * half, 1.0) : 0.5 * half;
  }
  best.u = top.u;
  best.value = g.target(top.u);
  best.resolution = half;
  return best;
}

}  // namespace

OneSidedInterval oracle_ci_grid(const CiProblem& problem, const GridSpec& spec) {
  problem.validate();
  const GlmModel& model = *problem.model;
  const Index j = problem.gamma_basis.cols();
  if (j > 3) throw TooLarge("grid search is limited to constancy spaces of dimension <= 3");

  GridProblem g;
  g.j = static_cast<int>(j);
  g.poisson = model.family().is_poisson();
  g.level = std::log(problem.alpha);
  for (Index i : problem.fixed) {
    double th = 0.0;
    for (Index k = 0; k < model.p(); ++k) th += model.M()(i, k) * problem.beta_hat[k];
    g.theta0.push_back(th);
    std::vector<double> row(static_cast<std::size_t>(j), 0.0);
    for (Index c = 0; c < j; ++c)
      for (Index k = 0; k < model.p(); ++k) row[c] += model.M()(i, k) * problem.gamma_basis(k, c);
    g.a.push_back(std::move(row));
    const double yi = model.y()[i];
    const double ti = model.trials(i);
    g.y.push_back(yi);
    g.trials.push_back(ti);
    g.log_norm += g.poisson ? -std::lgamma(yi + 1.0)
                            : std::lgamma(ti + 1.0) - std::lgamma(yi + 1.0) - std::lgamma(ti - yi + 1.0);
  }

  std::vector<double> coef(static_cast<std::size_t>(model.p()), 0.0);
  if (const auto* mean = std::get_if<MeanTarget>(&problem.target)) {
    g.mean_target = true;
    for (Index k = 0; k < model.p(); ++k) coef[k] = model.M()(mean->k, k);
  } else {
    const auto& c = std::get<LinearTarget>(problem.target).c;
    for (Index k = 0; k < model.p(); ++k) coef[k] = c[k];
  }
  g.w.assign(static_cast<std::size_t>(j), 0.0);
  for (Index k = 0; k < model.p(); ++k) {
    g.offset += coef[k] * problem.beta_hat[k];
    for (Index c = 0; c < j; ++c) g.w[c] += coef[k] * problem.gamma_basis(k, c);
  }

  const auto center = feasible_center(g, spec);
  const SideResult hi = search_side(g, spec, center, 1.0);
  const SideResult lo = search_side(g, spec, center, -1.0);

  OneSidedInterval out;
  out.target_id = target_id(problem.target);
  out.alpha = problem.alpha;
  const double low_end = g.mean_target ? 0.0 : -kInf;
  const double high_end = g.mean_target ? (g.poisson ? kInf : 1.0) : kInf;
  out.lower = lo.escaped ? low_end : g.to_scale(lo.value);
  out.upper = hi.escaped ? high_end : g.to_scale(hi.value);
  const SideResult& finite = hi.escaped ? lo : hi;
  out.achieved_constraint = std::exp(g.log_prob(finite.u));
  std::ostringstream status;
  status << "grid resolution " << std::max(hi.escaped ? 0.0 : hi.resolution, lo.escaped ? 0.0 : lo.resolution);
  out.solver_status = status.str();
  return out;
}

}  // namespace lcmfit::oracle
