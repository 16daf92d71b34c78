#include "lcmfit/inference.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

#include "lcmfit/nnls.hpp"

namespace lcmfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_normalizer(FamilyTag tag, double y, double trials) {
  if (tag == FamilyTag::poisson) return -std::lgamma(y + 1.0);
  if (trials == 1.0) return 0.0;
  return std::lgamma(trials + 1.0) - std::lgamma(y + 1.0) - std::lgamma(trials - y + 1.0);
}

// The constraint restricted to the fixed rows, as a function of u.
struct Constraint {
  FamilyTag tag = FamilyTag::bernoulli;
  VectorXd theta0;  // M_I beta_hat
  MatrixXd a;       // M_I gamma_basis
  VectorXd y;
  VectorXd trials;
  double constant = 0.0;
  double level = 0.0;  // log alpha

  double value(const VectorXd& u) const {
    const VectorXd theta = theta0 + a * u;
    double total = constant;
    for (Index i = 0; i < theta.size(); ++i) total += log_density_kernel(tag, y[i], theta[i], trials[i]);
    return total;
  }

  // Returns h(u) and fills the gradient and Hessian of h.
  double derivatives(const VectorXd& u, VectorXd& grad, MatrixXd& hess) const {
    const VectorXd theta = theta0 + a * u;
    VectorXd resid(theta.size());
    VectorXd var(theta.size());
    double total = constant;
    for (Index i = 0; i < theta.size(); ++i) {
      total += log_density_kernel(tag, y[i], theta[i], trials[i]);
      resid[i] = y[i] - mean_of(tag, theta[i], trials[i]);
      var[i] = variance_of(tag, theta[i], trials[i]);
    }
    grad = a.transpose() * resid;
    hess = -(a.transpose() * var.asDiagonal() * a);
    return total;
  }
};

// Solves (h + tau I) d = rhs for symmetric positive semidefinite h, inflating tau until
// the Cholesky factorization succeeds.
VectorXd solve_psd(const MatrixXd& h, const VectorXd& rhs) {
  const double scale = 1.0 + h.diagonal().cwiseAbs().maxCoeff();
  for (double tau = 0.0; tau <= 1e-2 * scale; tau = (tau == 0.0 ? 1e-14 * scale : tau * 10.0)) {
    MatrixXd m = h;
    m.diagonal().array() += tau;
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) continue;
    VectorXd d = llt.solve(rhs);
    if (d.allFinite()) return d;
  }
  return rhs / scale;
}

// Damped Newton ascent on h from u until h > level / 2.
VectorXd feasible_start(const Constraint& c, int& steps) {
  VectorXd u = VectorXd::Zero(c.a.cols());
  const double target = 0.5 * c.level;
  VectorXd grad;
  MatrixXd hess;
  double h = c.derivatives(u, grad, hess);
  for (int it = 0; it < 500 && !(h > target); ++it) {
    const VectorXd d = solve_psd(-hess, grad);
    double step = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const VectorXd trial = u + step * d;
      const double ht = c.value(trial);
      if (std::isfinite(ht) && ht > h) {
        u = trial;
        moved = true;
        break;
      }
    }
    ++steps;
    if (!moved) break;
    h = c.derivatives(u, grad, hess);
  }
  if (!(h > c.level)) throw SolverFailure("no point of the constancy space satisfies the probability constraint");
  return u;
}

// Maximizes sign * w^T u subject to h(u) >= level by a log-barrier method started at
// the strictly feasible point u.
VectorXd barrier_optimum(const Constraint& c, const VectorXd& w, double sign, VectorXd u, int& steps) {
  VectorXd grad_h;
  MatrixXd hess_h;
  for (double t = 1.0; t <= 1e10 * (1.0 + 1e-9); t *= 10.0) {
    for (int it = 0; it < 200; ++it) {
      const double h = c.derivatives(u, grad_h, hess_h);
      const double s = h - c.level;
      const VectorXd grad_f = -t * sign * w - grad_h / s;
      const MatrixXd hess_f = -hess_h / s + (grad_h * grad_h.transpose()) / (s * s);
      const VectorXd d = solve_psd(hess_f, -grad_f);
      const double slope = grad_f.dot(d);
      ++steps;
      if (!(slope < 0) || -slope <= 1e-12) break;
      // Barrier decrease is evaluated as a difference so that the large linear term
      // does not swamp it.
      double step = 1.0;
      bool moved = false;
      for (int k = 0; k < 60; ++k, step *= 0.5) {
        const VectorXd trial = u + step * d;
        const double st = c.value(trial) - c.level;
        if (!(st > 0) || !std::isfinite(st)) continue;
        const double change = -t * sign * step * w.dot(d) - std::log(st / s);
        if (change <= 0.25 * step * slope) {
          u = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
  }
  return u;
}

// True when some recession direction of the feasible set increases sign * w^T u.
bool unbounded_along(const Constraint& c, const std::vector<int>& bound_sign, const VectorXd& w, double sign) {
  const Index m = c.a.rows();
  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  for (Index i = 0; i < m; ++i) {
    const VectorXd ai = c.a.row(i).transpose();
    // Lower bound: a_i^T d <= 0. Upper bound: a_i^T d >= 0. Interior: both.
    if (bound_sign[i] <= 0) {
      rows.push_back(-ai);
      rhs.push_back(0.0);
    }
    if (bound_sign[i] >= 0) {
      rows.push_back(ai);
      rhs.push_back(0.0);
    }
  }
  rows.push_back(sign * w / w.norm());
  rhs.push_back(1.0);
  MatrixXd g(static_cast<Index>(rows.size()), c.a.cols());
  VectorXd h(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    g.row(static_cast<Index>(r)) = rows[r].transpose();
    h[static_cast<Index>(r)] = rhs[r];
  }
  return least_distance(g, h).has_value();
}

}  // namespace

void CiProblem::validate() const {
  if (model == nullptr) throw InvalidModel("interval problem has no model");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidModel("alpha must lie in (0, 1)");
  if (beta_hat.size() != model->p() || gamma_basis.rows() != model->p())
    throw InvalidModel("interval problem dimensions do not match the model");
  if (gamma_basis.cols() == 0) throw NonBoundaryTarget("constancy space is empty; the MLE exists");
  const Index j = gamma_basis.cols();
  if ((gamma_basis.transpose() * gamma_basis - MatrixXd::Identity(j, j)).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidModel("gamma_basis columns are not orthonormal");
  for (Index i : fixed)
    if (i < 0 || i >= model->n()) throw InvalidModel("fixed index out of range");
  if (const auto* mean = std::get_if<MeanTarget>(&target)) {
    if (mean->k < 0 || mean->k >= model->n()) throw InvalidModel("target component out of range");
  } else if (std::get<LinearTarget>(target).c.size() != model->p()) {
    throw InvalidModel("linear target has wrong length");
  }
}

CiProblem make_ci_problem(const GlmModel& model, const LcmResult& lcm, double alpha, CiTarget target) {
  CiProblem problem;
  problem.model = &model;
  problem.beta_hat = lcm.lcm_fit.beta_full.size() == model.p() ? lcm.lcm_fit.beta_full : VectorXd::Zero(model.p());
  problem.gamma_basis = constancy_basis(model, lcm.support.free);
  problem.fixed = lcm.support.fixed;
  problem.alpha = alpha;
  problem.target = std::move(target);
  return problem;
}

double log_boundary_probability(const GlmModel& model, const CanonicalPoint& point, const std::vector<Index>& fixed) {
  const auto tag = model.family().tag;
  double total = 0.0;
  for (Index i : fixed) {
    const double yi = model.y()[i];
    const double ti = model.trials(i);
    total += log_density_kernel(tag, yi, point.theta()[i], ti) + log_normalizer(tag, yi, ti);
  }
  return total;
}

double boundary_probability(const GlmModel& model, const CanonicalPoint& point, const std::vector<Index>& fixed) {
  return std::exp(log_boundary_probability(model, point, fixed));
}

std::string target_id(const CiTarget& target) {
  if (const auto* mean = std::get_if<MeanTarget>(&target)) return "mu[" + std::to_string(mean->k) + "]";
  return "linear";
}

OneSidedInterval one_sided_ci(const CiProblem& problem) {
  problem.validate();
  const GlmModel& model = *problem.model;
  const auto tag = model.family().tag;

  Constraint c;
  c.tag = tag;
  c.level = std::log(problem.alpha);
  const Index m = static_cast<Index>(problem.fixed.size());
  c.theta0.resize(m);
  c.a.resize(m, problem.gamma_basis.cols());
  c.y.resize(m);
  c.trials.resize(m);
  std::vector<int> bound_sign(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    const Index i = problem.fixed[r];
    c.theta0[r] = model.M().row(i).dot(problem.beta_hat);
    c.a.row(r) = model.M().row(i) * problem.gamma_basis;
    c.y[r] = model.y()[i];
    c.trials[r] = model.trials(i);
    c.constant += log_normalizer(tag, c.y[r], c.trials[r]);
    if (c.y[r] == 0)
      bound_sign[r] = -1;
    else if (tag == FamilyTag::bernoulli && c.y[r] == c.trials[r])
      bound_sign[r] = 1;
    else
      bound_sign[r] = 0;
  }

  // Target as offset + w^T u, plus the map from that value to the reported scale.
  VectorXd w;
  double offset = 0.0;
  double scale_ref = 1.0;
  const auto* mean = std::get_if<MeanTarget>(&problem.target);
  if (mean) {
    bool in_fixed = false;
    for (Index i : problem.fixed) in_fixed = in_fixed || i == mean->k;
    if (!in_fixed) throw NonBoundaryTarget("target component is free in the limiting conditional model");
    w = (model.M().row(mean->k) * problem.gamma_basis).transpose();
    offset = model.M().row(mean->k).dot(problem.beta_hat);
    scale_ref = model.M().row(mean->k).norm();
  } else {
    const VectorXd& cvec = std::get<LinearTarget>(problem.target).c;
    w = problem.gamma_basis.transpose() * cvec;
    offset = cvec.dot(problem.beta_hat);
    scale_ref = cvec.norm();
  }
  if (w.norm() <= 1e-10 * (1.0 + scale_ref))
    throw NonBoundaryTarget("target does not vary over the constancy space");

  const bool upper_unbounded = unbounded_along(c, bound_sign, w, 1.0);
  const bool lower_unbounded = unbounded_along(c, bound_sign, w, -1.0);
  if (!upper_unbounded && !lower_unbounded)
    throw NonBoundaryTarget("target is bounded on both sides; a two-sided interval applies");

  auto to_scale = [&](double eta) {
    if (!mean) return eta;
    return tag == FamilyTag::bernoulli ? logistic(eta) : std::exp(eta);
  };

  OneSidedInterval out;
  out.target_id = target_id(problem.target);
  out.alpha = problem.alpha;
  out.lower = mean ? 0.0 : -kInf;
  out.upper = mean ? (tag == FamilyTag::bernoulli ? 1.0 : kInf) : kInf;
  if (upper_unbounded && lower_unbounded) {
    if (!mean) out.solver_status = "unbounded_both";
    else out.solver_status = "ok";
    return out;
  }

  const VectorXd start = feasible_start(c, out.newton_steps);
  const double sign = upper_unbounded ? -1.0 : 1.0;
  const VectorXd u = barrier_optimum(c, w, sign, start, out.newton_steps);
  const double value = to_scale(offset + w.dot(u));
  if (sign > 0)
    out.upper = value;
  else
    out.lower = value;
  out.achieved_constraint = std::exp(c.value(u));
  out.solver_status = "ok";
  return out;
}

}  // namespace lcmfit
