#include "lcmfit/expfam.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

namespace lcmfit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_model: return "InvalidModel";
    case ErrorKind::rank: return "RankError";
    case ErrorKind::singular_step: return "SingularStep";
    case ErrorKind::not_symmetric: return "NotSymmetric";
    case ErrorKind::no_descent_direction: return "NoDescentDirection";
    case ErrorKind::zero_direction: return "ZeroDirection";
    case ErrorKind::iteration_limit: return "IterationLimit";
    case ErrorKind::solver_failure: return "SolverFailure";
    case ErrorKind::non_boundary_target: return "NonBoundaryTarget";
    case ErrorKind::too_large: return "TooLarge";
    case ErrorKind::parse: return "ParseError";
    case ErrorKind::io: return "IoError";
  }
  return "Error";
}

const char* to_string(FamilyTag tag) noexcept {
  return tag == FamilyTag::bernoulli ? "bernoulli" : "poisson";
}

namespace {

bool is_integer(double v) { return std::isfinite(v) && v == std::round(v); }

}  // namespace

GlmModel::GlmModel(MatrixXd model_matrix, VectorXd response, Family family)
    : M_(std::move(model_matrix)), y_(std::move(response)), family_(std::move(family)) {
  const Index n = M_.rows();
  const Index p = M_.cols();
  if (n == 0 || p == 0) throw InvalidModel("model matrix must be non-empty");
  if (y_.size() != n) {
    std::ostringstream os;
    os << "response has length " << y_.size() << " but model matrix has " << n << " rows";
    throw InvalidModel(os.str());
  }
  if (p > n) throw RankError("model matrix has more columns than rows");
  if (!M_.allFinite()) throw InvalidModel("model matrix has non-finite entries");

  if (family_.is_poisson() && family_.trials.size() != 0)
    throw InvalidModel("Poisson family takes no trial counts");
  if (family_.is_bernoulli() && family_.trials.size() != 0) {
    if (family_.trials.size() != n) throw InvalidModel("trials vector length differs from n");
    for (Index i = 0; i < n; ++i)
      if (!is_integer(family_.trials[i]) || family_.trials[i] < 1)
        throw InvalidModel("trials must be integers >= 1 (row " + std::to_string(i) + ")");
  }
  for (Index i = 0; i < n; ++i) {
    const double yi = y_[i];
    if (!is_integer(yi) || yi < 0)
      throw InvalidModel("response must be a nonnegative integer (row " + std::to_string(i) + ")");
    if (family_.is_bernoulli() && yi > trials(i))
      throw InvalidModel("Bernoulli response exceeds its trial count (row " + std::to_string(i) + ")");
  }

  const double rcond = inverse_condition(M_);
  if (rcond < kRankCutoff) {
    std::ostringstream os;
    os << "model matrix is rank deficient or ill-conditioned (sigma_min/sigma_max = " << rcond << ")";
    throw RankError(os.str());
  }
}

GlmModel GlmModel::restrict(const std::vector<Index>& rows, const std::vector<Index>& cols) const {
  MatrixXd sub(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  VectorXd ysub(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) sub(r, c) = M_(rows[r], cols[c]);
    ysub[r] = y_[rows[r]];
  }
  Family fam = family_;
  if (fam.trials.size() > 0) {
    VectorXd t(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) t[r] = family_.trials[rows[r]];
    fam.trials = std::move(t);
  }
  return GlmModel(std::move(sub), std::move(ysub), std::move(fam));
}

CanonicalPoint::CanonicalPoint(const GlmModel& model, VectorXd beta) : beta_(std::move(beta)) {
  if (beta_.size() != model.p())
    throw InvalidModel("parameter length " + std::to_string(beta_.size()) + " differs from p = " +
                       std::to_string(model.p()));
  theta_ = model.M() * beta_;
}

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double logistic(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double cumulant(FamilyTag family, double theta, double trials) {
  if (family == FamilyTag::bernoulli) return trials * softplus(theta);
  return std::exp(theta);
}

double cumulant_increment(FamilyTag family, double theta, double tau, double trials) {
  if (family == FamilyTag::poisson) return std::exp(theta) * std::expm1(tau);
  const double a = theta + tau;
  double diff;
  if (a >= 0 && theta >= 0) {
    diff = tau + std::log1p(std::exp(-a)) - std::log1p(std::exp(-theta));
  } else if (a <= 0 && theta <= 0) {
    diff = std::log1p(std::exp(a)) - std::log1p(std::exp(theta));
  } else {
    diff = softplus(a) - softplus(theta);
  }
  return trials * diff;
}

double mean_of(FamilyTag family, double theta, double trials) {
  if (family == FamilyTag::bernoulli) return trials * logistic(theta);
  return std::exp(theta);
}

double variance_of(FamilyTag family, double theta, double trials) {
  if (family == FamilyTag::bernoulli) return trials * logistic(theta) * logistic(-theta);
  return std::exp(theta);
}

double log_density_kernel(FamilyTag family, double y, double theta, double trials) {
  if (family == FamilyTag::poisson) return y * theta - std::exp(theta);
  // y*theta - t*softplus(theta) = -y*softplus(-theta) - (t-y)*softplus(theta)
  double value = 0.0;
  if (y > 0) value -= y * softplus(-theta);
  if (trials - y > 0) value -= (trials - y) * softplus(theta);
  return value;
}

VectorXd canonical_statistic(const GlmModel& model) { return model.M().transpose() * model.y(); }

double log_likelihood(const GlmModel& model, const CanonicalPoint& point) {
  const auto tag = model.family().tag;
  const VectorXd& theta = point.theta();
  double total = 0.0;
  for (Index i = 0; i < model.n(); ++i)
    total += log_density_kernel(tag, model.y()[i], theta[i], model.trials(i));
  return total;
}

double log_likelihood(const GlmModel& model, const VectorXd& beta) {
  return log_likelihood(model, CanonicalPoint(model, beta));
}

VectorXd mean_value(const GlmModel& model, const CanonicalPoint& point) {
  const auto tag = model.family().tag;
  VectorXd mu(model.n());
  for (Index i = 0; i < model.n(); ++i) mu[i] = mean_of(tag, point.theta()[i], model.trials(i));
  return mu;
}

VectorXd variance_value(const GlmModel& model, const CanonicalPoint& point) {
  const auto tag = model.family().tag;
  VectorXd v(model.n());
  for (Index i = 0; i < model.n(); ++i) v[i] = variance_of(tag, point.theta()[i], model.trials(i));
  return v;
}

VectorXd score(const GlmModel& model, const CanonicalPoint& point) {
  return model.M().transpose() * (model.y() - mean_value(model, point));
}

FisherInfo fisher_information(const GlmModel& model, const CanonicalPoint& point) {
  const VectorXd w = variance_value(model, point);
  const MatrixXd weighted = w.cwiseSqrt().asDiagonal() * model.M();
  FisherInfo info;
  info.matrix = MatrixXd::Zero(model.p(), model.p());
  info.matrix.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
  info.matrix.triangularView<Eigen::StrictlyUpper>() =
      info.matrix.transpose().triangularView<Eigen::StrictlyUpper>();
  return info;
}

double cgf_check(const GlmModel& model, const CanonicalPoint& point, const VectorXd& t) {
  if (t.size() != model.p()) throw InvalidModel("cgf_check: t has wrong length");
  const VectorXd tau = model.M() * t;
  const auto tag = model.family().tag;
  double total = 0.0;
  for (Index i = 0; i < model.n(); ++i)
    total += cumulant_increment(tag, point.theta()[i], tau[i], model.trials(i));
  return total;
}

double inverse_condition(const MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  Eigen::BDCSVD<MatrixXd> svd(matrix);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0) return 0.0;
  return s[s.size() - 1] / s[0];
}

namespace {

double largest_singular_value(const MatrixXd& matrix) {
  // Exact eigenvalues of M^T M: a power iteration can start in the null space when
  // columns cancel, and then reports zero.
  if (matrix.cols() == 0 || matrix.rows() == 0) return 0.0;
  const MatrixXd gram = matrix.transpose() * matrix;
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(solver.eigenvalues().maxCoeff(), 0.0));
}

}  // namespace

std::vector<Index> independent_columns(const MatrixXd& matrix, double rel_cutoff) {
  const Index n = matrix.rows();
  const Index p = matrix.cols();
  const double cutoff = rel_cutoff * largest_singular_value(matrix);
  std::vector<Index> kept;
  MatrixXd basis(n, std::min(n, p));
  Index rank = 0;
  for (Index k = 0; k < p; ++k) {
    VectorXd r = matrix.col(k);
    for (int pass = 0; pass < 2 && rank > 0; ++pass) {
      const VectorXd coef = basis.leftCols(rank).transpose() * r;
      r.noalias() -= basis.leftCols(rank) * coef;
    }
    const double norm = r.norm();
    if (norm > cutoff && norm > 0.0 && rank < basis.cols()) {
      basis.col(rank++) = r / norm;
      kept.push_back(k);
    }
  }
  return kept;
}

}  // namespace lcmfit
