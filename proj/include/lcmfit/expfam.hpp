#pragma once

#include <Eigen/Dense>

#include <vector>

#include "lcmfit/errors.hpp"

namespace lcmfit {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class FamilyTag { bernoulli, poisson };

/// Response distribution of a discrete GLM with canonical link.
///
/// Bernoulli responses are binomial counts out of `trials` (all ones by default);
/// Poisson carries no trial counts.
struct Family {
  FamilyTag tag = FamilyTag::bernoulli;
  VectorXd trials;  // empty for Poisson, or for Bernoulli meaning "all ones"

  static Family bernoulli() { return {FamilyTag::bernoulli, {}}; }
  static Family bernoulli(VectorXd trials) { return {FamilyTag::bernoulli, std::move(trials)}; }
  static Family poisson() { return {FamilyTag::poisson, {}}; }

  bool is_bernoulli() const noexcept { return tag == FamilyTag::bernoulli; }
  bool is_poisson() const noexcept { return tag == FamilyTag::poisson; }
  /// Trial count of observation i (1 for Poisson and for Bernoulli without explicit trials).
  double trials_at(Index i) const noexcept {
    return (is_bernoulli() && trials.size() > 0) ? trials[i] : 1.0;
  }
};

const char* to_string(FamilyTag tag) noexcept;

/// Model matrix, response and family of a discrete exponential family GLM.
///
/// Construction validates the response against the family and requires the model
/// matrix to have full column rank (smallest/largest singular value >= 1e-8).
class GlmModel {
 public:
  static constexpr double kRankCutoff = 1e-8;

  GlmModel(MatrixXd model_matrix, VectorXd response, Family family);

  const MatrixXd& M() const noexcept { return M_; }
  const VectorXd& y() const noexcept { return y_; }
  const Family& family() const noexcept { return family_; }
  Index n() const noexcept { return M_.rows(); }
  Index p() const noexcept { return M_.cols(); }
  double trials(Index i) const noexcept { return family_.trials_at(i); }

  /// Submodel with the given rows and columns (indices into this model).
  GlmModel restrict(const std::vector<Index>& rows, const std::vector<Index>& cols) const;

 private:
  MatrixXd M_;
  VectorXd y_;
  Family family_;
};

/// Submodel canonical parameter beta with its saturated image theta = M beta.
class CanonicalPoint {
 public:
  CanonicalPoint(const GlmModel& model, VectorXd beta);

  const VectorXd& beta() const noexcept { return beta_; }
  const VectorXd& theta() const noexcept { return theta_; }

 private:
  VectorXd beta_;
  VectorXd theta_;
};

/// Fisher information matrix (variance of the canonical statistic).
struct FisherInfo {
  MatrixXd matrix;
};

// Per-observation maps. theta is the saturated canonical parameter of one observation.
double cumulant(FamilyTag family, double theta, double trials = 1.0);
/// c(theta + tau) - c(theta) for one observation, without cancellation at large |theta|.
double cumulant_increment(FamilyTag family, double theta, double tau, double trials = 1.0);
double mean_of(FamilyTag family, double theta, double trials = 1.0);
double variance_of(FamilyTag family, double theta, double trials = 1.0);
/// y*theta - c(theta): the observation's log density up to the base-measure term.
double log_density_kernel(FamilyTag family, double y, double theta, double trials = 1.0);

/// log(1 + e^x) evaluated without overflow.
double softplus(double x) noexcept;
/// 1 / (1 + e^-x) evaluated without overflow.
double logistic(double x) noexcept;

VectorXd canonical_statistic(const GlmModel& model);

/// l(beta) = <M^T y, beta> - sum_i c(theta_i), accumulated per observation.
double log_likelihood(const GlmModel& model, const CanonicalPoint& point);
double log_likelihood(const GlmModel& model, const VectorXd& beta);

VectorXd mean_value(const GlmModel& model, const CanonicalPoint& point);
VectorXd variance_value(const GlmModel& model, const CanonicalPoint& point);

/// Gradient of the log likelihood, M^T (y - mean).
VectorXd score(const GlmModel& model, const CanonicalPoint& point);

FisherInfo fisher_information(const GlmModel& model, const CanonicalPoint& point);

/// Submodel cumulant generating function c(beta + t) - c(beta).
double cgf_check(const GlmModel& model, const CanonicalPoint& point, const VectorXd& t);

/// Indices of a maximal set of linearly independent columns, greedily in column order.
/// A column is dropped when its residual against the kept columns falls below
/// rel_cutoff times the largest singular value of the matrix.
std::vector<Index> independent_columns(const MatrixXd& matrix, double rel_cutoff = 1e-8);

/// Ratio of the smallest to the largest singular value (0 for an empty or zero matrix).
double inverse_condition(const MatrixXd& matrix);

}  // namespace lcmfit
