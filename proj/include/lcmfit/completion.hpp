#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcmfit/expfam.hpp"
#include "lcmfit/fit.hpp"
#include "lcmfit/nullspace.hpp"

namespace lcmfit {

enum class GeneratorKind { lower_bound, upper_bound, equality_pair };

const char* to_string(GeneratorKind kind) noexcept;

struct ConeGenerator {
  Index index;  // response component
  VectorXd v;   // generator in R^p
  GeneratorKind kind;
};

/// Generators v_1..v_m of the tangent cone of the response support at the observed y.
/// A direction delta is a direction of recession iff <v_i, delta> <= 0 for all i.
struct TangentConeGenerators {
  std::vector<ConeGenerator> rows;
};

/// Row i of M contributes +row (y_i at its lower bound 0), -row (Bernoulli y_i at its
/// trial count) or both signs (y_i strictly inside its range).
TangentConeGenerators tangent_cone_generators(const GlmModel& model);

struct Tolerances {
  double dor = 0.0;
  double support = 0.0;
};

/// 1e-6 * (1 + largest row norm of M) for both tolerances.
Tolerances default_tolerances(const GlmModel& model);

/// Response components split into those fixed at their observed value in the limiting
/// conditional model and those left free.
struct LcmSupport {
  std::vector<Index> fixed;
  std::vector<Index> free;
  int iterations = 0;
  bool degenerate = false;
};

/// Component i is fixed when |(M eta_k)_i| > tol_support for some null basis column.
LcmSupport lcm_support_from_null_basis(const GlmModel& model, const NullBasis& basis,
                                       std::optional<double> tol_support = std::nullopt);

struct DorCheck {
  bool is_dor = false;
  bool is_gdor = false;
  VectorXd zeta;
};

/// Checks <v_i, delta> <= tol_dor for every generator (|.| <= tol_dor for equality pairs).
/// When `fixed` is given, a generic direction must also be nonzero exactly on that set.
/// Throws ZeroDirection when |delta| <= tol_dor.
DorCheck dor_check(const GlmModel& model, const VectorXd& delta, double tol_dor,
                   const std::vector<Index>* fixed = nullptr);

struct DirectionOfRecession {
  VectorXd delta;     // unit vector in R^p
  VectorXd zeta;      // M delta
  VectorXd a_coeffs;  // coordinates of delta in the null basis, unit length
  double f_value = 0.0;
  bool is_dor = false;
  bool is_gdor = false;
};

/// Inner products <v_i, eta_k> of the cone generators with a null basis.
struct ProjectedGenerators {
  MatrixXd inequality;  // one row per bound generator
  MatrixXd equality;    // one row per interior component (the + member of each pair)
  std::vector<Index> inequality_index;
  std::vector<Index> equality_index;
};

/// Projects the generators onto the null basis. Rows whose projection is below
/// `flat_tol` in every coordinate are left out: those components do not move along
/// any null direction and cannot separate candidate directions.
ProjectedGenerators project_generators(const GlmModel& model, const MatrixXd& basis, double flat_tol = 0.0);

/// f(a) = max_i sum_k a_k <v_i, eta_k> over the projected bound generators.
double recession_objective(const ProjectedGenerators& projected, const VectorXd& a);

/// Minimizes f over unit vectors a subject to the equality generators vanishing, and
/// returns delta = basis * a, projected onto the exact null space of the rows of M it
/// leaves unmoved (the projection is kept only when it moves the same rows).
///
/// Throws NoDescentDirection when the minimum is not below -tol_dor.
DirectionOfRecession find_dor(const GlmModel& model, const NullBasis& basis,
                              std::optional<Tolerances> tolerances = std::nullopt);

/// Maximum likelihood fit of the limiting conditional model.
struct LcmFit {
  FitResult fit;                     // on the restricted model; empty when degenerate
  std::optional<GlmModel> restricted;
  std::vector<Index> free_rows;
  std::vector<Index> kept_columns;
  std::vector<Index> dropped_columns;
  VectorXd beta_full;                // fit coefficients embedded in R^p, 0 on dropped columns
  VectorXd fitted_mean;              // length n; equals y on fixed components
  bool degenerate = false;
};

LcmFit refit_lcm(const GlmModel& model, const LcmSupport& support, const FitConfig& config = {});

/// Orthonormal basis of {delta : (M delta)_i = 0 for every free row i}, the constancy
/// space of the limiting conditional model.
MatrixXd constancy_basis(const GlmModel& model, const std::vector<Index>& free_rows);

struct StageTimes {
  double fit = 0.0;
  double null_basis = 0.0;
  double support = 0.0;
  double dor = 0.0;
  double refit = 0.0;
};

struct LcmRound {
  NullBasis basis;                       // in the coordinates of the round's model
  std::vector<Index> rows;               // original indices of the round's rows
  std::vector<Index> columns;            // original indices of the round's columns
  std::vector<Index> fixed;              // original indices fixed in this round
  std::optional<DirectionOfRecession> dor;  // delta and zeta in original coordinates
  std::string dor_error;
};

struct LcmOptions {
  FitConfig fit;
  std::optional<double> epsilon;
  bool find_dor = true;
};

struct LcmResult {
  LcmSupport support;
  LcmFit lcm_fit;
  FitResult initial_fit;
  NullBasis initial_basis;
  std::vector<LcmRound> rounds;
  StageTimes times;

  /// Number of support-determination rounds (at least one).
  int round_count() const { return std::max<int>(1, static_cast<int>(rounds.size())); }
  std::vector<DirectionOfRecession> dors() const;
};

/// Fit, estimate the null space, fix the components it moves, refit on the rest, and
/// repeat until the refit has an empty null space or no component is left free.
/// Throws IterationLimit after more than p rounds.
LcmResult iterate_to_lcm(const GlmModel& model, const LcmOptions& options = {});

}  // namespace lcmfit
