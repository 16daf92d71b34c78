#include "lcmfit/completion.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "lcmfit/nnls.hpp"

namespace lcmfit {

const char* to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::lower_bound: return "lower_bound";
    case GeneratorKind::upper_bound: return "upper_bound";
    case GeneratorKind::equality_pair: return "equality_pair";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

enum class Bound { lower, upper, interior };

Bound bound_of(const GlmModel& model, Index i) {
  const double yi = model.y()[i];
  if (yi == 0) return Bound::lower;
  if (model.family().is_bernoulli() && yi == model.trials(i)) return Bound::upper;
  return Bound::interior;
}

}  // namespace

TangentConeGenerators tangent_cone_generators(const GlmModel& model) {
  TangentConeGenerators out;
  for (Index i = 0; i < model.n(); ++i) {
    const VectorXd row = model.M().row(i).transpose();
    switch (bound_of(model, i)) {
      case Bound::lower: out.rows.push_back({i, row, GeneratorKind::lower_bound}); break;
      case Bound::upper: out.rows.push_back({i, -row, GeneratorKind::upper_bound}); break;
      case Bound::interior:
        out.rows.push_back({i, row, GeneratorKind::equality_pair});
        out.rows.push_back({i, -row, GeneratorKind::equality_pair});
        break;
    }
  }
  return out;
}

Tolerances default_tolerances(const GlmModel& model) {
  const double scale = 1e-6 * (1.0 + model.M().rowwise().norm().maxCoeff());
  return {scale, scale};
}

LcmSupport lcm_support_from_null_basis(const GlmModel& model, const NullBasis& basis,
                                       std::optional<double> tol_support) {
  const double tol = tol_support ? *tol_support : default_tolerances(model).support;
  LcmSupport support;
  if (basis.j == 0) {
    support.free.resize(static_cast<std::size_t>(model.n()));
    std::iota(support.free.begin(), support.free.end(), Index{0});
    return support;
  }
  const MatrixXd moved = model.M() * basis.basis;
  for (Index i = 0; i < model.n(); ++i) {
    if (moved.row(i).cwiseAbs().maxCoeff() > tol)
      support.fixed.push_back(i);
    else
      support.free.push_back(i);
  }
  support.degenerate = support.free.empty();
  return support;
}

DorCheck dor_check(const GlmModel& model, const VectorXd& delta, double tol_dor,
                   const std::vector<Index>* fixed) {
  if (delta.size() != model.p()) throw InvalidModel("direction has wrong length");
  if (delta.norm() <= tol_dor) throw ZeroDirection("direction is numerically zero");
  DorCheck out;
  out.zeta = model.M() * delta;
  out.is_dor = true;
  std::vector<Index> nonzero;
  for (Index i = 0; i < model.n(); ++i) {
    const double z = out.zeta[i];
    switch (bound_of(model, i)) {
      case Bound::lower: out.is_dor = out.is_dor && z <= tol_dor; break;
      case Bound::upper: out.is_dor = out.is_dor && -z <= tol_dor; break;
      case Bound::interior: out.is_dor = out.is_dor && std::abs(z) <= tol_dor; break;
    }
    if (std::abs(z) > tol_dor) nonzero.push_back(i);
  }
  out.is_gdor = out.is_dor && !nonzero.empty() && (fixed == nullptr || nonzero == *fixed);
  return out;
}

ProjectedGenerators project_generators(const GlmModel& model, const MatrixXd& basis, double flat_tol) {
  const MatrixXd moved = model.M() * basis;
  std::vector<Index> ineq;
  std::vector<double> signs;
  std::vector<Index> eq;
  for (Index i = 0; i < model.n(); ++i) {
    if (moved.cols() > 0 && moved.row(i).cwiseAbs().maxCoeff() <= flat_tol) continue;
    switch (bound_of(model, i)) {
      case Bound::lower: ineq.push_back(i); signs.push_back(1.0); break;
      case Bound::upper: ineq.push_back(i); signs.push_back(-1.0); break;
      case Bound::interior: eq.push_back(i); break;
    }
  }
  ProjectedGenerators out;
  out.inequality.resize(static_cast<Index>(ineq.size()), basis.cols());
  for (std::size_t r = 0; r < ineq.size(); ++r)
    out.inequality.row(static_cast<Index>(r)) = signs[r] * moved.row(ineq[r]);
  out.equality.resize(static_cast<Index>(eq.size()), basis.cols());
  for (std::size_t r = 0; r < eq.size(); ++r) out.equality.row(static_cast<Index>(r)) = moved.row(eq[r]);
  out.inequality_index = std::move(ineq);
  out.equality_index = std::move(eq);
  return out;
}

double recession_objective(const ProjectedGenerators& projected, const VectorXd& a) {
  if (projected.inequality.rows() == 0) return -std::numeric_limits<double>::infinity();
  return (projected.inequality * a).maxCoeff();
}

DirectionOfRecession find_dor(const GlmModel& model, const NullBasis& basis, std::optional<Tolerances> tolerances) {
  if (basis.j == 0) throw NoDescentDirection("null basis is empty; the MLE exists in the conventional sense");
  const Tolerances tol = tolerances ? *tolerances : default_tolerances(model);
  const LcmSupport support = lcm_support_from_null_basis(model, basis, tol.support);
  const ProjectedGenerators proj = project_generators(model, basis.basis, tol.support);
  if (proj.inequality.rows() == 0)
    throw NoDescentDirection("no bound generator moves along the null basis");

  // Directions allowed by the equality generators: the null space of their projections.
  MatrixXd allowed = MatrixXd::Identity(basis.j, basis.j);
  if (proj.equality.rows() > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(proj.equality, Eigen::ComputeFullV);
    Index rank = 0;
    for (Index k = 0; k < svd.singularValues().size(); ++k)
      if (svd.singularValues()[k] > tol.support) ++rank;
    allowed = svd.matrixV().rightCols(basis.j - rank);
    if (allowed.cols() == 0)
      throw NoDescentDirection("equality generators admit no nonzero direction; the null basis looks spurious");
  }

  // min over |b| = 1 of max_i g_i^T b equals -1/|x| for the least-norm x with
  // g_i^T x <= -1 for all i, attained at b = x / |x|.
  const MatrixXd g = proj.inequality * allowed;
  const auto x = least_distance(-g, VectorXd::Ones(g.rows()));
  if (!x) throw NoDescentDirection("no direction makes every bound generator strictly negative");

  DirectionOfRecession dor;
  dor.a_coeffs = allowed * (*x);
  dor.a_coeffs.normalize();
  dor.f_value = recession_objective(proj, dor.a_coeffs);
  if (!(dor.f_value < -tol.dor))
    throw NoDescentDirection("minimum of the recession objective is not below -tol_dor");
  dor.delta = basis.basis * dor.a_coeffs;

  // The estimated null basis is only accurate to the eigenvector error, so rows the
  // direction leaves unmoved get |zeta_i| of that size. Projecting onto the exact null
  // space of those rows makes their zeta vanish to rounding.
  {
    const VectorXd zeta = model.M() * dor.delta;
    std::vector<Index> flat;
    for (Index i = 0; i < model.n(); ++i)
      if (std::abs(zeta[i]) <= tol.dor) flat.push_back(i);
    if (!flat.empty()) {
      const MatrixXd exact = constancy_basis(model, flat);
      VectorXd snapped = exact * (exact.transpose() * dor.delta);
      if (snapped.norm() > 0.5) {
        snapped.normalize();
        const DorCheck snapped_check = dor_check(model, snapped, tol.dor);
        bool same_set = snapped_check.is_dor;
        for (Index i = 0; i < model.n() && same_set; ++i)
          same_set = (std::abs(snapped_check.zeta[i]) > tol.dor) == (std::abs(zeta[i]) > tol.dor);
        if (same_set) dor.delta = snapped;
      }
    }
  }

  const DorCheck check = dor_check(model, dor.delta, tol.dor, &support.fixed);
  dor.zeta = check.zeta;
  dor.is_dor = check.is_dor;
  dor.is_gdor = check.is_gdor;
  return dor;
}

MatrixXd constancy_basis(const GlmModel& model, const std::vector<Index>& free_rows) {
  const Index p = model.p();
  if (free_rows.empty()) return MatrixXd::Identity(p, p);
  MatrixXd free_t(p, static_cast<Index>(free_rows.size()));
  for (std::size_t r = 0; r < free_rows.size(); ++r) free_t.col(static_cast<Index>(r)) = model.M().row(free_rows[r]).transpose();
  Eigen::ColPivHouseholderQR<MatrixXd> qr(free_t);
  qr.setThreshold(1e-8);
  const Index rank = qr.rank();
  const MatrixXd q = qr.householderQ();
  return q.rightCols(p - rank);
}

namespace {

LcmFit assemble_lcm_fit(const GlmModel& model, FitResult fit, std::optional<GlmModel> restricted,
                        std::vector<Index> free_rows, std::vector<Index> kept) {
  LcmFit out;
  out.free_rows = std::move(free_rows);
  out.kept_columns = std::move(kept);
  for (Index c = 0, k = 0; c < model.p(); ++c) {
    if (k < static_cast<Index>(out.kept_columns.size()) && out.kept_columns[k] == c)
      ++k;
    else
      out.dropped_columns.push_back(c);
  }
  out.beta_full = VectorXd::Zero(model.p());
  out.fitted_mean = model.y();
  if (restricted) {
    for (std::size_t k = 0; k < out.kept_columns.size(); ++k)
      out.beta_full[out.kept_columns[k]] = fit.beta_hat[static_cast<Index>(k)];
    const VectorXd mu = mean_value(*restricted, CanonicalPoint(*restricted, fit.beta_hat));
    for (std::size_t r = 0; r < out.free_rows.size(); ++r) out.fitted_mean[out.free_rows[r]] = mu[static_cast<Index>(r)];
  } else {
    out.degenerate = true;
  }
  out.fit = std::move(fit);
  out.restricted = std::move(restricted);
  return out;
}

std::vector<Index> columns_of_rows(const GlmModel& model, const std::vector<Index>& rows) {
  MatrixXd sub(static_cast<Index>(rows.size()), model.p());
  for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Index>(r)) = model.M().row(rows[r]);
  return independent_columns(sub, 1e-8);
}

}  // namespace

LcmFit refit_lcm(const GlmModel& model, const LcmSupport& support, const FitConfig& config) {
  if (support.free.empty()) return assemble_lcm_fit(model, FitResult{}, std::nullopt, {}, {});
  std::vector<Index> kept = columns_of_rows(model, support.free);
  GlmModel restricted = model.restrict(support.free, kept);
  FitResult fit = fit_mle(restricted, config);
  return assemble_lcm_fit(model, std::move(fit), std::move(restricted), support.free, std::move(kept));
}

std::vector<DirectionOfRecession> LcmResult::dors() const {
  std::vector<DirectionOfRecession> out;
  for (const auto& r : rounds)
    if (r.dor) out.push_back(*r.dor);
  return out;
}

LcmResult iterate_to_lcm(const GlmModel& model, const LcmOptions& options) {
  LcmResult result;
  std::vector<Index> rows(static_cast<std::size_t>(model.n()));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::vector<Index> cols(static_cast<std::size_t>(model.p()));
  std::iota(cols.begin(), cols.end(), Index{0});

  auto t0 = Clock::now();
  GlmModel current = model;
  FitResult fit = fit_mle(current, options.fit);
  result.times.fit += seconds_since(t0);
  result.initial_fit = fit;

  std::vector<Index> fixed_all;
  bool first = true;
  for (;;) {
    t0 = Clock::now();
    NullBasisOptions nb_options{options.epsilon, fit.reference_scale};
    NullBasis nb = null_basis(fit.fisher, nb_options);
    result.times.null_basis += seconds_since(t0);
    if (first) {
      result.initial_basis = nb;
      first = false;
    }
    if (nb.j == 0) break;
    if (static_cast<Index>(result.rounds.size()) >= model.p())
      throw IterationLimit("more than p rounds of limiting conditional model refitting");

    LcmRound round;
    round.rows = rows;
    round.columns = cols;
    t0 = Clock::now();
    const LcmSupport local = lcm_support_from_null_basis(current, nb);
    result.times.support += seconds_since(t0);

    if (options.find_dor) {
      t0 = Clock::now();
      try {
        DirectionOfRecession dor = find_dor(current, nb);
        VectorXd delta = VectorXd::Zero(model.p());
        for (std::size_t c = 0; c < cols.size(); ++c) delta[cols[c]] = dor.delta[static_cast<Index>(c)];
        VectorXd zeta = VectorXd::Zero(model.n());
        for (std::size_t r = 0; r < rows.size(); ++r) zeta[rows[r]] = dor.zeta[static_cast<Index>(r)];
        dor.delta = std::move(delta);
        dor.zeta = std::move(zeta);
        round.dor = std::move(dor);
      } catch (const NoDescentDirection& e) {
        round.dor_error = e.what();
      }
      result.times.dor += seconds_since(t0);
    }

    for (Index i : local.fixed) round.fixed.push_back(rows[i]);
    round.basis = std::move(nb);
    const bool no_progress = local.fixed.empty();
    result.rounds.push_back(std::move(round));
    if (no_progress) break;
    fixed_all.insert(fixed_all.end(), result.rounds.back().fixed.begin(), result.rounds.back().fixed.end());
    if (local.free.empty()) {
      rows.clear();
      break;
    }

    t0 = Clock::now();
    std::vector<Index> next_rows;
    for (Index i : local.free) next_rows.push_back(rows[i]);
    const std::vector<Index> local_cols = columns_of_rows(current, local.free);
    std::vector<Index> next_cols;
    for (Index c : local_cols) next_cols.push_back(cols[c]);
    current = current.restrict(local.free, local_cols);
    rows = std::move(next_rows);
    cols = std::move(next_cols);
    fit = fit_mle(current, options.fit);
    result.times.refit += seconds_since(t0);
  }

  std::sort(fixed_all.begin(), fixed_all.end());
  result.support.fixed = fixed_all;
  std::vector<bool> is_fixed(static_cast<std::size_t>(model.n()), false);
  for (Index i : fixed_all) is_fixed[i] = true;
  for (Index i = 0; i < model.n(); ++i)
    if (!is_fixed[i]) result.support.free.push_back(i);
  result.support.degenerate = result.support.free.empty();
  result.support.iterations = static_cast<int>(result.rounds.size());

  if (result.support.degenerate) {
    result.lcm_fit = assemble_lcm_fit(model, FitResult{}, std::nullopt, {}, {});
  } else {
    result.lcm_fit = assemble_lcm_fit(model, std::move(fit), std::move(current), result.support.free, cols);
  }
  return result;
}

}  // namespace lcmfit
