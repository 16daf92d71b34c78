#include "lcmfit/app/report.hpp"

#include <cmath>
#include <fstream>

#include "lcmfit/errors.hpp"

namespace lcmfit::app {

namespace {

using nlohmann::json;

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json vector_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json index_json(const std::vector<Index>& v) {
  json out = json::array();
  for (Index i : v) out.push_back(i);
  return out;
}

// Columns of a matrix as a list of vectors.
json columns_json(const MatrixXd& m) {
  json out = json::array();
  for (Index c = 0; c < m.cols(); ++c) out.push_back(vector_json(m.col(c)));
  return out;
}

json dor_json(const DirectionOfRecession& d) {
  return {{"delta", vector_json(d.delta)}, {"zeta", vector_json(d.zeta)}, {"a_coeffs", vector_json(d.a_coeffs)},
          {"f_value", number(d.f_value)}, {"is_dor", d.is_dor},           {"is_gdor", d.is_gdor}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  return json(v).dump();
}

}  // namespace

json report_to_json(const Report& r) {
  json out;
  out["schema_version"] = 1;
  out["model"] = {{"family", to_string(r.family)},
                  {"n", r.n},
                  {"p", r.p},
                  {"columns", r.column_names},
                  {"dropped_columns", r.dropped_columns},
                  {"canonical_statistic", vector_json(r.canonical_statistic)}};

  out["fit"] = nullptr;
  out["degeneracy"] = nullptr;
  out["lcm"] = nullptr;
  out["dor"] = nullptr;
  if (r.lcm) {
    const LcmResult& lcm = *r.lcm;
    const FitResult& fit0 = lcm.initial_fit;
    json coefficients = json::array();
    if (!lcm.lcm_fit.degenerate)
      for (std::size_t k = 0; k < lcm.lcm_fit.kept_columns.size(); ++k) {
        const Index c = lcm.lcm_fit.kept_columns[k];
        coefficients.push_back({{"name", r.column_names.at(static_cast<std::size_t>(c))},
                                {"index", c},
                                {"estimate", number(lcm.lcm_fit.beta_full[c])}});
      }
    json dropped = json::array();
    for (Index c : lcm.lcm_fit.dropped_columns) dropped.push_back(r.column_names.at(static_cast<std::size_t>(c)));
    out["fit"] = {{"log_likelihood", number(fit0.loglik())},
                  {"iterations", fit0.iterations},
                  {"stop_reason", to_string(fit0.stop_reason)},
                  {"grad_norm", number(fit0.grad_norm)},
                  {"converged_interior", fit0.converged_interior},
                  {"beta_initial", vector_json(fit0.beta_hat)},
                  {"lcm_coefficients", coefficients},
                  {"lcm_dropped_columns", dropped},
                  {"lcm_log_likelihood", lcm.lcm_fit.degenerate ? json(0.0) : number(lcm.lcm_fit.fit.loglik())},
                  {"lcm_iterations", lcm.lcm_fit.fit.iterations}};

    const NullBasis& nb = lcm.initial_basis;
    out["degeneracy"] = {{"j", nb.j},
                         {"eigenvalues", vector_json(nb.eigenvalues)},
                         {"epsilon", number(nb.threshold)},
                         {"epsilon_source", to_string(nb.source)},
                         {"reference_scale", number(fit0.reference_scale)},
                         {"null_basis", columns_json(nb.basis)}};

    json rounds = json::array();
    for (const auto& round : lcm.rounds) {
      json entry = {{"j", round.basis.j},
                    {"epsilon", number(round.basis.threshold)},
                    {"epsilon_source", to_string(round.basis.source)},
                    {"fixed", index_json(round.fixed)},
                    {"dor", round.dor ? dor_json(*round.dor) : json(nullptr)}};
      if (!round.dor_error.empty()) entry["dor_error"] = round.dor_error;
      rounds.push_back(std::move(entry));
    }
    out["lcm"] = {{"fixed", index_json(lcm.support.fixed)},
                  {"free", index_json(lcm.support.free)},
                  {"degenerate", lcm.support.degenerate},
                  {"iterations", lcm.round_count()},
                  {"fitted_mean", vector_json(lcm.lcm_fit.fitted_mean)},
                  {"rounds", rounds}};
    if (!lcm.rounds.empty() && lcm.rounds.front().dor) out["dor"] = dor_json(*lcm.rounds.front().dor);
  }

  out["intervals"] = nullptr;
  if (r.intervals_requested) {
    json targets = json::array();
    for (const auto& e : r.intervals) {
      json t = {{"component", e.component}, {"label", e.label}, {"observed", number(e.observed)}};
      if (e.interval) {
        t["target_id"] = e.interval->target_id;
        t["lower"] = number(e.interval->lower);
        t["upper"] = number(e.interval->upper);
        t["alpha"] = e.interval->alpha;
        t["achieved_constraint"] = number(e.interval->achieved_constraint);
        t["solver_status"] = e.interval->solver_status;
      } else {
        t["target_id"] = "mu[" + std::to_string(e.component) + "]";
        t["lower"] = nullptr;
        t["upper"] = nullptr;
        t["alpha"] = r.alpha;
        t["achieved_constraint"] = nullptr;
        t["solver_status"] = std::string(to_string(e.error_kind)) + ": " + e.error;
      }
      targets.push_back(std::move(t));
    }
    out["intervals"] = {{"alpha", r.alpha},
                        {"scale", r.family == FamilyTag::bernoulli ? "probability" : "mean"},
                        {"targets", targets}};
  }

  out["oracle"] = nullptr;
  if (r.oracle_ran) {
    json checks = json::array();
    for (const auto& c : r.oracle_checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    out["oracle"] = {{"passed", r.oracle_passed()}, {"checks", checks}};
  }

  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"stage", e.stage}, {"kind", to_string(e.kind)}, {"message", e.message}});
  out["errors"] = errors;

  const double total = r.times.fit + r.times.null_basis + r.times.support + r.times.dor + r.times.refit +
                       r.interval_seconds + r.oracle_seconds;
  out["timing"] = {{"fit", r.times.fit},           {"null_basis", r.times.null_basis},
                   {"support", r.times.support},   {"dor", r.times.dor},
                   {"refit", r.times.refit},       {"intervals", r.interval_seconds},
                   {"oracle", r.oracle_seconds},   {"total", total}};
  return out;
}

void write_report(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void emit_plot_data(const Report& report, std::ostream& out) {
  out << "target_id,x_label,observed,lower,upper,alpha\n";
  for (const auto& e : report.intervals) {
    if (!e.interval) continue;
    out << csv_field(e.interval->target_id) << ',' << csv_field(e.label) << ',' << csv_number(e.observed) << ','
        << csv_number(e.interval->lower) << ',' << csv_number(e.interval->upper) << ','
        << csv_number(e.interval->alpha) << '\n';
  }
}

void emit_plot_data(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  emit_plot_data(report, out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lcmfit::app
