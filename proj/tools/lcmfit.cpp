// Command-line front end: fit a discrete GLM, find its limiting conditional model and
// report one-sided intervals for the components fixed at their observed values.
//
// Exit codes: 0 success, 2 input or rank error, 3 solver failure, 4 oracle mismatch.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lcmfit/app/design.hpp"
#include "lcmfit/app/pipeline.hpp"
#include "lcmfit/app/report.hpp"
#include "lcmfit/oracle.hpp"

namespace {

using namespace lcmfit;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitOracle = 4;

struct DataOptions {
  std::string data;
  std::string response;
  std::vector<std::string> predictors;
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;
  std::string family = "bernoulli";
  std::string trials;
  int interactions = 1;
};

struct FitOptions {
  double alpha = 0.05;
  std::string epsilon = "auto";
  std::string targets = "boundary-means";
  std::string report;
  std::string plot_data;
  bool verify_oracle = false;
  bool no_intervals = false;
  unsigned workers = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--response", d.response, "Response column")->required();
  cmd->add_option("--predictors", d.predictors, "Predictor columns (space or comma separated)")->delimiter(',');
  cmd->add_option("--categorical", d.categorical, "Predictors to treat as categorical")->delimiter(',');
  cmd->add_option("--numeric", d.numeric, "Predictors to treat as numeric")->delimiter(',');
  cmd->add_option("--family", d.family, "Response family")->check(CLI::IsMember({"bernoulli", "poisson"}));
  cmd->add_option("--trials", d.trials, "Column of Bernoulli trial counts (default all ones)");
  cmd->add_option("--interactions", d.interactions, "Include all interactions up to this order")
      ->check(CLI::PositiveNumber);
}

app::Design load_design(const DataOptions& d) {
  app::ModelSpec spec;
  spec.response = d.response;
  spec.interaction_order = d.interactions;
  spec.family = d.family == "poisson" ? FamilyTag::poisson : FamilyTag::bernoulli;
  if (!d.trials.empty()) spec.trials_column = d.trials;
  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  for (const auto& name : d.predictors) {
    app::Predictor p{name, std::nullopt};
    if (contains(d.categorical, name)) p.kind = app::PredictorKind::categorical;
    if (contains(d.numeric, name)) p.kind = app::PredictorKind::numeric;
    spec.predictors.push_back(std::move(p));
  }
  return app::ingest_csv(d.data, spec);
}

app::PipelineOptions pipeline_options(const FitOptions& f) {
  app::PipelineOptions opts;
  opts.alpha = f.alpha;
  opts.verify_oracle = f.verify_oracle;
  opts.intervals = !f.no_intervals;
  opts.workers = f.workers;
  if (f.epsilon != "auto") {
    std::size_t used = 0;
    double eps = 0.0;
    try {
      eps = std::stod(f.epsilon, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != f.epsilon.size() || !(eps > 0)) throw ParseError("--epsilon must be 'auto' or a positive number");
    opts.lcm.epsilon = eps;
  }
  if (f.targets != "boundary-means") {
    std::vector<Index> list;
    std::stringstream ss(f.targets);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      long long v = -1;
      try {
        v = std::stoll(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || v < 0) throw ParseError("--targets must be 'boundary-means' or comma-separated row indices");
      list.push_back(static_cast<Index>(v));
    }
    opts.targets = std::move(list);
  }
  return opts;
}

int exit_code(const app::Report& report) {
  if (report.oracle_ran && !report.oracle_passed()) return kExitOracle;
  for (const auto& e : report.errors) {
    switch (e.kind) {
      case ErrorKind::no_descent_direction: break;  // recorded; the support is still determined
      case ErrorKind::invalid_model:
      case ErrorKind::rank:
      case ErrorKind::parse:
      case ErrorKind::io:
      case ErrorKind::non_boundary_target: return kExitInput;
      default: return kExitSolver;
    }
  }
  return 0;
}

void print_summary(const app::Report& report, std::ostream& out) {
  out << "family " << to_string(report.family) << ", n = " << report.n << ", p = " << report.p << '\n';
  if (!report.dropped_columns.empty()) out << "dropped aliased columns: " << report.dropped_columns.size() << '\n';
  if (report.lcm) {
    const auto& lcm = *report.lcm;
    out << "log likelihood " << lcm.initial_fit.loglik() << " after " << lcm.initial_fit.iterations
        << " iterations (" << to_string(lcm.initial_fit.stop_reason) << ")\n";
    out << "null space dimension j = " << lcm.initial_basis.j << " (epsilon " << lcm.initial_basis.threshold << ", "
        << to_string(lcm.initial_basis.source) << ")\n";
    out << "fixed components: " << lcm.support.fixed.size() << " of " << report.n
        << (lcm.support.degenerate ? " (completely degenerate)" : "") << ", rounds " << lcm.round_count() << '\n';
  }
  std::size_t solved = 0;
  for (const auto& e : report.intervals) solved += e.interval.has_value();
  if (report.intervals_requested) out << "one-sided intervals: " << solved << " of " << report.intervals.size() << '\n';
  if (report.oracle_ran) {
    for (const auto& c : report.oracle_checks)
      out << "oracle " << c.name << ": " << (c.passed ? "pass" : "FAIL") << " (" << c.detail << ")\n";
  }
  for (const auto& e : report.errors) out << "error [" << e.stage << "] " << to_string(e.kind) << ": " << e.message << '\n';
}

int run_fit(const DataOptions& d, const FitOptions& f, bool summary_only) {
  const app::Design design = load_design(d);
  const GlmModel model = design.model();
  app::Report report = app::run_pipeline(model, pipeline_options(f), design.column_names, design.row_labels);
  report.dropped_columns = design.dropped_columns;

  if (!f.report.empty())
    app::write_report(report, f.report);
  else if (!summary_only)
    std::cout << app::report_to_json(report).dump(2) << '\n';
  if (!f.plot_data.empty()) app::emit_plot_data(report, f.plot_data);
  if (summary_only || !f.report.empty()) print_summary(report, summary_only ? std::cout : std::cerr);
  return exit_code(report);
}

int run_support(const DataOptions& d, int cap, const std::string& output) {
  const app::Design design = load_design(d);
  const GlmModel model = design.model();
  const auto support = oracle::enumerate_support(model, cap > 0 ? std::optional<int>(cap) : std::nullopt);
  const VectorXd observed = canonical_statistic(model);

  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw IoError("cannot write " + output);
  }
  std::ostream& out = output.empty() ? std::cout : file;
  for (std::size_t c = 0; c < design.column_names.size(); ++c) out << (c ? "," : "") << design.column_names[c];
  out << ",observed\n";
  auto row = [&](const VectorXd& t, bool obs) {
    for (Index k = 0; k < t.size(); ++k) out << (k ? "," : "") << nlohmann::json(t[k]).dump();
    out << ',' << (obs ? 1 : 0) << '\n';
  };
  for (const auto& t : support.points) row(t, (t - observed).cwiseAbs().maxCoeff() <= 1e-9 * (1 + observed.norm()));
  std::cerr << support.responses << " responses, " << support.points.size() << " distinct canonical statistics";
  if (support.truncated) std::cerr << " (cells truncated at " << support.cap << ")";
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum likelihood in the completion of discrete exponential family GLMs"};
  app.require_subcommand(1);

  DataOptions data;
  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit, find the limiting conditional model and bound boundary means");
  add_data_options(fit_cmd, data);
  fit_cmd->add_option("--alpha", fit.alpha, "One minus the confidence level")->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--epsilon", fit.epsilon, "Null eigenvalue threshold: 'auto' or a number");
  fit_cmd->add_option("--targets", fit.targets, "'boundary-means' or comma-separated row indices (0-based)");
  fit_cmd->add_option("--report", fit.report, "Write the JSON report here (default: stdout)");
  fit_cmd->add_option("--plot-data", fit.plot_data, "Write interval plot data as CSV");
  fit_cmd->add_flag("--verify-oracle", fit.verify_oracle, "Cross-check against brute-force oracles");
  fit_cmd->add_flag("--no-intervals", fit.no_intervals, "Skip the one-sided intervals");
  fit_cmd->add_option("--workers", fit.workers, "Threads for interval solves (0: all cores)");

  DataOptions vdata;
  FitOptions vfit;
  vfit.verify_oracle = true;
  auto* verify_cmd = app.add_subcommand("verify", "Run the pipeline and the brute-force oracle cross-checks");
  add_data_options(verify_cmd, vdata);
  verify_cmd->add_option("--alpha", vfit.alpha, "One minus the confidence level")->check(CLI::Range(0.0, 1.0));
  verify_cmd->add_option("--epsilon", vfit.epsilon, "Null eigenvalue threshold: 'auto' or a number");
  verify_cmd->add_option("--report", vfit.report, "Also write the JSON report here");

  DataOptions sdata;
  int cap = 0;
  std::string output;
  auto* support_cmd = app.add_subcommand("support", "Enumerate the support of the canonical statistic");
  add_data_options(support_cmd, sdata);
  support_cmd->add_option("--cap", cap, "Poisson truncation per cell (default 10 max(1, max y))");
  support_cmd->add_option("--output", output, "Write the points as CSV here (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit_cmd) return run_fit(data, fit, false);
    if (*verify_cmd) return run_fit(vdata, vfit, true);
    if (*support_cmd) return run_support(sdata, cap, output);
  } catch (const Error& e) {
    std::cerr << "lcmfit: " << to_string(e.kind()) << ": " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::invalid_model:
      case ErrorKind::rank:
      case ErrorKind::parse:
      case ErrorKind::io:
      case ErrorKind::too_large: return kExitInput;
      default: return kExitSolver;
    }
  }
  return 0;
}
