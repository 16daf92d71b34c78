#include "lcmfit/app/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "lcmfit/oracle.hpp"

namespace lcmfit::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* stage_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_symmetric: return "null_basis";
    case ErrorKind::iteration_limit: return "refit";
    case ErrorKind::no_descent_direction:
    case ErrorKind::zero_direction: return "dor";
    default: return "fit";
  }
}

bool close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

void solve_intervals(const GlmModel& model, const PipelineOptions& options, Report& report) {
  const LcmResult& lcm = *report.lcm;
  const std::vector<Index> targets = options.targets ? *options.targets : lcm.support.fixed;
  const CiProblem base = make_ci_problem(model, lcm, options.alpha, MeanTarget{0});

  report.intervals.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    IntervalEntry& e = report.intervals[t];
    e.component = targets[t];
    if (e.component < 0 || e.component >= model.n()) throw InvalidModel("target component out of range");
    e.label = static_cast<std::size_t>(e.component) < report.row_labels.size() ? report.row_labels[e.component]
                                                                                : std::to_string(e.component);
    e.observed = model.y()[e.component];
  }

  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, targets.size())));
  auto work = [&](std::size_t first) {
    for (std::size_t t = first; t < targets.size(); t += workers) {
      IntervalEntry& e = report.intervals[t];
      CiProblem problem = base;
      problem.target = MeanTarget{e.component};
      try {
        e.interval = one_sided_ci(problem);
      } catch (const Error& err) {
        e.error = err.what();
        e.error_kind = err.kind();
      }
    }
  };
  std::vector<std::future<void>> jobs;
  for (unsigned w = 1; w < workers; ++w) jobs.push_back(std::async(std::launch::async, work, w));
  work(0);
  for (auto& j : jobs) j.get();

  for (const auto& e : report.intervals)
    if (!e.error.empty())
      report.errors.push_back({"intervals", e.error_kind, "component " + std::to_string(e.component) + ": " + e.error});
}

void run_oracle_checks(const GlmModel& model, Report& report) {
  using namespace lcmfit::oracle;
  report.oracle_ran = true;
  const LcmResult& lcm = *report.lcm;
  auto add = [&](std::string name, bool passed, std::string detail) {
    report.oracle_checks.push_back({std::move(name), passed, std::move(detail)});
  };

  try {
    const BoundaryStatus status = oracle_boundary_status(model);
    add("boundary_detection", status.on_boundary == (lcm.initial_basis.j > 0),
        "oracle on_boundary=" + std::string(status.on_boundary ? "true" : "false") +
            ", pipeline j=" + std::to_string(lcm.initial_basis.j));
    add("fixed_set", status.fixed == lcm.support.fixed,
        "oracle fixed " + std::to_string(status.fixed.size()) + ", pipeline fixed " +
            std::to_string(lcm.support.fixed.size()));
    if (status.witness) add("witness_direction", oracle_dor_verify(model, *status.witness), "oracle witness verified by enumeration");
  } catch (const TooLarge& e) {
    add("boundary_detection", true, std::string("skipped: ") + e.what());
  }

  for (std::size_t r = 0; r < lcm.rounds.size(); ++r) {
    const auto& dor = lcm.rounds[r].dor;
    if (!dor || !dor->is_dor) continue;
    // Directions found in later rounds are directions of recession of the restricted
    // model; only the first round's is checked against the full model.
    if (r > 0) continue;
    try {
      add("dor_round_" + std::to_string(r), oracle_dor_verify(model, dor->delta), "enumeration of the sample space");
    } catch (const TooLarge& e) {
      add("dor_round_" + std::to_string(r), true, std::string("skipped: ") + e.what());
    }
  }

  if (!report.intervals.empty()) {
    const CiProblem base = make_ci_problem(model, lcm, report.alpha, MeanTarget{0});
    if (base.gamma_basis.cols() > 3) {
      add("interval_grid", true, "skipped: constancy space dimension above 3");
    } else {
      for (const auto& e : report.intervals) {
        if (!e.interval) continue;
        CiProblem problem = base;
        problem.target = MeanTarget{e.component};
        const OneSidedInterval grid = oracle_ci_grid(problem);
        const bool ok = close(grid.lower, e.interval->lower, 1e-4) && close(grid.upper, e.interval->upper, 1e-4);
        std::ostringstream detail;
        detail.precision(10);
        detail << "grid [" << grid.lower << ", " << grid.upper << "] solver [" << e.interval->lower << ", "
               << e.interval->upper << "]";
        add("interval_" + std::to_string(e.component), ok, detail.str());
      }
    }
  }
}

}  // namespace

bool Report::has_error(ErrorKind kind) const {
  return std::any_of(errors.begin(), errors.end(), [&](const StageError& e) { return e.kind == kind; });
}

bool Report::oracle_passed() const {
  return std::all_of(oracle_checks.begin(), oracle_checks.end(), [](const OracleCheck& c) { return c.passed; });
}

Report run_pipeline(const GlmModel& model, const PipelineOptions& options, std::vector<std::string> column_names,
                    std::vector<std::string> row_labels) {
  Report report;
  report.family = model.family().tag;
  report.n = model.n();
  report.p = model.p();
  if (column_names.empty())
    for (Index c = 0; c < model.p(); ++c) column_names.push_back("beta" + std::to_string(c));
  report.column_names = std::move(column_names);
  report.row_labels = std::move(row_labels);
  report.y = model.y();
  report.canonical_statistic = canonical_statistic(model);
  report.alpha = options.alpha;

  try {
    report.lcm = iterate_to_lcm(model, options.lcm);
  } catch (const Error& e) {
    report.errors.push_back({stage_of(e.kind()), e.kind(), e.what()});
    return report;
  }
  report.times = report.lcm->times;
  for (const auto& round : report.lcm->rounds)
    if (!round.dor_error.empty())
      report.errors.push_back({"dor", ErrorKind::no_descent_direction, round.dor_error});

  report.intervals_requested = options.intervals && !report.lcm->support.fixed.empty();
  if (report.intervals_requested) {
    const auto t0 = Clock::now();
    try {
      solve_intervals(model, options, report);
    } catch (const Error& e) {
      report.errors.push_back({"intervals", e.kind(), e.what()});
    }
    report.interval_seconds = seconds_since(t0);
  }

  if (options.verify_oracle) {
    const auto t0 = Clock::now();
    try {
      run_oracle_checks(model, report);
    } catch (const Error& e) {
      report.oracle_checks.push_back({"oracle", false, e.what()});
    }
    report.oracle_seconds = seconds_since(t0);
  }
  return report;
}

}  // namespace lcmfit::app
