#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcmfit/completion.hpp"
#include "lcmfit/inference.hpp"

namespace lcmfit::app {

struct PipelineOptions {
  LcmOptions lcm;
  double alpha = 0.05;
  bool intervals = true;
  /// Components to bound; unset means every fixed component.
  std::optional<std::vector<Index>> targets;
  /// Cross-check against the brute-force oracles where the model is small enough.
  bool verify_oracle = false;
  /// Worker threads for interval solves; 0 means one per hardware thread.
  unsigned workers = 0;
};

struct IntervalEntry {
  Index component = 0;
  std::string label;
  double observed = 0.0;
  std::optional<OneSidedInterval> interval;
  std::string error;
  ErrorKind error_kind = ErrorKind::solver_failure;
};

struct StageError {
  std::string stage;  // fit, null_basis, support, dor, refit, intervals, oracle
  ErrorKind kind = ErrorKind::solver_failure;
  std::string message;
};

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Everything the pipeline computed, plus the names needed to report it.
struct Report {
  FamilyTag family = FamilyTag::bernoulli;
  Index n = 0;
  Index p = 0;
  std::vector<std::string> column_names;
  std::vector<std::string> dropped_columns;
  std::vector<std::string> row_labels;
  VectorXd y;
  VectorXd canonical_statistic;

  std::optional<LcmResult> lcm;
  double alpha = 0.05;
  bool intervals_requested = false;
  std::vector<IntervalEntry> intervals;
  std::vector<OracleCheck> oracle_checks;
  bool oracle_ran = false;
  std::vector<StageError> errors;
  StageTimes times;
  double interval_seconds = 0.0;
  double oracle_seconds = 0.0;

  bool has_error(ErrorKind kind) const;
  bool oracle_passed() const;
};

/// Fit, null space, support, direction of recession, iterated refit, then one-sided
/// intervals for the selected fixed components. Stage failures are recorded in
/// Report::errors rather than thrown.
Report run_pipeline(const GlmModel& model, const PipelineOptions& options,
                    std::vector<std::string> column_names = {}, std::vector<std::string> row_labels = {});

}  // namespace lcmfit::app
