#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lcmfit/app/csv.hpp"
#include "lcmfit/expfam.hpp"

namespace lcmfit::app {

enum class PredictorKind { numeric, categorical };

struct Predictor {
  std::string name;
  /// Unset means numeric when every cell parses as a number, categorical otherwise.
  std::optional<PredictorKind> kind;
};

struct ModelSpec {
  std::string response;
  std::vector<Predictor> predictors;
  int interaction_order = 1;  // all products of up to this many predictors
  FamilyTag family = FamilyTag::bernoulli;
  std::optional<std::string> trials_column;

  void validate() const;
};

/// Model matrix with the names of its columns and rows.
struct Design {
  MatrixXd matrix;
  VectorXd response;
  Family family;
  std::vector<std::string> column_names;   // kept columns, in matrix order
  std::vector<std::string> dropped_columns;  // aliased columns removed to restore rank
  std::vector<std::string> row_labels;     // "name=value" pairs of the predictors

  GlmModel model() const { return GlmModel(matrix, response, family); }
};

/// Intercept, then each predictor's block (one column for numeric predictors,
/// treatment-contrast dummies against the first sorted level for categorical ones),
/// then interaction products in graded lexicographic order of predictor subsets, named
/// by joining the factor names with ':'. Columns aliased with earlier ones are dropped.
///
/// Throws ParseError for unknown columns, unparseable numbers or responses, and
/// single-level categoricals; RankError when the expanded matrix is still rank deficient.
Design build_design(const CsvTable& table, const ModelSpec& spec);

Design ingest_csv(const std::filesystem::path& path, const ModelSpec& spec);

/// Sorted distinct levels: numerically when all parse as numbers, else lexicographically.
std::vector<std::string> sorted_levels(std::vector<std::string> values);

}  // namespace lcmfit::app
