#include "lcmfit/app/design.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "lcmfit/errors.hpp"

namespace lcmfit::app {

namespace {

std::optional<double> parse_number(const std::string& text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  if (b == e) return std::nullopt;
  if (text[b] == '+') ++b;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data() + b, text.data() + e, value);
  if (ec != std::errc() || ptr != text.data() + e || !std::isfinite(value)) return std::nullopt;
  return value;
}

double require_number(const CsvTable& table, std::size_t row, std::size_t col) {
  const auto v = parse_number(table.rows[row][col]);
  if (!v)
    throw ParseError("data row " + std::to_string(row + 1) + ", column '" + table.header[col] +
                     "': cannot parse '" + table.rows[row][col] + "' as a number");
  return *v;
}

struct Block {
  std::vector<std::string> names;
  std::vector<VectorXd> columns;
};

// Every subset of {0..count-1} of the given size, in lexicographic order.
void subsets(int count, int size, int start, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == size) {
    out.push_back(current);
    return;
  }
  for (int i = start; i < count; ++i) {
    current.push_back(i);
    subsets(count, size, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (response.empty()) throw ParseError("no response column given");
  if (interaction_order < 1) throw ParseError("interaction order must be at least 1");
  for (std::size_t a = 0; a < predictors.size(); ++a)
    for (std::size_t b = a + 1; b < predictors.size(); ++b)
      if (predictors[a].name == predictors[b].name) throw ParseError("predictor '" + predictors[a].name + "' repeated");
}

std::vector<std::string> sorted_levels(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const bool numeric = std::all_of(values.begin(), values.end(), [](const auto& v) { return parse_number(v).has_value(); });
  if (numeric)
    std::stable_sort(values.begin(), values.end(),
                     [](const auto& a, const auto& b) { return *parse_number(a) < *parse_number(b); });
  return values;
}

Design build_design(const CsvTable& table, const ModelSpec& spec) {
  spec.validate();
  const std::size_t n = table.rows.size();
  if (n == 0) throw ParseError("CSV has no data rows");

  Design design;
  const std::size_t ycol = table.column(spec.response);
  design.response.resize(static_cast<Index>(n));
  for (std::size_t r = 0; r < n; ++r) design.response[static_cast<Index>(r)] = require_number(table, r, ycol);
  if (spec.family == FamilyTag::poisson) {
    if (spec.trials_column) throw ParseError("a trials column applies only to the Bernoulli family");
    design.family = Family::poisson();
  } else if (spec.trials_column) {
    const std::size_t tcol = table.column(*spec.trials_column);
    VectorXd trials(static_cast<Index>(n));
    for (std::size_t r = 0; r < n; ++r) trials[static_cast<Index>(r)] = require_number(table, r, tcol);
    design.family = Family::bernoulli(std::move(trials));
  } else {
    design.family = Family::bernoulli();
  }

  std::vector<Block> blocks;
  design.row_labels.assign(n, "");
  for (const Predictor& pred : spec.predictors) {
    const std::size_t col = table.column(pred.name);
    PredictorKind kind = PredictorKind::numeric;
    if (pred.kind) {
      kind = *pred.kind;
    } else {
      for (std::size_t r = 0; r < n; ++r)
        if (!parse_number(table.rows[r][col])) kind = PredictorKind::categorical;
    }
    Block block;
    if (kind == PredictorKind::numeric) {
      VectorXd v(static_cast<Index>(n));
      for (std::size_t r = 0; r < n; ++r) v[static_cast<Index>(r)] = require_number(table, r, col);
      block.names.push_back(pred.name);
      block.columns.push_back(std::move(v));
    } else {
      std::vector<std::string> cells;
      for (const auto& row : table.rows) cells.push_back(row[col]);
      const auto levels = sorted_levels(cells);
      if (levels.size() < 2) throw ParseError("categorical predictor '" + pred.name + "' has fewer than 2 levels");
      for (std::size_t l = 1; l < levels.size(); ++l) {
        VectorXd v(static_cast<Index>(n));
        for (std::size_t r = 0; r < n; ++r) v[static_cast<Index>(r)] = table.rows[r][col] == levels[l] ? 1.0 : 0.0;
        block.names.push_back(pred.name + levels[l]);
        block.columns.push_back(std::move(v));
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (!design.row_labels[r].empty()) design.row_labels[r] += ",";
      design.row_labels[r] += pred.name + "=" + table.rows[r][col];
    }
    blocks.push_back(std::move(block));
  }

  std::vector<std::string> names{"(Intercept)"};
  std::vector<VectorXd> columns{VectorXd::Ones(static_cast<Index>(n))};
  const int count = static_cast<int>(blocks.size());
  for (int order = 1; order <= std::min(spec.interaction_order, count); ++order) {
    std::vector<std::vector<int>> sets;
    std::vector<int> current;
    subsets(count, order, 0, current, sets);
    for (const auto& set : sets) {
      // Product over the chosen blocks, the first block varying slowest.
      std::vector<std::size_t> idx(set.size(), 0);
      for (;;) {
        std::string name;
        VectorXd v = VectorXd::Ones(static_cast<Index>(n));
        for (std::size_t s = 0; s < set.size(); ++s) {
          const Block& b = blocks[set[s]];
          if (s > 0) name += ":";
          name += b.names[idx[s]];
          v.array() *= b.columns[idx[s]].array();
        }
        names.push_back(std::move(name));
        columns.push_back(std::move(v));
        std::size_t s = set.size();
        while (s > 0) {
          --s;
          if (++idx[s] < blocks[set[s]].names.size()) break;
          idx[s] = 0;
          if (s == 0) {
            s = set.size() + 1;
            break;
          }
        }
        if (s == set.size() + 1) break;
      }
    }
  }

  MatrixXd full(static_cast<Index>(n), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) full.col(static_cast<Index>(c)) = columns[c];
  const auto kept = independent_columns(full, GlmModel::kRankCutoff);
  design.matrix.resize(full.rows(), static_cast<Index>(kept.size()));
  std::vector<bool> keep(columns.size(), false);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    design.matrix.col(static_cast<Index>(k)) = full.col(kept[k]);
    design.column_names.push_back(names[kept[k]]);
    keep[kept[k]] = true;
  }
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (!keep[c]) design.dropped_columns.push_back(names[c]);
  if (inverse_condition(design.matrix) < GlmModel::kRankCutoff)
    throw RankError("model matrix is rank deficient after dropping aliased columns");
  return design;
}

Design ingest_csv(const std::filesystem::path& path, const ModelSpec& spec) {
  return build_design(read_csv(path), spec);
}

}  // namespace lcmfit::app
