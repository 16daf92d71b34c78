#include "fixtures.hpp"

#include <algorithm>

namespace lcmfit::testing {

GlmModel separation_model() {
  const double x[] = {10, 20, 30, 40, 60, 70, 80, 90};
  MatrixXd m(8, 2);
  VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    m(i, 0) = 1.0;
    m(i, 1) = x[i];
    y[i] = i < 4 ? 0.0 : 1.0;
  }
  return GlmModel(m, y, Family::bernoulli());
}

app::CsvTable factorial_table(int factors, int levels, const std::vector<double>& counts) {
  app::CsvTable table;
  for (int k = 1; k <= factors; ++k) table.header.push_back("v" + std::to_string(k));
  table.header.push_back("y");
  int cells = 1;
  for (int k = 0; k < factors; ++k) cells *= levels;
  for (int i = 0; i < cells; ++i) {
    std::vector<std::string> row;
    int rest = i;
    for (int k = 0; k < factors; ++k) {
      row.push_back(std::to_string(rest % levels));
      rest /= levels;
    }
    row.push_back(std::to_string(static_cast<long long>(counts.at(static_cast<std::size_t>(i)))));
    table.rows.push_back(std::move(row));
  }
  return table;
}

app::Design factorial_design(int factors, int levels, int order, const std::vector<double>& counts) {
  app::ModelSpec spec;
  spec.response = "y";
  spec.family = FamilyTag::poisson;
  spec.interaction_order = order;
  const auto kind = levels > 2 ? app::PredictorKind::categorical : app::PredictorKind::numeric;
  for (int k = 1; k <= factors; ++k) spec.predictors.push_back({"v" + std::to_string(k), kind});
  return app::build_design(factorial_table(factors, levels, counts), spec);
}

GlmModel random_separated_bernoulli(std::mt19937_64& rng, Index n, Index p) {
  std::uniform_int_distribution<int> cov(-3, 3);
  std::uniform_int_distribution<int> coef(-2, 2);
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    MatrixXd m(n, p);
    for (Index i = 0; i < n; ++i) {
      m(i, 0) = 1.0;
      for (Index k = 1; k < p; ++k) m(i, k) = cov(rng);
    }
    VectorXd d(p);
    for (Index k = 0; k < p; ++k) d[k] = coef(rng);
    if (d.tail(p - 1).cwiseAbs().maxCoeff() == 0) continue;
    const VectorXd eta = m * d;
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) y[i] = eta[i] > 0 ? 1.0 : eta[i] < 0 ? 0.0 : (coin(rng) ? 1.0 : 0.0);
    if (eta.cwiseAbs().maxCoeff() == 0) continue;
    if (inverse_condition(m) < 1e-6) continue;
    return GlmModel(m, y, Family::bernoulli());
  }
}

namespace {

std::vector<double> positive_counts(std::mt19937_64& rng, int cells) {
  std::uniform_int_distribution<int> count(1, 9);
  std::vector<double> y(static_cast<std::size_t>(cells));
  for (double& v : y) v = count(rng);
  return y;
}

// Digit k (base `levels`) of cell index i.
int digit(int i, int k, int levels) {
  for (int s = 0; s < k; ++s) i /= levels;
  return i % levels;
}

}  // namespace

EngineeredTable random_face_table(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_order(2, 3);
  std::bernoulli_distribution coin(0.5);
  const int order = pick_order(rng);
  std::vector<int> vars{0, 1, 2, 3};
  std::shuffle(vars.begin(), vars.end(), rng);
  vars.resize(static_cast<std::size_t>(order));
  std::vector<int> values;
  for (int k = 0; k < order; ++k) values.push_back(coin(rng) ? 1 : 0);

  auto y = positive_counts(rng, 16);
  EngineeredTable out;
  for (int i = 0; i < 16; ++i) {
    bool in_face = true;
    for (int k = 0; k < order; ++k) in_face = in_face && digit(i, vars[k], 2) == values[k];
    if (in_face) {
      y[i] = 0.0;
      out.face.push_back(i);
    }
  }
  out.design = factorial_design(4, 2, order, y);
  return out;
}

EngineeredTable seven_factor_face_table(std::mt19937_64& rng) {
  auto y = positive_counts(rng, 128);
  EngineeredTable out;
  for (int i = 0; i < 128; ++i)
    if (digit(i, 0, 2) == 1 && digit(i, 1, 2) == 1 && digit(i, 2, 2) == 1) {
      y[i] = 0.0;
      out.face.push_back(i);
    }
  out.design = factorial_design(7, 2, 3, y);
  return out;
}

EngineeredTable five_factor_table(std::mt19937_64& rng) {
  std::poisson_distribution<int> count(2.0);
  std::vector<double> y(1024);
  for (double& v : y) v = count(rng);
  EngineeredTable out;
  for (int i = 0; i < 1024; ++i)
    if (digit(i, 0, 4) == 0 && digit(i, 1, 4) == 0 && digit(i, 2, 4) == 0 && digit(i, 3, 4) == 0) {
      y[i] = 0.0;
      out.face.push_back(i);
    }
  out.design = factorial_design(5, 4, 4, y);
  return out;
}

}  // namespace lcmfit::testing
