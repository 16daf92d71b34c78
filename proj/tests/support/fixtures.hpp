#pragma once

#include <random>
#include <string>
#include <vector>

#include "lcmfit/app/design.hpp"
#include "lcmfit/expfam.hpp"

namespace lcmfit::testing {

/// x = 10, 20, 30, 40, 60, 70, 80, 90 with y = 0 below 50 and 1 above: complete
/// separation, intercept and slope.
GlmModel separation_model();

/// Full factorial table over `factors` variables named v1, v2, ... each taking
/// 0..levels-1, with the given counts (row i of the table has factor k equal to
/// digit k of i in base `levels`, v1 least significant).
app::CsvTable factorial_table(int factors, int levels, const std::vector<double>& counts);

/// Poisson model of a full factorial table with all interactions up to `order`.
/// Categorical factors when levels > 2, 0/1 numeric otherwise.
app::Design factorial_design(int factors, int levels, int order, const std::vector<double>& counts);

/// Bernoulli data whose canonical statistic is on the boundary: y_i = 1{(M d)_i > 0}
/// for a random integer d, with a coin flip where (M d)_i = 0. Intercept plus p-1
/// integer covariates in [-3, 3].
GlmModel random_separated_bernoulli(std::mt19937_64& rng, Index n, Index p);

/// Poisson 2^4 table with counts in 1..9 except one zeroed face: the cells where two
/// (order 2) or three (order 3) chosen factors take chosen values. The model holds all
/// interactions up to that order, so the face is a boundary face.
struct EngineeredTable {
  app::Design design;
  std::vector<Index> face;  // zeroed cells, sorted
};
EngineeredTable random_face_table(std::mt19937_64& rng);

/// The 2^7 table with all three-way interactions and the 16 cells with v1 = v2 = v3 = 1
/// set to zero; counts elsewhere in 1..9.
EngineeredTable seven_factor_face_table(std::mt19937_64& rng);

/// 4^5 table, all four-way interactions, Poisson counts of mean 2 with the 4 cells
/// v1 = v2 = v3 = v4 = 0 forced to zero.
EngineeredTable five_factor_table(std::mt19937_64& rng);

}  // namespace lcmfit::testing
