#include <algorithm>
#include <cmath>

#include "lcmfit/oracle.hpp"

namespace lcmfit::oracle {

namespace {

// Upper end of the range of cell i in the enumeration.
std::vector<int> cell_limits(const GlmModel& model, int cap) {
  std::vector<int> limits(static_cast<std::size_t>(model.n()));
  for (Index i = 0; i < model.n(); ++i)
    limits[i] = model.family().is_bernoulli() ? static_cast<int>(model.trials(i)) : cap;
  return limits;
}

long long count_responses(const std::vector<int>& limits) {
  long long total = 1;
  for (int l : limits) {
    total *= static_cast<long long>(l) + 1;
    if (total > kMaxEnumeration) return kMaxEnumeration + 1;
  }
  return total;
}

// Odometer over the product of {0..limits[i]}; calls visit(y') for each response.
template <class Visit>
void for_each_response(const std::vector<int>& limits, Visit&& visit) {
  std::vector<int> y(limits.size(), 0);
  for (;;) {
    visit(y);
    std::size_t i = 0;
    while (i < y.size() && y[i] == limits[i]) y[i++] = 0;
    if (i == y.size()) return;
    ++y[i];
  }
}

std::vector<double> zeta_of(const GlmModel& model, const VectorXd& delta) {
  std::vector<double> zeta(static_cast<std::size_t>(model.n()), 0.0);
  for (Index i = 0; i < model.n(); ++i)
    for (Index k = 0; k < model.p(); ++k) zeta[i] += model.M()(i, k) * delta[k];
  return zeta;
}

}  // namespace

int default_cap(const GlmModel& model) {
  double largest = 1.0;
  for (Index i = 0; i < model.n(); ++i) largest = std::max(largest, model.y()[i]);
  return static_cast<int>(10.0 * largest);
}

SupportEnumeration enumerate_support(const GlmModel& model, std::optional<int> cap) {
  SupportEnumeration out;
  out.cap = model.family().is_poisson() ? cap.value_or(default_cap(model)) : 0;
  out.truncated = model.family().is_poisson();
  const auto limits = cell_limits(model, out.cap);
  if (count_responses(limits) > kMaxEnumeration) throw TooLarge("sample space too large to enumerate");

  const Index p = model.p();
  std::vector<std::vector<double>> stats;
  for_each_response(limits, [&](const std::vector<int>& y) {
    std::vector<double> t(static_cast<std::size_t>(p), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] != 0)
        for (Index k = 0; k < p; ++k) t[k] += y[i] * model.M()(static_cast<Index>(i), k);
    stats.push_back(std::move(t));
    ++out.responses;
  });
  std::sort(stats.begin(), stats.end());
  stats.erase(std::unique(stats.begin(), stats.end(),
                          [](const auto& a, const auto& b) {
                            for (std::size_t k = 0; k < a.size(); ++k)
                              if (std::abs(a[k] - b[k]) > 1e-9 * (1.0 + std::abs(a[k]))) return false;
                            return true;
                          }),
              stats.end());
  for (const auto& t : stats) out.points.push_back(Eigen::Map<const VectorXd>(t.data(), p));
  return out;
}

bool oracle_dor_verify(const GlmModel& model, const VectorXd& delta, std::optional<int> cap, double tol) {
  if (delta.size() != model.p()) throw InvalidModel("direction has wrong length");
  const auto zeta = zeta_of(model, delta);
  const int box = model.family().is_poisson() ? cap.value_or(default_cap(model)) : 0;
  const auto limits = cell_limits(model, box);

  if (count_responses(limits) <= kMaxEnumeration) {
    double observed = 0.0;
    for (Index i = 0; i < model.n(); ++i) observed += model.y()[i] * zeta[i];
    bool ok = true;
    for_each_response(limits, [&](const std::vector<int>& y) {
      if (!ok) return;
      double value = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) value += y[i] * zeta[i];
      if (value - observed > tol) ok = false;
    });
    return ok;
  }
  if (model.family().is_bernoulli()) throw TooLarge("Bernoulli sample space too large to enumerate");

  // Separable maximum of sum_i (y'_i - y_i) zeta_i over the box.
  double worst = 0.0;
  for (Index i = 0; i < model.n(); ++i) {
    const double yi = model.y()[i];
    worst += std::max((box - yi) * zeta[i], -yi * zeta[i]);
  }
  return worst <= tol;
}

}  // namespace lcmfit::oracle
