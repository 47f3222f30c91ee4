#include "lmlcc/diffkit/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lmlcc::diff {

GradCheckResult grad_check(const std::function<Var<double>()>& f, const std::vector<Var<double>>& leaves,
                           const GradCheckOptions& options) {
  for (const auto& leaf : leaves) {
    leaf->requires_grad = true;
    leaf->zero_grad();
  }
  const Var<double> root = f();
  backward(root);
  std::vector<Tensor<double>> analytic;
  analytic.reserve(leaves.size());
  for (const auto& leaf : leaves) analytic.push_back(leaf->grad);

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  const double h = options.step;
  for (std::size_t t = 0; t < leaves.size(); ++t) {
    auto& value = leaves[t]->value;
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_tensor > 0 && coords.size() > options.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_tensor);
    }
    for (const std::size_t i : coords) {
      const double original = value[i];
      value[i] = original + h;
      const double f_plus = f()->value[0];
      value[i] = original - h;
      const double f_minus = f()->value[0];
      value[i] = original;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[t][i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++result.coords_checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_tensor = t;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace lmlcc::diff
