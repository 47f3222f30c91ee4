#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lmlcc/diffkit/graph.hpp"

namespace lmlcc::diff {

struct GradCheckOptions {
  double step = 1e-4;
  /// Coordinates probed per tensor; 0 probes every coordinate.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// Compares backprop gradients of the scalar `f()` with respect to `leaves`
/// against central differences (f(x+h) - f(x-h)) / 2h. Relative error uses
/// the denominator max(|a|, |b|, 1e-8). `f` must rebuild its graph from the
/// current leaf values on every call and be deterministic.
GradCheckResult grad_check(const std::function<Var<double>()>& f, const std::vector<Var<double>>& leaves,
                           const GradCheckOptions& options = {});

}  // namespace lmlcc::diff
