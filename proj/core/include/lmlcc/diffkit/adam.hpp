#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lmlcc/diffkit/graph.hpp"

namespace lmlcc::diff {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one parameter tensor.
template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update of `param` in place.
template <typename T>
void adam_step(AdamState<T>& state, const AdamHyper& hyper, std::span<T> param, std::span<const T> grad);

template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
};

/// Adam over a fixed list of parameter leaves.
template <typename T>
class Adam {
 public:
  Adam(std::vector<NamedParam<T>> params, AdamHyper hyper);

  void zero_grad();
  void step();

  double lr() const { return hyper_.lr; }
  void set_lr(double lr) { hyper_.lr = lr; }
  const AdamHyper& hyper() const { return hyper_; }
  std::uint64_t steps() const { return states_.empty() ? 0 : states_.front().t; }

  /// Multiplier applied to the learning rate of the named parameter.
  /// Throws ValidationError when no parameter has that name.
  void set_lr_scale(const std::string& name, double scale);
  double lr_scale(std::size_t index) const { return lr_scale_.at(index); }

  const std::vector<NamedParam<T>>& params() const { return params_; }
  std::vector<AdamState<T>>& states() { return states_; }
  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  std::vector<NamedParam<T>> params_;
  std::vector<AdamState<T>> states_;
  std::vector<double> lr_scale_;
  AdamHyper hyper_;
};

/// Multiplies the learning rate by `factor` after `patience` consecutive
/// observations without improvement, never going below `floor`.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, double factor = 0.5, int patience = 10, double floor = 1e-6);

  /// Records one epoch's monitored loss and returns the learning rate to use next.
  double observe(double metric);
  double lr() const { return lr_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double floor_;
  double best_;
  int wait_ = 0;
};

extern template void adam_step(AdamState<float>&, const AdamHyper&, std::span<float>, std::span<const float>);
extern template void adam_step(AdamState<double>&, const AdamHyper&, std::span<double>, std::span<const double>);
extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace lmlcc::diff
