#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmlcc/diffkit/adam.hpp"
#include "lmlcc/diffkit/checkpoint.hpp"
#include "lmlcc/diffkit/ops.hpp"
#include "lmlcc/network/config.hpp"

namespace lmlcc {

template <typename T>
struct ConvBlock {
  diff::Var<T> weight;
  diff::Var<T> bias;
  diff::Var<T> gamma;
  diff::Var<T> beta;
  diff::BatchNormState<T> bn;
  bool pool_after = false;
  bool dropout_after = false;
};

template <typename T>
struct DenseLayer {
  diff::Var<T> weight;
  diff::Var<T> bias;
};

struct ForwardOptions {
  bool train = false;
  std::uint64_t dropout_seed = 0;
};

/// Backbone 3D CNN or multi-branch network with a learnable HU-window input
/// layer. Each branch owns an independent feature extractor; flattened
/// branch features are concatenated into one shared dense head.
///
/// Parameter names: branch{b}.conv{i}.{weight,bias}, branch{b}.bn{i}.{gamma,beta},
/// head.dense{j}.{weight,bias} and window.theta. Batch-norm running
/// statistics are stored as branch{b}.bn{i}.{running_mean,running_var}.
template <typename T>
class LmlccModel {
 public:
  struct Output {
    diff::Var<T> logits;  // [N,1]
    diff::Var<T> probs;   // [N,1]
    /// Post-ReLU output of the last conv of each extractor.
    std::vector<diff::Var<T>> last_conv;
  };

  LmlccModel(LmlccConfig config, std::uint64_t seed);
  // Parameters are graph leaves; copies would alias them.
  LmlccModel(const LmlccModel&) = delete;
  LmlccModel& operator=(const LmlccModel&) = delete;
  LmlccModel(LmlccModel&&) noexcept = default;
  LmlccModel& operator=(LmlccModel&&) noexcept = default;

  const LmlccConfig& config() const { return config_; }

  /// x: [N,1,S,S,S] with S == patch_side.
  Output forward(const diff::Var<T>& x, const ForwardOptions& options);
  Output forward(const diff::Tensor<T>& batch, const ForwardOptions& options) {
    return forward(diff::constant(batch, "input"), options);
  }

  /// Parameters updated by the optimizer (theta only when cuts are learnable).
  std::vector<diff::NamedParam<T>> parameters() const;
  /// Every persisted parameter, including a frozen theta.
  std::vector<diff::NamedParam<T>> all_parameters() const;
  std::size_t parameter_count() const;

  bool has_window() const { return config_.mode == ModelMode::Lmlcc; }
  /// Interior cut positions in normalized intensity; empty without a window layer.
  std::vector<double> cuts() const;
  std::vector<double> theta() const;
  void set_theta(const std::vector<double>& theta);

  diff::Checkpoint to_checkpoint(const diff::Adam<T>* optimizer = nullptr) const;
  /// Loads parameters and batch-norm statistics by name; throws on any missing or mis-shaped tensor.
  void load_state(const diff::Checkpoint& checkpoint);
  static LmlccModel from_checkpoint(const diff::Checkpoint& checkpoint);

 private:
  diff::Var<T> extract(std::size_t branch, const diff::Var<T>& x, const ForwardOptions& options,
                       diff::Var<T>& last_conv);

  LmlccConfig config_;
  std::vector<std::vector<ConvBlock<T>>> extractors_;
  std::vector<DenseLayer<T>> head_;
  diff::Var<T> theta_;
};

extern template class LmlccModel<float>;
extern template class LmlccModel<double>;

}  // namespace lmlcc
