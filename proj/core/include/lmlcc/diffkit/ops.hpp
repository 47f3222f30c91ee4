#pragma once

#include <cstdint>
#include <vector>

#include "lmlcc/diffkit/graph.hpp"

namespace lmlcc::diff {

/// 3x3x3 cross-correlation, stride 1, zero padding 1.
/// x [N,Cin,D,H,W], kernel [Cout,Cin,3,3,3], bias [Cout] -> [N,Cout,D,H,W].
template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& kernel, const Var<T>& bias);

/// 2x2x2 max pooling with stride 2 over [N,C,D,H,W]; extents must be even.
/// Ties go to the first voxel in memory order.
template <typename T>
Var<T> maxpool3d(const Var<T>& x);

/// Running statistics of one batch-norm layer.
template <typename T>
struct BatchNormState {
  Tensor<T> running_mean;
  Tensor<T> running_var;
  double momentum = 0.9;
  double epsilon = 1e-5;

  explicit BatchNormState(std::size_t channels = 0)
      : running_mean(Shape{channels}, T{0}), running_var(Shape{channels}, T{1}) {}
};

/// Per-channel normalization over [N,C,...]. Train mode uses batch
/// statistics and updates `state` (running = m*running + (1-m)*batch, with
/// the unbiased batch variance); eval mode uses the running statistics.
template <typename T>
Var<T> batchnorm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, BatchNormState<T>& state,
                 bool train);

/// x [N,F], weight [Out,F], bias [Out] -> [N,Out].
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> sigmoid(const Var<T>& x);

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Identity in eval mode.
template <typename T>
Var<T> dropout(const Var<T>& x, double rate, std::uint64_t seed, bool train);

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape);

/// [N, ...] -> [N, prod(...)].
template <typename T>
Var<T> flatten(const Var<T>& x);

/// Concatenates [N,F_i] tensors along axis 1.
template <typename T>
Var<T> concat_features(const std::vector<Var<T>>& parts);

/// Channel `c` of [N,C,...] as [N,1,...].
template <typename T>
Var<T> slice_channel(const Var<T>& x, std::size_t c);

inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy of probabilities against {0,1} targets.
/// Probabilities are clamped to [1e-7, 1-1e-7]; the clamp is treated as
/// straight-through in the backward pass.
template <typename T>
Var<T> bce_loss(const Var<T>& probs, const Tensor<T>& targets);

template <typename T>
Var<T> sum(const Var<T>& x);

template <typename T>
Var<T> sum_squares(const Var<T>& x);

template <typename T>
Var<T> scale(const Var<T>& x, T factor);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

#define LMLCC_DIFF_OPS_EXTERN(T)                                                                   \
  extern template Var<T> conv3d(const Var<T>&, const Var<T>&, const Var<T>&);                      \
  extern template Var<T> maxpool3d(const Var<T>&);                                                 \
  extern template Var<T> batchnorm(const Var<T>&, const Var<T>&, const Var<T>&, BatchNormState<T>&, \
                                   bool);                                                          \
  extern template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                      \
  extern template Var<T> relu(const Var<T>&);                                                      \
  extern template Var<T> sigmoid(const Var<T>&);                                                   \
  extern template Var<T> dropout(const Var<T>&, double, std::uint64_t, bool);                      \
  extern template Var<T> reshape(const Var<T>&, Shape);                                            \
  extern template Var<T> flatten(const Var<T>&);                                                   \
  extern template Var<T> concat_features(const std::vector<Var<T>>&);                              \
  extern template Var<T> slice_channel(const Var<T>&, std::size_t);                                \
  extern template Var<T> bce_loss(const Var<T>&, const Tensor<T>&);                                \
  extern template Var<T> sum(const Var<T>&);                                                       \
  extern template Var<T> sum_squares(const Var<T>&);                                               \
  extern template Var<T> scale(const Var<T>&, T);                                                  \
  extern template Var<T> add(const Var<T>&, const Var<T>&);                                        \
  extern template Var<T> mul(const Var<T>&, const Var<T>&);

LMLCC_DIFF_OPS_EXTERN(float)
LMLCC_DIFF_OPS_EXTERN(double)

#undef LMLCC_DIFF_OPS_EXTERN

}  // namespace lmlcc::diff
