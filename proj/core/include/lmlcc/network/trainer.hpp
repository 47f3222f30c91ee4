#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "lmlcc/network/model.hpp"
#include "lmlcc/preprocess/patch.hpp"

namespace lmlcc {

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  diff::Checkpoint best;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Stacks patches into a [N,1,S,S,S] batch.
template <typename T>
diff::Tensor<T> make_batch(std::span<const Patch> patches, std::span<const std::size_t> indices);

/// Mini-batch Adam on mean BCE with per-epoch shuffling from `tc.seed`, the
/// plateau schedule on validation loss, and best-validation-loss selection.
/// The model holds the best weights on return. Throws NumericalError naming
/// the first non-finite tensor when the loss diverges.
TrainResult train(LmlccModel<float>& model, std::span<const Patch> train_set, std::span<const Patch> val_set,
                  const TrainConfig& tc, const EpochCallback& on_epoch = {});

/// Eval-mode probabilities, one per patch.
template <typename T>
std::vector<double> predict(LmlccModel<T>& model, std::span<const Patch> patches, std::size_t batch_size = 32);

/// Mean BCE and accuracy (threshold 0.5) of probabilities against patch labels.
std::pair<double, double> loss_and_accuracy(std::span<const double> probs, std::span<const Patch> patches);

inline constexpr const char* kEpochLogHeader = "epoch,lr,train_loss,train_acc,val_loss,val_acc";
std::string format_epoch_log(const std::vector<EpochLog>& log);
void write_epoch_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

/// Grad-CAM of the output logit over the last conv maps of every extractor
/// (treated as one channel set), ReLU, trilinear upsampling to the patch
/// grid and max normalization. Returns side^3 values in [0, 1].
template <typename T>
std::vector<float> grad_cam(LmlccModel<T>& model, const Patch& patch);

extern template diff::Tensor<float> make_batch(std::span<const Patch>, std::span<const std::size_t>);
extern template diff::Tensor<double> make_batch(std::span<const Patch>, std::span<const std::size_t>);
extern template std::vector<double> predict(LmlccModel<float>&, std::span<const Patch>, std::size_t);
extern template std::vector<double> predict(LmlccModel<double>&, std::span<const Patch>, std::size_t);
extern template std::vector<float> grad_cam(LmlccModel<float>&, const Patch&);
extern template std::vector<float> grad_cam(LmlccModel<double>&, const Patch&);

}  // namespace lmlcc
