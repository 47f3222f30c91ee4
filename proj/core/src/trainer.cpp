#include "lmlcc/network/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/text.hpp"
#include "lmlcc/diffkit/adam.hpp"
#include "lmlcc/diffkit/ops.hpp"
#include "lmlcc/preprocess/volume_ops.hpp"

namespace lmlcc {
namespace {

void check_patches(std::span<const Patch> patches, std::size_t side, const char* what, bool need_labels) {
  for (const auto& p : patches) {
    if (p.side != side || p.voxels.size() != side * side * side) {
      throw ShapeError(std::string(what) + " patch '" + p.nodule_id + "' has side " + std::to_string(p.side) +
                       ", model expects " + std::to_string(side));
    }
    if (need_labels && !p.label) {
      throw ValidationError(std::string(what) + " patch '" + p.nodule_id + "' has no label");
    }
  }
}

}  // namespace

template <typename T>
diff::Tensor<T> make_batch(std::span<const Patch> patches, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ShapeError("empty batch");
  const std::size_t side = patches[indices[0]].side;
  const std::size_t vox = side * side * side;
  diff::Tensor<T> batch(diff::Shape{indices.size(), 1, side, side, side});
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& p = patches[indices[k]];
    if (p.side != side) throw ShapeError("patches in a batch must share one side length");
    std::copy(p.voxels.begin(), p.voxels.end(), batch.raw() + k * vox);
  }
  return batch;
}

std::pair<double, double> loss_and_accuracy(std::span<const double> probs, std::span<const Patch> patches) {
  if (probs.size() != patches.size() || probs.empty()) throw ShapeError("loss_and_accuracy: size mismatch");
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = *patches[i].label;
    const double p = std::clamp(probs[i], diff::kBceClamp, 1.0 - diff::kBceClamp);
    loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    if ((probs[i] >= 0.5 ? 1 : 0) == *patches[i].label) ++correct;
  }
  const auto n = static_cast<double>(probs.size());
  return {loss / n, static_cast<double>(correct) / n};
}

template <typename T>
std::vector<double> predict(LmlccModel<T>& model, std::span<const Patch> patches, std::size_t batch_size) {
  check_patches(patches, static_cast<std::size_t>(model.config().backbone.patch_side), "prediction", false);
  std::vector<double> out;
  out.reserve(patches.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < patches.size(); start += batch_size) {
    idx.resize(std::min(batch_size, patches.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto result = model.forward(make_batch<T>(patches, idx), ForwardOptions{false, 0});
    for (const T p : result.probs->value.data()) out.push_back(static_cast<double>(p));
  }
  return out;
}

TrainResult train(LmlccModel<float>& model, std::span<const Patch> train_set, std::span<const Patch> val_set,
                  const TrainConfig& tc, const EpochCallback& on_epoch) {
  tc.validate();
  if (train_set.empty()) throw InsufficientDataError("training set is empty");
  if (val_set.empty()) throw InsufficientDataError("validation set is empty");
  const auto side = static_cast<std::size_t>(model.config().backbone.patch_side);
  check_patches(train_set, side, "training", true);
  check_patches(val_set, side, "validation", true);

  diff::Adam<float> optimizer(model.parameters(), diff::AdamHyper{tc.lr});
  if (model.has_window() && model.config().cuts_mode == CutsMode::Learnable) {
    optimizer.set_lr_scale("window.theta", tc.window_lr_scale);
  }
  diff::PlateauScheduler scheduler(tc.lr, tc.plateau_factor, tc.plateau_patience, tc.lr_floor);
  std::mt19937_64 rng(tc.seed);

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(tc.batch_size);

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(bs, order.size() - start));
      diff::Tensor<float> targets(diff::Shape{idx.size()});
      for (std::size_t k = 0; k < idx.size(); ++k) targets[k] = static_cast<float>(*train_set[idx[k]].label);

      optimizer.zero_grad();
      const auto out = model.forward(make_batch<float>(train_set, idx), ForwardOptions{true, rng()});
      const auto loss = diff::bce_loss(out.probs, targets);
      if (!std::isfinite(loss->value[0])) {
        const auto* bad = diff::first_non_finite(loss);
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                             "; first non-finite tensor: " + (bad ? bad->label : std::string("loss")));
      }
      diff::backward(loss);
      optimizer.step();

      loss_sum += static_cast<double>(loss->value[0]) * static_cast<double>(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if ((out.probs->value[k] >= 0.5f ? 1 : 0) == *train_set[idx[k]].label) ++correct;
      }
    }

    const auto val_probs = predict(model, val_set);
    const auto [val_loss, val_acc] = loss_and_accuracy(val_probs, val_set);
    if (!std::isfinite(val_loss)) throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch));

    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = optimizer.lr();
    entry.train_loss = loss_sum / static_cast<double>(train_set.size());
    entry.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    entry.val_loss = val_loss;
    entry.val_acc = val_acc;
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.best = model.to_checkpoint(&optimizer);
    }
    optimizer.set_lr(scheduler.observe(val_loss));
    if (tc.early_stop_patience > 0 && epoch - result.best_epoch >= tc.early_stop_patience) break;
  }
  model.load_state(result.best);
  return result;
}

std::string format_epoch_log(const std::vector<EpochLog>& log) {
  std::string out = std::string(kEpochLogHeader) + "\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + text::format_double(e.lr) + "," + text::format_double(e.train_loss) +
           "," + text::format_double(e.train_acc) + "," + text::format_double(e.val_loss) + "," +
           text::format_double(e.val_acc) + "\n";
  }
  return out;
}

void write_epoch_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_epoch_log(log);
}

template <typename T>
std::vector<float> grad_cam(LmlccModel<T>& model, const Patch& patch) {
  const auto side = static_cast<std::size_t>(model.config().backbone.patch_side);
  check_patches(std::span<const Patch>(&patch, 1), side, "grad-cam", false);
  const std::size_t idx = 0;
  const auto out = model.forward(make_batch<T>(std::span<const Patch>(&patch, 1), std::span<const std::size_t>(&idx, 1)),
                                 ForwardOptions{false, 0});
  diff::backward(diff::sum(out.logits));

  const auto& first = out.last_conv.front()->value.shape();
  const std::size_t d = first[2], h = first[3], w = first[4];
  const std::size_t S = d * h * w;
  std::vector<double> cam(S, 0.0);
  for (const auto& maps : out.last_conv) {
    const std::size_t C = maps->value.dim(1);
    for (std::size_t c = 0; c < C; ++c) {
      const T* a = maps->value.raw() + c * S;
      const T* g = maps->grad.raw() + c * S;
      double alpha = 0.0;
      for (std::size_t i = 0; i < S; ++i) alpha += g[i];
      alpha /= static_cast<double>(S);
      for (std::size_t i = 0; i < S; ++i) cam[i] += alpha * a[i];
    }
  }
  for (auto& v : cam) v = std::max(v, 0.0);
  for (const auto& p : model.all_parameters()) p.var->zero_grad();

  VolumeGeometry coarse;
  coarse.dims = {w, h, d};
  std::vector<float> coarse_values(cam.begin(), cam.end());
  std::vector<float> heat(side * side * side);
  const double sx = static_cast<double>(w) / static_cast<double>(side);
  const double sy = static_cast<double>(h) / static_cast<double>(side);
  const double sz = static_cast<double>(d) / static_cast<double>(side);
  float peak = 0.0f;
  for (std::size_t z = 0; z < side; ++z) {
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        const Vec3 c{(static_cast<double>(x) + 0.5) * sx - 0.5, (static_cast<double>(y) + 0.5) * sy - 0.5,
                     (static_cast<double>(z) + 0.5) * sz - 0.5};
        const auto v = static_cast<float>(sample_trilinear(coarse, coarse_values, c));
        heat[x + side * (y + side * z)] = v;
        peak = std::max(peak, v);
      }
    }
  }
  if (peak > 0.0f) {
    for (auto& v : heat) v /= peak;
  }
  return heat;
}

template diff::Tensor<float> make_batch(std::span<const Patch>, std::span<const std::size_t>);
template diff::Tensor<double> make_batch(std::span<const Patch>, std::span<const std::size_t>);
template std::vector<double> predict(LmlccModel<float>&, std::span<const Patch>, std::size_t);
template std::vector<double> predict(LmlccModel<double>&, std::span<const Patch>, std::size_t);
template std::vector<float> grad_cam(LmlccModel<float>&, const Patch&);
template std::vector<float> grad_cam(LmlccModel<double>&, const Patch&);

}  // namespace lmlcc
