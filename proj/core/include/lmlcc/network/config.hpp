#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmlcc/common/kv.hpp"
#include "lmlcc/huwindow/window.hpp"

namespace lmlcc {

enum class ModelMode { Backbone, Lmlcc };
enum class BackboneScale { Full, Desk };

std::string to_string(ModelMode mode);
std::string to_string(BackboneScale scale);
ModelMode parse_model_mode(const std::string& s);
BackboneScale parse_backbone_scale(const std::string& s);

/// Conv -> BatchNorm -> ReLU stack with pooling/dropout after selected convs
/// (0-based conv indices), followed by a dense head whose last width is 1.
struct BackboneConfig {
  std::vector<int> conv_channels;
  std::vector<int> pool_after;
  std::vector<int> dropout_after;
  std::vector<int> dense_widths;
  int patch_side = 16;
  BackboneScale scale = BackboneScale::Desk;
  double dropout_rate = 0.3;

  /// 12 convs (16x3, 32x3, 64x3, 128x3), a pool after every third conv,
  /// dropout after convs 5 and 11, dense 512-256-128-64-1.
  static BackboneConfig full(int patch_side = 32);
  /// 4 convs (4, 4, 8, 8), pools after convs 1 and 3, dropout after conv 3, dense 32-1.
  static BackboneConfig desk(int patch_side = 16);

  int pool_count() const { return static_cast<int>(pool_after.size()); }
  /// Spatial side of the feature maps after the last pool.
  int output_side() const;
  /// Flattened width produced by one feature extractor.
  std::size_t feature_width() const;
  void validate() const;
};

struct LmlccConfig {
  ModelMode mode = ModelMode::Lmlcc;
  int n_branches = 3;
  bool include_original = false;
  CutsMode cuts_mode = CutsMode::Learnable;
  CutsInit init = CutsInit::Constant;
  double tau = kDefaultWindowTau;
  BackboneConfig backbone = BackboneConfig::desk();

  /// Number of independent feature extractors.
  int extractor_count() const {
    return mode == ModelMode::Backbone ? 1 : n_branches + (include_original ? 1 : 0);
  }
  void validate() const;

  KeyValues to_key_values() const;
  /// Reads the keys written by to_key_values; absent keys keep their defaults.
  static LmlccConfig from_key_values(const KeyValues& kv);
  std::string to_text() const { return format_key_values(to_key_values()); }
  static LmlccConfig from_text(const std::string& text) { return from_key_values(parse_key_values(text)); }
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 68;
  double lr = 1e-4;
  double lr_floor = 1e-6;
  double plateau_factor = 0.5;
  int plateau_patience = 10;
  std::uint64_t seed = 0;
  /// Stop after this many epochs without a new best validation loss; 0 disables.
  int early_stop_patience = 0;
  /// Learning-rate multiplier for the window cut parameters.
  double window_lr_scale = 1.0;

  void validate() const;
};

/// Key names understood by LmlccConfig::from_key_values.
const std::vector<std::string>& model_config_keys();

}  // namespace lmlcc
