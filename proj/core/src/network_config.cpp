#include "lmlcc/network/config.hpp"

#include <algorithm>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/text.hpp"

namespace lmlcc {
namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s, const std::string& key) {
  std::vector<int> out;
  if (text::trim(s).empty()) return out;
  for (const auto& tok : text::split(s, ',')) out.push_back(static_cast<int>(text::parse_int(tok, key)));
  return out;
}

}  // namespace

std::string to_string(ModelMode mode) { return mode == ModelMode::Backbone ? "backbone" : "lmlcc"; }
std::string to_string(BackboneScale scale) { return scale == BackboneScale::Full ? "full" : "desk"; }

ModelMode parse_model_mode(const std::string& s) {
  if (s == "backbone") return ModelMode::Backbone;
  if (s == "lmlcc") return ModelMode::Lmlcc;
  throw ConfigError("mode must be 'backbone' or 'lmlcc', got '" + s + "'");
}

BackboneScale parse_backbone_scale(const std::string& s) {
  if (s == "full") return BackboneScale::Full;
  if (s == "desk") return BackboneScale::Desk;
  throw ConfigError("scale must be 'full' or 'desk', got '" + s + "'");
}

BackboneConfig BackboneConfig::full(int patch_side) {
  BackboneConfig c;
  c.conv_channels = {16, 16, 16, 32, 32, 32, 64, 64, 64, 128, 128, 128};
  c.pool_after = {2, 5, 8, 11};
  c.dropout_after = {5, 11};
  c.dense_widths = {512, 256, 128, 64, 1};
  c.patch_side = patch_side;
  c.scale = BackboneScale::Full;
  return c;
}

BackboneConfig BackboneConfig::desk(int patch_side) {
  BackboneConfig c;
  c.conv_channels = {4, 4, 8, 8};
  c.pool_after = {1, 3};
  c.dropout_after = {3};
  c.dense_widths = {32, 1};
  c.patch_side = patch_side;
  c.scale = BackboneScale::Desk;
  return c;
}

int BackboneConfig::output_side() const { return patch_side >> pool_count(); }

std::size_t BackboneConfig::feature_width() const {
  const auto s = static_cast<std::size_t>(output_side());
  return static_cast<std::size_t>(conv_channels.back()) * s * s * s;
}

void BackboneConfig::validate() const {
  if (conv_channels.empty()) throw ConfigError("backbone needs at least one conv layer");
  for (const int c : conv_channels) {
    if (c < 1) throw ConfigError("conv channel counts must be positive");
  }
  const int n = static_cast<int>(conv_channels.size());
  for (const auto* list : {&pool_after, &dropout_after}) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      if ((*list)[i] < 0 || (*list)[i] >= n) throw ConfigError("pool/dropout index outside the conv stack");
      if (i > 0 && (*list)[i] <= (*list)[i - 1]) throw ConfigError("pool/dropout indices must increase");
    }
  }
  if (dense_widths.empty() || dense_widths.back() != 1) throw ConfigError("dense widths must end in 1");
  for (const int w : dense_widths) {
    if (w < 1) throw ConfigError("dense widths must be positive");
  }
  if (patch_side < 1) throw ConfigError("patch side must be positive");
  const int div = 1 << pool_count();
  if (patch_side % div != 0) {
    throw ConfigError("patch side " + std::to_string(patch_side) + " is not divisible by 2^" +
                      std::to_string(pool_count()) + " (one halving per pool)");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
}

void LmlccConfig::validate() const {
  backbone.validate();
  if (n_branches < 1) throw ConfigError("n_branches must be at least 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
}

const std::vector<std::string>& model_config_keys() {
  static const std::vector<std::string> keys = {
      "mode",         "branches",      "include_original", "cuts",       "init",       "tau",
      "scale",        "patch_side",    "conv_channels",    "pool_after", "dropout_after",
      "dense_widths", "dropout_rate"};
  return keys;
}

KeyValues LmlccConfig::to_key_values() const {
  KeyValues kv;
  kv["mode"] = to_string(mode);
  kv["branches"] = std::to_string(n_branches);
  kv["include_original"] = include_original ? "true" : "false";
  kv["cuts"] = to_string(cuts_mode);
  kv["init"] = to_string(init);
  kv["tau"] = text::format_double(tau);
  kv["scale"] = to_string(backbone.scale);
  kv["patch_side"] = std::to_string(backbone.patch_side);
  kv["conv_channels"] = join_ints(backbone.conv_channels);
  kv["pool_after"] = join_ints(backbone.pool_after);
  kv["dropout_after"] = join_ints(backbone.dropout_after);
  kv["dense_widths"] = join_ints(backbone.dense_widths);
  kv["dropout_rate"] = text::format_double(backbone.dropout_rate);
  return kv;
}

LmlccConfig LmlccConfig::from_key_values(const KeyValues& kv) {
  LmlccConfig c;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  // Scale and side pick the layer defaults; explicit lists override them.
  if (const auto* v = get("scale")) c.backbone.scale = parse_backbone_scale(*v);
  int side = c.backbone.scale == BackboneScale::Full ? 32 : 16;
  if (const auto* v = get("patch_side")) side = static_cast<int>(text::parse_int(*v, "patch_side"));
  c.backbone = c.backbone.scale == BackboneScale::Full ? BackboneConfig::full(side) : BackboneConfig::desk(side);
  if (const auto* v = get("conv_channels")) c.backbone.conv_channels = parse_ints(*v, "conv_channels");
  if (const auto* v = get("pool_after")) c.backbone.pool_after = parse_ints(*v, "pool_after");
  if (const auto* v = get("dropout_after")) c.backbone.dropout_after = parse_ints(*v, "dropout_after");
  if (const auto* v = get("dense_widths")) c.backbone.dense_widths = parse_ints(*v, "dense_widths");
  if (const auto* v = get("dropout_rate")) c.backbone.dropout_rate = text::parse_double(*v, "dropout_rate");
  if (const auto* v = get("mode")) c.mode = parse_model_mode(*v);
  if (const auto* v = get("branches")) c.n_branches = static_cast<int>(text::parse_int(*v, "branches"));
  if (const auto* v = get("include_original")) c.include_original = text::parse_bool(*v, "include_original");
  if (const auto* v = get("cuts")) c.cuts_mode = parse_cuts_mode(*v);
  if (const auto* v = get("init")) c.init = parse_cuts_init(*v);
  if (const auto* v = get("tau")) c.tau = text::parse_double(*v, "tau");
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(lr_floor > 0.0) || lr_floor > lr) throw ConfigError("lr_floor must be positive and not above lr");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ConfigError("plateau_factor must be in (0, 1)");
  if (plateau_patience < 1) throw ConfigError("plateau_patience must be at least 1");
  if (early_stop_patience < 0) throw ConfigError("early_stop_patience must not be negative");
  if (!(window_lr_scale > 0.0)) throw ConfigError("window_lr_scale must be positive");
}

}  // namespace lmlcc
