#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmlcc/diffkit/tensor.hpp"

namespace lmlcc::diff {

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

struct AdamSnapshot {
  std::uint64_t t = 0;
  double lr = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<NamedTensor> m;
  std::vector<NamedTensor> v;
};

/// Model checkpoint. On disk:
///   "LMLCCCKP" | u32 version | config text | u64 FNV-1a digest of the config
///   | u32 count | count x (name, u32 rank, rank x u64 extent, float32 data)
///   | u8 has_adam | [u64 t, f64 lr, beta1, beta2, epsilon, u32 count, count x (m tensor, v tensor)]
/// All integers and floats little-endian; strings are u32 length + bytes.
struct Checkpoint {
  std::string config_text;
  std::vector<NamedTensor> tensors;
  std::optional<AdamSnapshot> adam;

  const NamedTensor* find(std::string_view name) const;
};

std::uint64_t config_digest(std::string_view text);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace lmlcc::diff
