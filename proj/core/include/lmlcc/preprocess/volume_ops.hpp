#pragma once

#include <string>
#include <vector>

#include "lmlcc/ingest/ct_volume.hpp"

namespace lmlcc {

inline constexpr double kHuLow = -1000.0;
inline constexpr double kHuHigh = 500.0;

/// CT volume mapped into [0, 1] (HU window [-1000, 500]).
struct NormalizedVolume {
  std::string series_id;
  VolumeGeometry geometry;
  std::vector<float> values;
};

/// (clamp(hu, -1000, 500) + 1000) / 1500.
double normalize_hu(double hu);

NormalizedVolume clip_normalize(const CtVolume& volume);

/// Trilinear resampling onto a grid with `target_spacing`. Output dims are
/// round(dims * spacing / target) (at least 1). The physical extents of the
/// two grids are aligned; samples falling outside the source extent are 0.
NormalizedVolume resample_trilinear(const NormalizedVolume& volume, const Vec3& target_spacing);

/// Trilinear sample at a continuous voxel coordinate. Coordinates within
/// half a voxel of the grid are clamped onto it; beyond that the value is 0.
double sample_trilinear(const VolumeGeometry& g, const std::vector<float>& values, const Vec3& voxel);

}  // namespace lmlcc
