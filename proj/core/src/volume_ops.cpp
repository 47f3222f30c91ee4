#include "lmlcc/preprocess/volume_ops.hpp"

#include <algorithm>
#include <cmath>

#include "lmlcc/common/error.hpp"

namespace lmlcc {

double normalize_hu(double hu) {
  return (std::clamp(hu, kHuLow, kHuHigh) - kHuLow) / (kHuHigh - kHuLow);
}

NormalizedVolume clip_normalize(const CtVolume& volume) {
  volume.validate();
  NormalizedVolume out{volume.series_id, volume.geometry, {}};
  out.values.resize(volume.hu.size());
  std::transform(volume.hu.begin(), volume.hu.end(), out.values.begin(),
                 [](float hu) { return static_cast<float>(normalize_hu(hu)); });
  return out;
}

double sample_trilinear(const VolumeGeometry& g, const std::vector<float>& values, const Vec3& voxel) {
  std::size_t lo[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double n = static_cast<double>(g.dims[a]);
    double c = voxel[a];
    if (c < -0.5 || c > n - 0.5) return 0.0;
    c = std::clamp(c, 0.0, n - 1.0);
    const double f = std::floor(c);
    lo[a] = static_cast<std::size_t>(f);
    frac[a] = c - f;
    if (lo[a] + 1 >= g.dims[a]) {
      lo[a] = g.dims[a] - 1;
      frac[a] = 0.0;
    }
  }
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? frac[2] : 1.0 - frac[2];
    if (wz == 0.0) continue;
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? frac[1] : 1.0 - frac[1];
      if (wy == 0.0) continue;
      for (int dx = 0; dx < 2; ++dx) {
        const double wx = dx ? frac[0] : 1.0 - frac[0];
        if (wx == 0.0) continue;
        acc += wz * wy * wx * values[g.index(lo[0] + dx, lo[1] + dy, lo[2] + dz)];
      }
    }
  }
  return acc;
}

NormalizedVolume resample_trilinear(const NormalizedVolume& volume, const Vec3& target_spacing) {
  for (int a = 0; a < 3; ++a) {
    if (!(target_spacing[a] > 0.0)) throw ValidationError("target spacing must be positive");
  }
  const auto& src = volume.geometry;
  NormalizedVolume out;
  out.series_id = volume.series_id;
  double scale[3];
  for (int a = 0; a < 3; ++a) {
    const double extent = static_cast<double>(src.dims[a]) * src.spacing[a];
    out.geometry.dims[a] = static_cast<std::size_t>(std::max(1.0, std::round(extent / target_spacing[a])));
    out.geometry.spacing[a] = target_spacing[a];
    out.geometry.origin[a] = src.origin[a] - 0.5 * src.spacing[a] + 0.5 * target_spacing[a];
    scale[a] = target_spacing[a] / src.spacing[a];
  }
  const auto& g = out.geometry;
  out.values.resize(g.voxel_count());
  for (std::size_t z = 0; z < g.dims[2]; ++z) {
    for (std::size_t y = 0; y < g.dims[1]; ++y) {
      for (std::size_t x = 0; x < g.dims[0]; ++x) {
        const Vec3 c{(static_cast<double>(x) + 0.5) * scale[0] - 0.5,
                     (static_cast<double>(y) + 0.5) * scale[1] - 0.5,
                     (static_cast<double>(z) + 0.5) * scale[2] - 0.5};
        out.values[g.index(x, y, z)] = static_cast<float>(sample_trilinear(src, volume.values, c));
      }
    }
  }
  return out;
}

}  // namespace lmlcc
