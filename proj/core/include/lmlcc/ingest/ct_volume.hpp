#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace lmlcc {

using Vec3 = std::array<double, 3>;
using Dims3 = std::array<std::size_t, 3>;

/// Regular grid geometry shared by raw and normalized volumes.
/// Voxel (i, j, k) has its center at origin + (i, j, k) * spacing, and
/// voxels are stored x-fastest.
struct VolumeGeometry {
  Dims3 dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims[0] * (y + dims[1] * z);
  }
  /// Throws ValidationError when dims or spacing break the invariants.
  void validate() const;
};

/// CT scan in Hounsfield Units.
struct CtVolume {
  std::string series_id;
  VolumeGeometry geometry;
  std::vector<float> hu;

  void validate() const;
};

Vec3 world_to_voxel(const VolumeGeometry& g, const Vec3& world);
Vec3 voxel_to_world(const VolumeGeometry& g, const Vec3& voxel);

inline Vec3 world_to_voxel(const CtVolume& v, const Vec3& world) {
  return world_to_voxel(v.geometry, world);
}

}  // namespace lmlcc
