#include "lmlcc/ingest/ct_volume.hpp"

#include <string>

#include "lmlcc/common/error.hpp"

namespace lmlcc {

void VolumeGeometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) throw ValidationError("volume dimension " + std::to_string(a) + " is zero");
    if (!(spacing[a] > 0.0)) {
      throw ValidationError("voxel spacing along axis " + std::to_string(a) + " must be positive");
    }
  }
}

void CtVolume::validate() const {
  geometry.validate();
  if (hu.size() != geometry.voxel_count()) {
    throw SizeMismatchError("volume '" + series_id + "' holds " + std::to_string(hu.size()) +
                            " voxels, geometry requires " +
                            std::to_string(geometry.voxel_count()));
  }
}

Vec3 world_to_voxel(const VolumeGeometry& g, const Vec3& world) {
  return {(world[0] - g.origin[0]) / g.spacing[0], (world[1] - g.origin[1]) / g.spacing[1],
          (world[2] - g.origin[2]) / g.spacing[2]};
}

Vec3 voxel_to_world(const VolumeGeometry& g, const Vec3& voxel) {
  return {g.origin[0] + voxel[0] * g.spacing[0], g.origin[1] + voxel[1] * g.spacing[1],
          g.origin[2] + voxel[2] * g.spacing[2]};
}

}  // namespace lmlcc
