#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lmlcc/preprocess/volume_ops.hpp"

namespace lmlcc {

/// Cubic sub-volume of normalized intensities, stored x-fastest.
struct Patch {
  std::string nodule_id;
  std::size_t side = 0;
  std::vector<float> voxels;
  std::optional<int> label;
  std::string augmentation_tag = "rot000";

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return x + side * (y + side * z); }
  float at(std::size_t x, std::size_t y, std::size_t z) const { return voxels[index(x, y, z)]; }
};

/// Cube of `side` voxels around the voxel nearest to `center_world`. The
/// cube spans [c - side/2, c - side/2 + side) per axis; voxels outside the
/// volume are 0. Throws OutOfBoundsError when the cube misses the volume.
Patch extract_patch(const NormalizedVolume& volume, const Vec3& center_world, std::size_t side,
                    std::string nodule_id = {});

/// Rotation about the axial (z) axis by `degrees`. Multiples of 90 are exact
/// index permutations (90 maps (i, j, k) to (j, side-1-i, k)); other angles
/// use bilinear in-plane interpolation with zero padding.
Patch rotate_patch(const Patch& patch, int degrees);

/// The original patch followed by its 45, 90, ..., 315 degree rotations.
std::vector<Patch> rotate_augment(const Patch& patch);

std::string rotation_tag(int degrees);

}  // namespace lmlcc
