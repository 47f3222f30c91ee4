#include "lmlcc/preprocess/patch.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "lmlcc/common/error.hpp"

namespace lmlcc {

Patch extract_patch(const NormalizedVolume& volume, const Vec3& center_world, std::size_t side,
                    std::string nodule_id) {
  if (side < 1) throw ValidationError("patch side must be at least 1");
  const auto& g = volume.geometry;
  const Vec3 c = world_to_voxel(g, center_world);
  const auto half = static_cast<long long>(side / 2);
  long long start[3];
  bool overlaps = true;
  for (int a = 0; a < 3; ++a) {
    start[a] = static_cast<long long>(std::llround(c[a])) - half;
    const long long end = start[a] + static_cast<long long>(side);
    if (end <= 0 || start[a] >= static_cast<long long>(g.dims[a])) overlaps = false;
  }
  if (!overlaps) {
    throw OutOfBoundsError("patch centered at voxel (" + std::to_string(c[0]) + ", " + std::to_string(c[1]) +
                           ", " + std::to_string(c[2]) + ") does not intersect the volume");
  }

  Patch p;
  p.nodule_id = std::move(nodule_id);
  p.side = side;
  p.voxels.assign(side * side * side, 0.0f);
  for (std::size_t z = 0; z < side; ++z) {
    const long long sz = start[2] + static_cast<long long>(z);
    if (sz < 0 || sz >= static_cast<long long>(g.dims[2])) continue;
    for (std::size_t y = 0; y < side; ++y) {
      const long long sy = start[1] + static_cast<long long>(y);
      if (sy < 0 || sy >= static_cast<long long>(g.dims[1])) continue;
      for (std::size_t x = 0; x < side; ++x) {
        const long long sx = start[0] + static_cast<long long>(x);
        if (sx < 0 || sx >= static_cast<long long>(g.dims[0])) continue;
        p.voxels[p.index(x, y, z)] = volume.values[g.index(static_cast<std::size_t>(sx),
                                                           static_cast<std::size_t>(sy),
                                                           static_cast<std::size_t>(sz))];
      }
    }
  }
  return p;
}

std::string rotation_tag(int degrees) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rot%03d", ((degrees % 360) + 360) % 360);
  return buf;
}

Patch rotate_patch(const Patch& patch, int degrees) {
  const int deg = ((degrees % 360) + 360) % 360;
  const std::size_t n = patch.side;
  Patch out = patch;
  out.augmentation_tag = rotation_tag(deg);
  if (deg == 0) return out;

  if (deg % 90 == 0) {
    // Forward map of one quarter turn: (x, y) -> (y, n-1-x).
    for (std::size_t z = 0; z < n; ++z) {
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          std::size_t ox = x;
          std::size_t oy = y;
          for (int q = 0; q < deg / 90; ++q) {
            const std::size_t t = ox;
            ox = oy;
            oy = n - 1 - t;
          }
          out.voxels[out.index(ox, oy, z)] = patch.at(x, y, z);
        }
      }
    }
    return out;
  }

  // Same orientation convention as the exact path: sample the source at the
  // inverse-rotated position of each output voxel.
  const double theta = static_cast<double>(deg) * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const double u = static_cast<double>(x) - c;
        const double v = static_cast<double>(y) - c;
        const double su = u * cs - v * sn + c;
        const double sv = u * sn + v * cs + c;
        const double fx = std::floor(su);
        const double fy = std::floor(sv);
        const double ax = su - fx;
        const double ay = sv - fy;
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const long long ix = static_cast<long long>(fx) + dx;
            const long long iy = static_cast<long long>(fy) + dy;
            if (ix < 0 || iy < 0 || ix >= static_cast<long long>(n) || iy >= static_cast<long long>(n)) continue;
            const double w = (dx ? ax : 1.0 - ax) * (dy ? ay : 1.0 - ay);
            acc += w * patch.at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy), z);
          }
        }
        out.voxels[out.index(x, y, z)] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

std::vector<Patch> rotate_augment(const Patch& patch) {
  std::vector<Patch> out;
  out.reserve(8);
  for (int k = 0; k < 8; ++k) out.push_back(rotate_patch(patch, 45 * k));
  return out;
}

}  // namespace lmlcc
