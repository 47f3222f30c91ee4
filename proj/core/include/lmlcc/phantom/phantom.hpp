#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lmlcc/ingest/ct_volume.hpp"
#include "lmlcc/ingest/ratings.hpp"
#include "lmlcc/labeling/split.hpp"
#include "lmlcc/preprocess/patch.hpp"

namespace lmlcc {

enum class PhantomClass { Benign, Malignant };

std::string to_string(PhantomClass c);

/// Synthetic nodule on a cubic volume of `side` voxels. The nodule is
/// centered on voxel (side/2, side/2, side/2).
///
/// Benign nodules are smooth ellipsoids whose HU follows a slowly varying
/// field inside a narrow band. Malignant nodules are spheres with radial
/// spikes and a bimodal intensity profile: a spatially coherent field picks
/// the low or the high end of a broad band for each voxel.
struct PhantomSpec {
  PhantomClass cls = PhantomClass::Benign;
  std::size_t side = 16;
  double spacing_mm = 1.0;
  double radius_mm = 4.0;
  /// Ellipsoid semi-axis scale factors (benign only).
  std::array<double, 3> axis_scale{1.0, 1.0, 1.0};
  int spiculation = 0;
  double spike_length_mm = 2.8;
  std::array<double, 2> core_hu_band{-100.0, 60.0};
  double texture_noise_sd = 15.0;
  double background_hu = -1000.0;
  double background_noise_sd = 30.0;
  std::uint64_t seed = 0;

  static PhantomSpec benign_default(std::size_t side, std::uint64_t seed);
  static PhantomSpec malignant_default(std::size_t side, std::uint64_t seed);

  /// Largest distance from the center reached by the nodule, in mm.
  double extent_mm() const;
  /// Throws ConfigError when the nodule leaves the volume or a band leaves [-1000, 500].
  void validate() const;
};

struct Phantom {
  CtVolume volume;
  int label = 0;  // 1 malignant
  std::vector<std::uint8_t> mask;  // nodule voxels
  std::array<std::size_t, 3> bbox_min{};
  std::array<std::size_t, 3> bbox_max{};  // inclusive
  Vec3 center_world{};

  std::size_t nodule_voxel_count() const;
  bool in_bbox(std::size_t x, std::size_t y, std::size_t z) const {
    return x >= bbox_min[0] && x <= bbox_max[0] && y >= bbox_min[1] && y <= bbox_max[1] && z >= bbox_min[2] &&
           z <= bbox_max[2];
  }
};

/// Deterministic in `spec.seed`. HU values are integers in [-1000, 500].
Phantom generate_phantom(const PhantomSpec& spec);

struct PhantomCase {
  std::string nodule_id;
  int label = 0;
  bool hidden = false;  // label withheld from the ratings (ambiguous pool)
  Phantom phantom;
};

struct PhantomDataset {
  std::size_t side = 16;
  std::vector<PhantomCase> cases;
};

/// `n_benign` benign then `n_malignant` malignant cases with jittered size
/// and shape. Each case draws from its own stream derived from `seed` and
/// its index. With `hide_labels` every case is marked hidden. Ids are
/// `id_prefix` followed by a zero-padded index.
PhantomDataset generate_dataset(std::size_t n_benign, std::size_t n_malignant, std::size_t side,
                                std::uint64_t seed, bool hide_labels = false, const std::string& id_prefix = "ph");

/// Appends `other` after `base`; nodule ids must stay unique.
PhantomDataset concat_datasets(PhantomDataset base, const PhantomDataset& other);

/// Normalized patches (one per case, side = dataset side) through the same
/// clip/normalize and extraction path used for real scans. Hidden cases
/// carry no label.
std::vector<Patch> to_patches(const PhantomDataset& dataset);

/// Ratings consistent with each case: benign cases get three ratings in
/// {1,2}, malignant three in {4,5}, hidden cases three ratings of 3.
std::vector<NoduleRecord> synthetic_ratings(const PhantomDataset& dataset);

/// Consensus-ready nodule list (hidden cases are ambiguous).
std::vector<LabeledNodule> labeled_nodules(const PhantomDataset& dataset);

inline constexpr const char* kTruthHeader = "nodule_id,label,hidden,bbox_min_x,bbox_min_y,bbox_min_z,bbox_max_x,bbox_max_y,bbox_max_z";

/// Writes volumes/<nodule_id>.mhd/.raw, ratings.csv and truth.csv under `dir`.
void write_phantom_dataset(const std::filesystem::path& dir, const PhantomDataset& dataset);

}  // namespace lmlcc
