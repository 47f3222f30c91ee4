#include "lmlcc/phantom/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/seed.hpp"
#include "lmlcc/ingest/metaimage.hpp"
#include "lmlcc/preprocess/volume_ops.hpp"

namespace lmlcc {
namespace {

constexpr double kHuMin = -1000.0;
constexpr double kHuMax = 500.0;

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec3 d{n(rng), n(rng), n(rng)};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (len > 1e-9) return {d[0] / len, d[1] / len, d[2] / len};
  }
}

/// Sum of three plane waves with random directions and phases, mapped to [0, 1].
class SmoothField {
 public:
  SmoothField(std::mt19937_64& rng, double wavelength_mm) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (auto& w : waves_) {
      w.dir = random_direction(rng);
      w.phase = phase(rng);
    }
    k_ = 2.0 * std::numbers::pi / wavelength_mm;
  }
  double operator()(const Vec3& p) const {
    double s = 0.0;
    for (const auto& w : waves_) s += std::cos(k_ * (w.dir[0] * p[0] + w.dir[1] * p[1] + w.dir[2] * p[2]) + w.phase);
    return 0.5 * (s / 3.0 + 1.0);
  }

 private:
  struct Wave {
    Vec3 dir{};
    double phase = 0.0;
  };
  std::array<Wave, 3> waves_{};
  double k_ = 1.0;
};

}  // namespace

std::string to_string(PhantomClass c) { return c == PhantomClass::Benign ? "benign" : "malignant"; }

PhantomSpec PhantomSpec::benign_default(std::size_t side, std::uint64_t seed) {
  PhantomSpec s;
  s.cls = PhantomClass::Benign;
  s.side = side;
  s.radius_mm = 0.25 * static_cast<double>(side);
  s.spiculation = 0;
  s.core_hu_band = {-100.0, 60.0};
  s.texture_noise_sd = 15.0;
  s.seed = seed;
  return s;
}

PhantomSpec PhantomSpec::malignant_default(std::size_t side, std::uint64_t seed) {
  PhantomSpec s;
  s.cls = PhantomClass::Malignant;
  s.side = side;
  s.radius_mm = 0.25 * static_cast<double>(side);
  s.spiculation = 12;
  s.spike_length_mm = 0.17 * static_cast<double>(side);
  s.core_hu_band = {-300.0, 350.0};
  s.texture_noise_sd = 60.0;
  s.seed = seed;
  return s;
}

double PhantomSpec::extent_mm() const {
  const double axis = cls == PhantomClass::Benign ? *std::max_element(axis_scale.begin(), axis_scale.end()) : 1.0;
  return radius_mm * axis + (spiculation > 0 ? spike_length_mm : 0.0);
}

void PhantomSpec::validate() const {
  if (side < 4) throw ConfigError("phantom side must be at least 4 voxels");
  if (!(spacing_mm > 0.0)) throw ConfigError("phantom spacing must be positive");
  if (!(radius_mm > 0.0)) throw ConfigError("phantom radius must be positive");
  if (spiculation < 0) throw ConfigError("spike count must be non-negative");
  if (spiculation > 0 && !(spike_length_mm > 0.0)) throw ConfigError("spike length must be positive");
  for (const double a : axis_scale) {
    if (!(a > 0.0)) throw ConfigError("ellipsoid axis scales must be positive");
  }
  if (core_hu_band[0] > core_hu_band[1]) throw ConfigError("core HU band is inverted");
  if (core_hu_band[0] < kHuMin || core_hu_band[1] > kHuMax) {
    throw ConfigError("core HU band must lie within [-1000, 500]");
  }
  if (texture_noise_sd < 0.0 || background_noise_sd < 0.0) throw ConfigError("noise sd must be non-negative");
  const double room_mm = (static_cast<double>(side / 2) - 1.0) * spacing_mm;
  if (extent_mm() > room_mm) {
    throw ConfigError("nodule extent " + std::to_string(extent_mm()) + " mm exceeds the " +
                      std::to_string(room_mm) + " mm available in a " + std::to_string(side) + "-voxel volume");
  }
}

std::size_t Phantom::nodule_voxel_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t n = spec.side;
  const double h = spec.spacing_mm;
  const double c = static_cast<double>(n / 2);

  Phantom out;
  out.label = spec.cls == PhantomClass::Malignant ? 1 : 0;
  auto& g = out.volume.geometry;
  g.dims = {n, n, n};
  g.spacing = {h, h, h};
  g.origin = {0.0, 0.0, 0.0};
  out.volume.hu.assign(g.voxel_count(), 0.0f);
  out.mask.assign(g.voxel_count(), 0);
  out.center_world = voxel_to_world(g, {c, c, c});

  struct Spike {
    Vec3 dir;
  };
  std::vector<Spike> spikes;
  for (int i = 0; i < spec.spiculation; ++i) spikes.push_back({random_direction(rng)});

  // Random orientation of the ellipsoid axes.
  const Vec3 e0 = random_direction(rng);
  Vec3 tmp = random_direction(rng);
  double dp = tmp[0] * e0[0] + tmp[1] * e0[1] + tmp[2] * e0[2];
  Vec3 e1{tmp[0] - dp * e0[0], tmp[1] - dp * e0[1], tmp[2] - dp * e0[2]};
  const double l1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  if (l1 < 1e-6) {
    e1 = std::abs(e0[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    dp = e1[0] * e0[0] + e1[1] * e0[1] + e1[2] * e0[2];
    e1 = {e1[0] - dp * e0[0], e1[1] - dp * e0[1], e1[2] - dp * e0[2]};
  }
  const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (auto& v : e1) v /= n1;
  const Vec3 e2{e0[1] * e1[2] - e0[2] * e1[1], e0[2] * e1[0] - e0[0] * e1[2], e0[0] * e1[1] - e0[1] * e1[0]};

  const SmoothField texture(rng, 3.0 * spec.radius_mm);
  const SmoothField modes(rng, 2.0 * spec.radius_mm);
  std::normal_distribution<double> noise(0.0, 1.0);

  const double lo = spec.core_hu_band[0];
  const double hi = spec.core_hu_band[1];
  const double width = hi - lo;
  const double r = spec.radius_mm;
  const double spike_width = 0.9 * h;

  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const Vec3 p{(static_cast<double>(x) - c) * h, (static_cast<double>(y) - c) * h,
                     (static_cast<double>(z) - c) * h};
        bool inside = false;
        if (spec.cls == PhantomClass::Benign) {
          const double a = (p[0] * e0[0] + p[1] * e0[1] + p[2] * e0[2]) / (r * spec.axis_scale[0]);
          const double b = (p[0] * e1[0] + p[1] * e1[1] + p[2] * e1[2]) / (r * spec.axis_scale[1]);
          const double d = (p[0] * e2[0] + p[1] * e2[1] + p[2] * e2[2]) / (r * spec.axis_scale[2]);
          inside = a * a + b * b + d * d <= 1.0;
        } else {
          const double dist = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
          inside = dist <= r;
          for (std::size_t s = 0; !inside && s < spikes.size(); ++s) {
            const auto& dir = spikes[s].dir;
            const double t = p[0] * dir[0] + p[1] * dir[1] + p[2] * dir[2];
            if (t < 0.0 || t > r + spec.spike_length_mm) continue;
            const double perp2 = std::max(0.0, dist * dist - t * t);
            const double taper = t <= r ? 1.0 : 1.0 - 0.6 * (t - r) / spec.spike_length_mm;
            inside = perp2 <= (spike_width * taper) * (spike_width * taper);
          }
        }

        double hu;
        const double eps = noise(rng);
        if (inside) {
          if (spec.cls == PhantomClass::Benign) {
            hu = lo + width * texture(p) + spec.texture_noise_sd * eps;
          } else {
            const double within = 0.3 * width * texture(p);
            hu = modes(p) >= 0.5 ? hi - within : lo + within;
            hu += spec.texture_noise_sd * eps;
          }
        } else {
          hu = spec.background_hu + spec.background_noise_sd * eps;
        }
        const std::size_t idx = g.index(x, y, z);
        out.volume.hu[idx] = static_cast<float>(std::round(std::clamp(hu, kHuMin, kHuMax)));
        out.mask[idx] = inside ? 1 : 0;
      }
    }
  }

  out.bbox_min = {n, n, n};
  out.bbox_max = {0, 0, 0};
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        if (!out.mask[g.index(x, y, z)]) continue;
        const std::array<std::size_t, 3> v{x, y, z};
        for (int a = 0; a < 3; ++a) {
          out.bbox_min[a] = std::min(out.bbox_min[a], v[a]);
          out.bbox_max[a] = std::max(out.bbox_max[a], v[a]);
        }
      }
    }
  }
  if (out.bbox_min[0] > out.bbox_max[0]) {
    throw ConfigError("phantom nodule covers no voxel; increase the radius");
  }
  return out;
}

PhantomDataset generate_dataset(std::size_t n_benign, std::size_t n_malignant, std::size_t side,
                                std::uint64_t seed, bool hide_labels, const std::string& id_prefix) {
  PhantomDataset ds;
  ds.side = side;
  const std::size_t total = n_benign + n_malignant;
  ds.cases.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::uint64_t item_seed = mix_seed(seed, i, 0x9a);
    std::mt19937_64 rng(mix_seed(item_seed, 1));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool malignant = i >= n_benign;
    PhantomSpec spec = malignant ? PhantomSpec::malignant_default(side, item_seed)
                                 : PhantomSpec::benign_default(side, item_seed);
    if (malignant) {
      spec.radius_mm *= 0.85 + 0.15 * u(rng);
      spec.spiculation = 8 + static_cast<int>(u(rng) * 8.0);
    } else {
      spec.radius_mm *= 0.9 + 0.2 * u(rng);
      for (auto& a : spec.axis_scale) a = 0.75 + 0.25 * u(rng);
    }
    PhantomCase pc;
    char id[32];
    std::snprintf(id, sizeof(id), "%05zu", i);
    pc.nodule_id = id_prefix + id;
    pc.label = malignant ? 1 : 0;
    pc.hidden = hide_labels;
    pc.phantom = generate_phantom(spec);
    pc.phantom.volume.series_id = pc.nodule_id;
    ds.cases.push_back(std::move(pc));
  }
  return ds;
}

PhantomDataset concat_datasets(PhantomDataset base, const PhantomDataset& other) {
  if (base.side != other.side && !base.cases.empty() && !other.cases.empty()) {
    throw ConfigError("cannot concatenate phantom datasets of different sides");
  }
  std::set<std::string> ids;
  for (const auto& c : base.cases) ids.insert(c.nodule_id);
  for (const auto& c : other.cases) {
    if (!ids.insert(c.nodule_id).second) throw DuplicateError("duplicate phantom id " + c.nodule_id);
    base.cases.push_back(c);
  }
  if (base.cases.size() == other.cases.size()) base.side = other.side;
  return base;
}

std::vector<Patch> to_patches(const PhantomDataset& dataset) {
  std::vector<Patch> out;
  out.reserve(dataset.cases.size());
  for (const auto& c : dataset.cases) {
    const auto norm = clip_normalize(c.phantom.volume);
    Patch p = extract_patch(norm, c.phantom.center_world, dataset.side, c.nodule_id);
    if (!c.hidden) p.label = c.label;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<NoduleRecord> synthetic_ratings(const PhantomDataset& dataset) {
  std::vector<NoduleRecord> out;
  out.reserve(dataset.cases.size());
  for (std::size_t i = 0; i < dataset.cases.size(); ++i) {
    const auto& c = dataset.cases[i];
    NoduleRecord r;
    r.series_id = c.phantom.volume.series_id.empty() ? c.nodule_id : c.phantom.volume.series_id;
    r.nodule_id = c.nodule_id;
    r.center_world = c.phantom.center_world;
    std::size_t span = 0;
    for (int a = 0; a < 3; ++a) span = std::max(span, c.phantom.bbox_max[a] - c.phantom.bbox_min[a] + 1);
    r.diameter_mm = static_cast<double>(span) * c.phantom.volume.geometry.spacing[0];
    if (c.hidden) {
      r.ratings = {3, 3, 3};
    } else {
      std::mt19937_64 rng(mix_seed(i, 0x7a));
      std::uniform_int_distribution<int> pick(0, 1);
      for (int k = 0; k < 3; ++k) r.ratings.push_back(c.label == 1 ? 4 + pick(rng) : 1 + pick(rng));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabeledNodule> labeled_nodules(const PhantomDataset& dataset) {
  std::vector<LabeledNodule> out;
  out.reserve(dataset.cases.size());
  for (const auto& c : dataset.cases) {
    const auto label = c.hidden ? MalignancyLabel::Ambiguous
                                : (c.label == 1 ? MalignancyLabel::Malignant : MalignancyLabel::Benign);
    out.push_back({c.nodule_id, label});
  }
  return out;
}

void write_phantom_dataset(const std::filesystem::path& dir, const PhantomDataset& dataset) {
  std::filesystem::create_directories(dir / "volumes");
  for (const auto& c : dataset.cases) {
    write_mhd_volume(dir / "volumes" / (c.nodule_id + ".mhd"), c.phantom.volume);
  }
  write_ratings(dir / "ratings.csv", synthetic_ratings(dataset));

  std::ofstream truth(dir / "truth.csv", std::ios::binary | std::ios::trunc);
  if (!truth) throw IoError("cannot write " + (dir / "truth.csv").string());
  truth << kTruthHeader << "\n";
  for (const auto& c : dataset.cases) {
    const auto& p = c.phantom;
    truth << c.nodule_id << ',' << c.label << ',' << (c.hidden ? "true" : "false") << ',' << p.bbox_min[0] << ','
          << p.bbox_min[1] << ',' << p.bbox_min[2] << ',' << p.bbox_max[0] << ',' << p.bbox_max[1] << ','
          << p.bbox_max[2] << "\n";
  }
}

}  // namespace lmlcc
