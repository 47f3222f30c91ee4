#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lmlcc/ingest/ct_volume.hpp"

namespace lmlcc {

/// One annotated nodule with the malignancy scores (1..5) given by each
/// radiologist who marked it.
struct NoduleRecord {
  std::string series_id;
  std::string nodule_id;
  Vec3 center_world{};
  double diameter_mm = 0.0;
  std::vector<int> ratings;
};

inline constexpr const char* kRatingsHeader =
    "series_id,nodule_id,coordX,coordY,coordZ,diameter_mm,ratings";

/// Parses a ratings CSV. Ratings are pipe-separated ("4|5|3"), may be empty.
/// Errors name the 1-based line number of the offending row.
std::vector<NoduleRecord> read_ratings(const std::filesystem::path& csv_path);
std::vector<NoduleRecord> parse_ratings(const std::string& csv_text);

void write_ratings(const std::filesystem::path& csv_path, const std::vector<NoduleRecord>& records);

}  // namespace lmlcc
