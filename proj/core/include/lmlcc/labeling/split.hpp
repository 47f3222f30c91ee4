#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lmlcc/labeling/consensus.hpp"

namespace lmlcc {

struct LabeledNodule {
  std::string nodule_id;
  MalignancyLabel label = MalignancyLabel::Ambiguous;
};

enum class SplitRole { Train, Val, Test, Unlabeled };

std::string to_string(SplitRole role);
SplitRole parse_split_role(const std::string& s);

/// Nodule-id level partition. Every id appears in exactly one set.
struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> unlabeled_ids;
};

/// Stratified by label: round(20%) of labeled nodules go to test, then
/// round(20%) of the rest to validation, the remainder to training. Class
/// quotas are allocated by largest remainder so totals are exact.
/// Throws ValidationError on ambiguous input and InsufficientDataError for
/// fewer than 5 nodules.
DatasetSplit split_by_nodule(const std::vector<LabeledNodule>& labeled, std::uint64_t seed);

/// Routes ambiguous nodules to the unlabeled pool and splits the rest.
DatasetSplit make_split(const std::vector<LabeledNodule>& nodules, std::uint64_t seed);

/// One row of the split manifest CSV (`nodule_id,split,label`).
struct ManifestEntry {
  std::string nodule_id;
  SplitRole split = SplitRole::Unlabeled;
  std::optional<int> label;  // 0 benign, 1 malignant, empty when unlabeled
};

inline constexpr const char* kManifestHeader = "nodule_id,split,label";

std::vector<ManifestEntry> to_manifest(const DatasetSplit& split,
                                       const std::vector<LabeledNodule>& nodules);
std::string format_manifest(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

}  // namespace lmlcc
