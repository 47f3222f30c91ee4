#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lmlcc/labeling/split.hpp"
#include "lmlcc/network/trainer.hpp"

namespace lmlcc {

struct PseudoLabel {
  std::string nodule_id;
  int label = 0;
  double confidence = 0.0;  // max(p, 1 - p)
};

/// p >= threshold gives label 1, 1 - p >= threshold gives label 0, anything
/// else stays unlabeled. Threshold must lie in (0.5, 1].
std::vector<PseudoLabel> assign_pseudo_labels(std::span<const std::string> nodule_ids, std::span<const double> probs,
                                              double threshold = 0.9);

struct PseudoLabelRound {
  int round_index = 0;
  std::size_t train_size = 0;  // examples the round's model was trained on
  std::size_t n_newly_labeled = 0;
  std::size_t n_remaining_unlabeled = 0;
  double threshold = 0.9;
  std::vector<PseudoLabel> accepted;

  double mean_confidence() const;
};

struct SemisupConfig {
  double threshold = 0.9;
  int max_rounds = 10;
  std::size_t min_new = 5;

  void validate() const;
};

struct SemisupResult {
  diff::Checkpoint final_checkpoint;
  /// Model of round 1, trained on the radiologist-labeled set only.
  diff::Checkpoint supervised_checkpoint;
  std::vector<PseudoLabelRound> rounds;
  /// Every accepted pseudo-label, in acceptance order.
  std::vector<PseudoLabel> pseudo_labels;
  /// Training-set size used by each model trained, including a final retrain.
  std::vector<std::size_t> train_sizes;
};

using RoundCallback = std::function<void(const PseudoLabelRound&)>;

/// Each round trains a freshly initialized model on the labeled set plus
/// all pseudo-labels accepted so far, predicts the remaining pool and
/// appends the confident predictions. Accepted labels are never revised.
/// Stops when a round accepts fewer than `min_new` or after `max_rounds`;
/// if the last round accepted anything, one more model is trained on the
/// final set. Validation patches only drive checkpoint selection.
SemisupResult semisup_loop(std::span<const Patch> train_set, std::span<const Patch> val_set,
                           std::span<const Patch> unlabeled, const LmlccConfig& model_config,
                           const TrainConfig& train_config, const SemisupConfig& semisup_config,
                           const RoundCallback& on_round = {});

inline constexpr const char* kRoundHistoryHeader = "round,train_size,n_new,n_remaining,mean_confidence";
std::string format_round_history(const std::vector<PseudoLabelRound>& rounds);
void write_round_history(const std::filesystem::path& path, const std::vector<PseudoLabelRound>& rounds);

enum class LabelProvenance { Radiologist, Pseudo, None };
std::string to_string(LabelProvenance p);

struct PseudoManifestEntry {
  ManifestEntry entry;
  LabelProvenance provenance = LabelProvenance::None;
};

inline constexpr const char* kPseudoManifestHeader = "nodule_id,split,label,provenance";

/// The split manifest with accepted pseudo-labels moved into the training
/// split. Throws ValidationError if a pseudo-label targets a nodule that is
/// not in the unlabeled pool.
std::vector<PseudoManifestEntry> merge_pseudo_labels(const std::vector<ManifestEntry>& manifest,
                                                     const std::vector<PseudoLabel>& pseudo_labels);
std::string format_pseudo_manifest(const std::vector<PseudoManifestEntry>& entries);
void write_pseudo_manifest(const std::filesystem::path& path, const std::vector<PseudoManifestEntry>& entries);

}  // namespace lmlcc
