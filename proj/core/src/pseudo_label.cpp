#include "lmlcc/semisup/pseudo_label.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/seed.hpp"
#include "lmlcc/common/text.hpp"

namespace lmlcc {

std::vector<PseudoLabel> assign_pseudo_labels(std::span<const std::string> nodule_ids, std::span<const double> probs,
                                              double threshold) {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw ConfigError("pseudo-label threshold must lie in (0.5, 1], got " + text::format_double(threshold));
  }
  if (nodule_ids.size() != probs.size()) throw SizeMismatchError("nodule ids and probabilities differ in length");
  std::vector<PseudoLabel> out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("probability for " + nodule_ids[i] + " is outside [0, 1]");
    }
    if (p >= threshold) {
      out.push_back({nodule_ids[i], 1, p});
    } else if (1.0 - p >= threshold) {
      out.push_back({nodule_ids[i], 0, 1.0 - p});
    }
  }
  return out;
}

double PseudoLabelRound::mean_confidence() const {
  if (accepted.empty()) return 0.0;
  double s = 0.0;
  for (const auto& a : accepted) s += a.confidence;
  return s / static_cast<double>(accepted.size());
}

void SemisupConfig::validate() const {
  if (!(threshold > 0.5 && threshold <= 1.0)) throw ConfigError("pseudo-label threshold must lie in (0.5, 1]");
  if (max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  if (min_new < 1) throw ConfigError("min_new must be at least 1");
}

SemisupResult semisup_loop(std::span<const Patch> train_set, std::span<const Patch> val_set,
                           std::span<const Patch> unlabeled, const LmlccConfig& model_config,
                           const TrainConfig& train_config, const SemisupConfig& semisup_config,
                           const RoundCallback& on_round) {
  semisup_config.validate();
  if (train_set.empty()) throw InsufficientDataError("semi-supervised loop needs a non-empty training set");

  std::set<std::string> labeled_ids;
  for (const auto& p : train_set) labeled_ids.insert(p.nodule_id);
  for (const auto& p : val_set) labeled_ids.insert(p.nodule_id);
  for (const auto& p : unlabeled) {
    if (labeled_ids.count(p.nodule_id)) {
      throw ValidationError("nodule " + p.nodule_id + " is both labeled and in the unlabeled pool");
    }
  }

  std::vector<Patch> current(train_set.begin(), train_set.end());
  std::vector<Patch> pool;
  pool.reserve(unlabeled.size());
  for (const auto& p : unlabeled) {
    Patch q = p;
    q.label.reset();
    pool.push_back(std::move(q));
  }

  SemisupResult result;
  auto fit = [&](int round) {
    TrainConfig tc = train_config;
    tc.seed = mix_seed(train_config.seed, static_cast<std::uint64_t>(round), 0x55);
    LmlccModel<float> model(model_config, mix_seed(train_config.seed, static_cast<std::uint64_t>(round), 0x33));
    train(model, current, val_set, tc);
    result.train_sizes.push_back(current.size());
    return model;
  };

  bool added_in_last_round = false;
  for (int round = 1; round <= semisup_config.max_rounds; ++round) {
    auto model = fit(round);
    const auto checkpoint = model.to_checkpoint();
    if (round == 1) result.supervised_checkpoint = checkpoint;
    result.final_checkpoint = checkpoint;

    PseudoLabelRound info;
    info.round_index = round;
    info.train_size = current.size();
    info.threshold = semisup_config.threshold;
    if (!pool.empty()) {
      const auto probs = predict(model, pool);
      std::vector<std::string> ids;
      ids.reserve(pool.size());
      for (const auto& p : pool) ids.push_back(p.nodule_id);
      info.accepted = assign_pseudo_labels(ids, probs, semisup_config.threshold);
    }

    std::map<std::string, int> accepted;
    for (const auto& a : info.accepted) accepted[a.nodule_id] = a.label;
    std::vector<Patch> remaining;
    for (auto& p : pool) {
      const auto it = accepted.find(p.nodule_id);
      if (it == accepted.end()) {
        remaining.push_back(std::move(p));
      } else {
        p.label = it->second;
        current.push_back(std::move(p));
      }
    }
    pool = std::move(remaining);
    info.n_newly_labeled = info.accepted.size();
    info.n_remaining_unlabeled = pool.size();
    result.pseudo_labels.insert(result.pseudo_labels.end(), info.accepted.begin(), info.accepted.end());
    added_in_last_round = !info.accepted.empty();
    result.rounds.push_back(info);
    if (on_round) on_round(info);
    if (info.n_newly_labeled < semisup_config.min_new) break;
  }

  if (added_in_last_round) {
    const auto final_model = fit(static_cast<int>(result.rounds.size()) + 1);
    result.final_checkpoint = final_model.to_checkpoint();
  }
  return result;
}

std::string format_round_history(const std::vector<PseudoLabelRound>& rounds) {
  std::string out = std::string(kRoundHistoryHeader) + "\n";
  for (const auto& r : rounds) {
    out += std::to_string(r.round_index) + "," + std::to_string(r.train_size) + "," +
           std::to_string(r.n_newly_labeled) + "," + std::to_string(r.n_remaining_unlabeled) + "," +
           text::format_double(r.mean_confidence()) + "\n";
  }
  return out;
}

void write_round_history(const std::filesystem::path& path, const std::vector<PseudoLabelRound>& rounds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_round_history(rounds);
}

std::string to_string(LabelProvenance p) {
  switch (p) {
    case LabelProvenance::Radiologist: return "radiologist";
    case LabelProvenance::Pseudo: return "pseudo";
    case LabelProvenance::None: return "none";
  }
  return "none";
}

std::vector<PseudoManifestEntry> merge_pseudo_labels(const std::vector<ManifestEntry>& manifest,
                                                     const std::vector<PseudoLabel>& pseudo_labels) {
  std::map<std::string, const PseudoLabel*> by_id;
  for (const auto& p : pseudo_labels) {
    if (!by_id.emplace(p.nodule_id, &p).second) throw DuplicateError("nodule " + p.nodule_id + " pseudo-labeled twice");
  }
  std::vector<PseudoManifestEntry> out;
  out.reserve(manifest.size());
  std::size_t used = 0;
  for (const auto& e : manifest) {
    PseudoManifestEntry pe{e, e.label ? LabelProvenance::Radiologist : LabelProvenance::None};
    const auto it = by_id.find(e.nodule_id);
    if (it != by_id.end()) {
      if (e.label || e.split != SplitRole::Unlabeled) {
        throw ValidationError("pseudo-label for " + e.nodule_id + " would overwrite a radiologist label");
      }
      pe.entry.split = SplitRole::Train;
      pe.entry.label = it->second->label;
      pe.provenance = LabelProvenance::Pseudo;
      ++used;
    }
    out.push_back(std::move(pe));
  }
  if (used != by_id.size()) throw ValidationError("pseudo-labels reference nodules missing from the manifest");
  return out;
}

std::string format_pseudo_manifest(const std::vector<PseudoManifestEntry>& entries) {
  std::string out = std::string(kPseudoManifestHeader) + "\n";
  for (const auto& e : entries) {
    out += e.entry.nodule_id + "," + to_string(e.entry.split) + "," +
           (e.entry.label ? std::to_string(*e.entry.label) : std::string()) + "," + to_string(e.provenance) + "\n";
  }
  return out;
}

void write_pseudo_manifest(const std::filesystem::path& path, const std::vector<PseudoManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_pseudo_manifest(entries);
}

}  // namespace lmlcc
