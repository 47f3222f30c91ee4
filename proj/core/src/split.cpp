#include "lmlcc/labeling/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/text.hpp"

namespace lmlcc {
namespace {

std::size_t round_fraction(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

// Splits `total` across classes proportionally to `sizes` (largest remainder,
// ties to the lower class index) so the quotas sum to `total` exactly.
std::vector<std::size_t> allocate(const std::vector<std::size_t>& sizes, std::size_t total) {
  std::size_t n = 0;
  for (auto s : sizes) n += s;
  std::vector<std::size_t> quota(sizes.size(), 0);
  if (n == 0) return quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(sizes[c]) / static_cast<double>(n);
    quota[c] = std::min(sizes[c], static_cast<std::size_t>(std::floor(exact)));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size() * 2; ++i) {
    const auto c = remainders[i % remainders.size()].second;
    if (quota[c] < sizes[c]) {
      ++quota[c];
      ++assigned;
    }
  }
  return quota;
}

}  // namespace

std::string to_string(SplitRole role) {
  switch (role) {
    case SplitRole::Train: return "train";
    case SplitRole::Val: return "val";
    case SplitRole::Test: return "test";
    case SplitRole::Unlabeled: return "unlabeled";
  }
  return "unknown";
}

SplitRole parse_split_role(const std::string& s) {
  if (s == "train") return SplitRole::Train;
  if (s == "val") return SplitRole::Val;
  if (s == "test") return SplitRole::Test;
  if (s == "unlabeled") return SplitRole::Unlabeled;
  throw ParseError("unknown split '" + s + "'");
}

DatasetSplit split_by_nodule(const std::vector<LabeledNodule>& labeled, std::uint64_t seed) {
  if (labeled.size() < 5) {
    throw InsufficientDataError("at least 5 labeled nodules are required to split, got " +
                                std::to_string(labeled.size()));
  }
  std::vector<std::vector<std::string>> by_class(2);
  std::unordered_set<std::string> seen;
  for (const auto& n : labeled) {
    if (n.label == MalignancyLabel::Ambiguous) {
      throw ValidationError("nodule '" + n.nodule_id + "' is ambiguous and cannot be split");
    }
    if (!seen.insert(n.nodule_id).second) {
      throw DuplicateError("duplicate nodule_id '" + n.nodule_id + "'");
    }
    by_class[static_cast<int>(n.label)].push_back(n.nodule_id);
  }

  // Input order must not matter: sort, then shuffle each class from the seed.
  std::mt19937_64 rng(seed);
  for (auto& ids : by_class) {
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
  }

  const std::size_t n = labeled.size();
  const std::size_t n_test = round_fraction(n, 0.2);
  const std::size_t n_val = round_fraction(n - n_test, 0.2);
  const std::vector<std::size_t> sizes{by_class[0].size(), by_class[1].size()};
  const auto test_quota = allocate(sizes, n_test);
  const std::vector<std::size_t> rest{sizes[0] - test_quota[0], sizes[1] - test_quota[1]};
  const auto val_quota = allocate(rest, n_val);

  DatasetSplit split;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& ids = by_class[c];
    std::size_t i = 0;
    for (; i < test_quota[c]; ++i) split.test_ids.push_back(ids[i]);
    for (std::size_t k = 0; k < val_quota[c]; ++k, ++i) split.val_ids.push_back(ids[i]);
    for (; i < ids.size(); ++i) split.train_ids.push_back(ids[i]);
  }
  for (auto* v : {&split.train_ids, &split.val_ids, &split.test_ids}) std::sort(v->begin(), v->end());
  return split;
}

DatasetSplit make_split(const std::vector<LabeledNodule>& nodules, std::uint64_t seed) {
  std::vector<LabeledNodule> labeled;
  std::vector<std::string> unlabeled;
  for (const auto& n : nodules) {
    if (n.label == MalignancyLabel::Ambiguous) {
      unlabeled.push_back(n.nodule_id);
    } else {
      labeled.push_back(n);
    }
  }
  DatasetSplit split = split_by_nodule(labeled, seed);
  std::sort(unlabeled.begin(), unlabeled.end());
  split.unlabeled_ids = std::move(unlabeled);
  return split;
}

std::vector<ManifestEntry> to_manifest(const DatasetSplit& split,
                                       const std::vector<LabeledNodule>& nodules) {
  std::unordered_map<std::string, MalignancyLabel> labels;
  for (const auto& n : nodules) labels[n.nodule_id] = n.label;
  std::vector<ManifestEntry> out;
  auto emit = [&](const std::vector<std::string>& ids, SplitRole role) {
    for (const auto& id : ids) {
      ManifestEntry e{id, role, std::nullopt};
      const auto it = labels.find(id);
      if (role != SplitRole::Unlabeled && it != labels.end() &&
          it->second != MalignancyLabel::Ambiguous) {
        e.label = static_cast<int>(it->second);
      }
      out.push_back(std::move(e));
    }
  };
  emit(split.train_ids, SplitRole::Train);
  emit(split.val_ids, SplitRole::Val);
  emit(split.test_ids, SplitRole::Test);
  emit(split.unlabeled_ids, SplitRole::Unlabeled);
  return out;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& e : entries) {
    out += e.nodule_id + "," + to_string(e.split) + ",";
    if (e.label) out += std::to_string(*e.label);
    out += "\n";
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_manifest(entries);
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> out;
  std::unordered_set<std::string> seen;
  const auto lines = text::split(text, '\n');
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const std::string where = "manifest line " + std::to_string(i + 1);
    if (!header) {
      if (line != kManifestHeader) throw ParseError(where + ": expected header '" + kManifestHeader + "'");
      header = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw ParseError(where + ": expected 3 fields");
    ManifestEntry e;
    e.nodule_id = std::string(text::trim(f[0]));
    try {
      e.split = parse_split_role(std::string(text::trim(f[1])));
      const auto lab = text::trim(f[2]);
      if (!lab.empty()) {
        const auto v = text::parse_int(lab, "label");
        if (v != 0 && v != 1) throw ValidationError("label must be 0 or 1");
        e.label = static_cast<int>(v);
      }
    } catch (const Error& err) {
      throw ParseError(where + ": " + err.what());
    }
    if (e.split != SplitRole::Unlabeled && !e.label) {
      throw ParseError(where + ": labeled split without a label");
    }
    if (!seen.insert(e.nodule_id).second) {
      throw DuplicateError(where + ": duplicate nodule_id '" + e.nodule_id + "'");
    }
    out.push_back(std::move(e));
  }
  if (!header) throw ParseError("manifest line 1: missing header");
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

}  // namespace lmlcc
