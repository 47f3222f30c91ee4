#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "lmlcc/common/error.hpp"
#include "lmlcc/labeling/consensus.hpp"
#include "lmlcc/labeling/split.hpp"
#include "support.hpp"

using namespace lmlcc;

TEST_SUITE_BEGIN("labeling");

namespace {

// Rows of the consensus table as (raters, >3, =3, <3) -> label.
const std::map<std::array<int, 4>, MalignancyLabel>& table_rows() {
  static const std::map<std::array<int, 4>, MalignancyLabel> rows = {
      {{4, 4, 0, 0}, MalignancyLabel::Malignant}, {{4, 3, 1, 0}, MalignancyLabel::Malignant},
      {{4, 3, 0, 1}, MalignancyLabel::Malignant}, {{4, 2, 1, 1}, MalignancyLabel::Malignant},
      {{4, 0, 0, 4}, MalignancyLabel::Benign},    {{4, 0, 1, 3}, MalignancyLabel::Benign},
      {{4, 1, 0, 3}, MalignancyLabel::Benign},    {{4, 1, 1, 2}, MalignancyLabel::Benign},
      {{3, 3, 0, 0}, MalignancyLabel::Malignant}, {{3, 2, 1, 0}, MalignancyLabel::Malignant},
      {{3, 2, 0, 1}, MalignancyLabel::Malignant}, {{3, 0, 0, 3}, MalignancyLabel::Benign},
      {{3, 0, 1, 2}, MalignancyLabel::Benign},    {{3, 1, 0, 2}, MalignancyLabel::Benign},
      {{2, 2, 0, 0}, MalignancyLabel::Malignant}, {{2, 0, 0, 2}, MalignancyLabel::Benign},
  };
  return rows;
}

MalignancyLabel oracle(const std::vector<int>& r) {
  int gt = 0, eq = 0, lt = 0;
  for (const int v : r) (v > 3 ? gt : v == 3 ? eq : lt)++;
  const auto it = table_rows().find({static_cast<int>(r.size()), gt, eq, lt});
  return it == table_rows().end() ? MalignancyLabel::Ambiguous : it->second;
}

MalignancyLabel mirrored(MalignancyLabel l) {
  if (l == MalignancyLabel::Malignant) return MalignancyLabel::Benign;
  if (l == MalignancyLabel::Benign) return MalignancyLabel::Malignant;
  return l;
}

std::vector<LabeledNodule> make_nodules(int n_benign, int n_malignant, int n_ambiguous = 0) {
  std::vector<LabeledNodule> out;
  int id = 0;
  auto add = [&](int n, MalignancyLabel l) {
    for (int i = 0; i < n; ++i) out.push_back({"n" + std::to_string(1000 + id++), l});
  };
  add(n_benign, MalignancyLabel::Benign);
  add(n_malignant, MalignancyLabel::Malignant);
  add(n_ambiguous, MalignancyLabel::Ambiguous);
  return out;
}

}  // namespace

TEST_CASE("summarize counts ratings") {
  CHECK(summarize(std::vector<int>{4, 5, 3, 2}) == RatingSummary{2, 1, 1, 4});
  CHECK(summarize(std::vector<int>{}) == RatingSummary{0, 0, 0, 0});
  CHECK(summarize(std::vector<int>{3, 3, 3}) == RatingSummary{0, 3, 0, 3});
  CHECK_THROWS_AS(summarize(std::vector<int>{4, 0}), ValidationError);
  CHECK_THROWS_AS(consensus_label(std::vector<int>{6, 4}), ValidationError);
}

TEST_CASE("consensus label examples") {
  CHECK(consensus_label(std::vector<int>{4, 4, 3, 2}) == MalignancyLabel::Malignant);
  CHECK(consensus_label(std::vector<int>{5, 3, 2, 2}) == MalignancyLabel::Benign);
  CHECK(consensus_label(std::vector<int>{4, 4, 2, 2}) == MalignancyLabel::Ambiguous);
  CHECK(consensus_label(std::vector<int>{4, 4}) == MalignancyLabel::Malignant);
  CHECK(consensus_label(std::vector<int>{5}) == MalignancyLabel::Ambiguous);
  CHECK(consensus_label(std::vector<int>{}) == MalignancyLabel::Ambiguous);
  CHECK(consensus_label(std::vector<int>{3, 3}) == MalignancyLabel::Ambiguous);
  CHECK(consensus_label(std::vector<int>{4, 2}) == MalignancyLabel::Ambiguous);
}

TEST_CASE("every rating sequence of 2 to 4 raters matches the table lookup") {
  std::size_t cases = 0;
  std::set<std::vector<int>> multisets;
  for (int n = 2; n <= 4; ++n) {
    std::vector<int> r(static_cast<std::size_t>(n), 1);
    for (;;) {
      const auto expected = oracle(r);
      CHECK(consensus_label(r) == expected);
      std::vector<int> m(r.size());
      std::transform(r.begin(), r.end(), m.begin(), [](int v) { return 6 - v; });
      CHECK(consensus_label(m) == mirrored(expected));
      auto sorted = r;
      std::sort(sorted.begin(), sorted.end());
      multisets.insert(sorted);
      CHECK(consensus_label(sorted) == expected);
      ++cases;
      std::size_t k = 0;
      while (k < r.size() && r[k] == 5) r[k++] = 1;
      if (k == r.size()) break;
      ++r[k];
    }
  }
  CHECK(cases == 25 + 125 + 625);
  CHECK(multisets.size() == 15 + 35 + 70);
}

TEST_CASE("more than four raters is ambiguous") {
  CHECK(consensus_label(RatingSummary{5, 0, 0, 5}) == MalignancyLabel::Ambiguous);
}

TEST_CASE("split sizes follow the 80/20 rule") {
  const auto s = split_by_nodule(make_nodules(50, 50), 7);
  CHECK(s.test_ids.size() == 20);
  CHECK(s.val_ids.size() == 16);
  CHECK(s.train_ids.size() == 64);
  CHECK(split_by_nodule(make_nodules(279, 279), 1).test_ids.size() == 112);
}

TEST_CASE("splits are deterministic, disjoint and stratified") {
  const auto nodules = make_nodules(37, 63);
  const auto a = split_by_nodule(nodules, 11);
  const auto b = split_by_nodule(nodules, 11);
  CHECK(a.train_ids == b.train_ids);
  CHECK(a.test_ids == b.test_ids);
  CHECK(split_by_nodule(nodules, 12).test_ids != a.test_ids);

  std::set<std::string> seen;
  for (const auto* list : {&a.train_ids, &a.val_ids, &a.test_ids}) {
    for (const auto& id : *list) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == nodules.size());

  std::map<std::string, MalignancyLabel> label;
  for (const auto& n : nodules) label[n.nodule_id] = n.label;
  auto malignant = [&](const std::vector<std::string>& ids) {
    return std::count_if(ids.begin(), ids.end(), [&](const std::string& id) { return label[id] == MalignancyLabel::Malignant; });
  };
  // 63% malignant overall; each split within one nodule of its quota.
  CHECK(std::abs(static_cast<double>(malignant(a.test_ids)) - 0.63 * a.test_ids.size()) <= 1.0);
  CHECK(std::abs(static_cast<double>(malignant(a.val_ids)) - 0.63 * a.val_ids.size()) <= 1.0);
}

TEST_CASE("split errors") {
  CHECK_THROWS_AS(split_by_nodule(make_nodules(2, 2), 0), InsufficientDataError);
  CHECK_THROWS_AS(split_by_nodule(make_nodules(5, 5, 1), 0), ValidationError);
  auto dup = make_nodules(5, 5);
  dup.push_back(dup.front());
  CHECK_THROWS_AS(split_by_nodule(dup, 0), DuplicateError);
}

TEST_CASE("make_split routes ambiguous nodules to the unlabeled pool") {
  const auto nodules = make_nodules(20, 20, 13);
  const auto s = make_split(nodules, 3);
  CHECK(s.unlabeled_ids.size() == 13);
  CHECK(s.train_ids.size() + s.val_ids.size() + s.test_ids.size() == 40);
}

TEST_CASE("manifest round trip") {
  const auto nodules = make_nodules(10, 12, 4);
  const auto manifest = to_manifest(make_split(nodules, 5), nodules);
  CHECK(manifest.size() == nodules.size());
  const auto text = format_manifest(manifest);
  CHECK(text.rfind(std::string(kManifestHeader) + "\n", 0) == 0);
  const auto back = parse_manifest(text);
  REQUIRE(back.size() == manifest.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].nodule_id == manifest[i].nodule_id);
    CHECK(back[i].split == manifest[i].split);
    CHECK(back[i].label == manifest[i].label);
    if (back[i].split == SplitRole::Unlabeled) CHECK_FALSE(back[i].label.has_value());
  }
  test::TempDir dir("manifest");
  write_manifest(dir / "m.csv", manifest);
  CHECK(test::read_text(dir / "m.csv") == text);
  CHECK_THROWS_AS(parse_manifest("nodule_id,split,label\na,bogus,1\n"), ParseError);
}

TEST_SUITE_END();
