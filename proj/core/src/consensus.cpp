#include "lmlcc/labeling/consensus.hpp"

#include "lmlcc/common/error.hpp"

namespace lmlcc {
namespace {

// Counts on the "decisive" side (above 3 for malignant, below 3 for benign)
// and the number of neutral (== 3) ratings.
bool meets_majority(int decisive, int neutral, int total) {
  switch (total) {
    case 4:
      return decisive >= 3 || (neutral == 1 && decisive >= 2);
    case 3:
      return decisive >= 2;
    case 2:
      return decisive == 2;
    default:
      return false;
  }
}

}  // namespace

std::string to_string(MalignancyLabel label) {
  switch (label) {
    case MalignancyLabel::Benign: return "benign";
    case MalignancyLabel::Malignant: return "malignant";
    case MalignancyLabel::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

RatingSummary summarize(std::span<const int> ratings) {
  RatingSummary s;
  for (const int r : ratings) {
    if (r < 1 || r > 5) throw ValidationError("rating " + std::to_string(r) + " outside 1..5");
    if (r > 3) {
      ++s.n_gt3;
    } else if (r == 3) {
      ++s.n_eq3;
    } else {
      ++s.n_lt3;
    }
    ++s.n_total;
  }
  return s;
}

MalignancyLabel consensus_label(const RatingSummary& s) {
  if (meets_majority(s.n_gt3, s.n_eq3, s.n_total)) return MalignancyLabel::Malignant;
  if (meets_majority(s.n_lt3, s.n_eq3, s.n_total)) return MalignancyLabel::Benign;
  return MalignancyLabel::Ambiguous;
}

MalignancyLabel consensus_label(std::span<const int> ratings) {
  return consensus_label(summarize(ratings));
}

}  // namespace lmlcc
