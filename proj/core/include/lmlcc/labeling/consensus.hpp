#pragma once

#include <span>
#include <string>

namespace lmlcc {

enum class MalignancyLabel { Benign = 0, Malignant = 1, Ambiguous = 2 };

std::string to_string(MalignancyLabel label);

struct RatingSummary {
  int n_gt3 = 0;
  int n_eq3 = 0;
  int n_lt3 = 0;
  int n_total = 0;

  friend bool operator==(const RatingSummary&, const RatingSummary&) = default;
};

/// Counts ratings above, at and below 3. Throws ValidationError for ratings outside 1..5.
RatingSummary summarize(std::span<const int> ratings);

/// Majority rule over 2-4 radiologists. Malignant when enough raters score
/// above 3, Benign under the mirrored rule for scores below 3, Ambiguous
/// otherwise (including fewer than 2 or more than 4 raters).
MalignancyLabel consensus_label(std::span<const int> ratings);
MalignancyLabel consensus_label(const RatingSummary& summary);

}  // namespace lmlcc
