#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lmlcc {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Predicted positive when p >= threshold. Labels must be 0 or 1.
ConfusionCounts confusion(std::span<const int> labels, std::span<const double> probs, double threshold = 0.5);

/// Accuracy, precision, sensitivity and specificity. A metric whose
/// denominator is zero is left empty.
struct BasicMetrics {
  std::optional<double> acc;
  std::optional<double> pre;
  std::optional<double> sen;
  std::optional<double> spe;
};

BasicMetrics basic_metrics(const ConfusionCounts& c);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0,0) vertex
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// One vertex per distinct score, swept from high to low, so tied scores
/// move both coordinates at once. AUC by the trapezoidal rule, which equals
/// the Mann-Whitney statistic with ties counted as one half. Throws
/// InsufficientDataError unless both classes are present.
RocResult roc_auc(std::span<const int> labels, std::span<const double> probs);

struct EvalReport {
  ConfusionCounts counts;
  BasicMetrics metrics;
  std::vector<RocPoint> roc;
  double auc = 0.0;
  double threshold = 0.5;
  std::optional<std::vector<double>> learned_cuts;
};

EvalReport evaluate(std::span<const int> labels, std::span<const double> probs, double threshold = 0.5);

inline constexpr const char* kReportHeader = "n,tp,tn,fp,fn,acc,pre,sen,spe,auc,threshold";
inline constexpr const char* kRocHeader = "fpr,tpr,threshold";

/// Metrics row; undefined metrics are written as "undefined".
std::string format_report_csv(const EvalReport& report);
std::string format_roc_csv(const std::vector<RocPoint>& roc);
/// Human-readable summary, including learned cuts in normalized units and HU.
std::string format_report_text(const EvalReport& report);
void write_report(const std::filesystem::path& report_csv, const std::filesystem::path& roc_csv,
                  const EvalReport& report);

}  // namespace lmlcc
