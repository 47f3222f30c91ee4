#include "lmlcc/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/text.hpp"
#include "lmlcc/preprocess/volume_ops.hpp"

namespace lmlcc {
namespace {

void check_inputs(std::span<const int> labels, std::span<const double> probs) {
  if (labels.size() != probs.size()) {
    throw SizeMismatchError("labels and scores differ in length: " + std::to_string(labels.size()) + " vs " +
                            std::to_string(probs.size()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("label at position " + std::to_string(i) + " is " + std::to_string(labels[i]) +
                            ", expected 0 or 1");
    }
    if (!std::isfinite(probs[i])) throw ValidationError("score at position " + std::to_string(i) + " is not finite");
  }
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string metric_field(const std::optional<double>& v) { return v ? text::format_double(*v) : "undefined"; }

std::string percent(const std::optional<double>& v) { return v ? text::format_fixed(100.0 * *v, 2) + "%" : "undefined"; }

}  // namespace

ConfusionCounts confusion(std::span<const int> labels, std::span<const double> probs, double threshold) {
  check_inputs(labels, probs);
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return c;
}

BasicMetrics basic_metrics(const ConfusionCounts& c) {
  BasicMetrics m;
  m.acc = ratio(c.tp + c.tn, c.total());
  m.pre = ratio(c.tp, c.tp + c.fp);
  m.sen = ratio(c.tp, c.tp + c.fn);
  m.spe = ratio(c.tn, c.tn + c.fp);
  return m;
}

RocResult roc_auc(std::span<const int> labels, std::span<const double> probs) {
  check_inputs(labels, probs);
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InsufficientDataError("ROC needs at least one positive and one negative sample");
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

  RocResult r;
  r.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area, in units of pairs
  std::size_t i = 0;
  while (i < order.size()) {
    const double score = probs[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    while (i < order.size() && probs[order[i]] == score) {
      ++(labels[order[i]] == 1 ? tp : fp);
      ++i;
    }
    area2 += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    r.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                        static_cast<double>(tp) / static_cast<double>(n_pos), score});
  }
  r.auc = area2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return r;
}

EvalReport evaluate(std::span<const int> labels, std::span<const double> probs, double threshold) {
  EvalReport rep;
  rep.threshold = threshold;
  rep.counts = confusion(labels, probs, threshold);
  rep.metrics = basic_metrics(rep.counts);
  auto roc = roc_auc(labels, probs);
  rep.roc = std::move(roc.points);
  rep.auc = roc.auc;
  return rep;
}

std::string format_report_csv(const EvalReport& r) {
  std::ostringstream out;
  out << kReportHeader << "\n"
      << r.counts.total() << ',' << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn
      << ',' << metric_field(r.metrics.acc) << ',' << metric_field(r.metrics.pre) << ','
      << metric_field(r.metrics.sen) << ',' << metric_field(r.metrics.spe) << ',' << text::format_double(r.auc)
      << ',' << text::format_double(r.threshold) << "\n";
  return out.str();
}

std::string format_roc_csv(const std::vector<RocPoint>& roc) {
  std::ostringstream out;
  out << kRocHeader << "\n";
  for (const auto& p : roc) {
    out << text::format_double(p.fpr) << ',' << text::format_double(p.tpr) << ','
        << (std::isinf(p.threshold) ? std::string("inf") : text::format_double(p.threshold)) << "\n";
  }
  return out.str();
}

std::string format_report_text(const EvalReport& r) {
  std::ostringstream out;
  out << "samples      " << r.counts.total() << "\n"
      << "confusion    tp=" << r.counts.tp << " tn=" << r.counts.tn << " fp=" << r.counts.fp
      << " fn=" << r.counts.fn << "\n"
      << "accuracy     " << percent(r.metrics.acc) << "\n"
      << "precision    " << percent(r.metrics.pre) << "\n"
      << "sensitivity  " << percent(r.metrics.sen) << "\n"
      << "specificity  " << percent(r.metrics.spe) << "\n"
      << "auc          " << text::format_fixed(r.auc, 4) << "\n";
  if (r.learned_cuts) {
    out << "cuts         ";
    if (r.learned_cuts->empty()) out << "(none)";
    for (std::size_t i = 0; i < r.learned_cuts->size(); ++i) {
      const double c = (*r.learned_cuts)[i];
      if (i) out << "; ";
      out << text::format_fixed(c, 4) << " (" << text::format_fixed(kHuLow + (kHuHigh - kHuLow) * c, 1) << " HU)";
    }
    out << "\n";
  }
  return out.str();
}

void write_report(const std::filesystem::path& report_csv, const std::filesystem::path& roc_csv,
                  const EvalReport& report) {
  std::ofstream a(report_csv, std::ios::binary | std::ios::trunc);
  if (!a) throw IoError("cannot write " + report_csv.string());
  a << format_report_csv(report);
  std::ofstream b(roc_csv, std::ios::binary | std::ios::trunc);
  if (!b) throw IoError("cannot write " + roc_csv.string());
  b << format_roc_csv(report.roc);
}

}  // namespace lmlcc
