#include "eds/evaluate.hpp"

#include <algorithm>
#include <numeric>

#include "eds/error.hpp"

namespace eds {

namespace {

std::vector<bool> resolve_mask(const std::vector<bool>& mask, std::size_t n) {
  if (mask.empty()) return std::vector<bool>(n, true);
  if (mask.size() != n) throw DataError("mask length differs from label length");
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) throw DataError("evaluation mask is empty");
  return mask;
}

}  // namespace

ConfusionMatrix confusion_matrix(const std::vector<bool>& predicted, const std::vector<bool>& actual,
                                 const std::vector<bool>& mask) {
  if (predicted.size() != actual.size()) throw DataError("predicted and actual labels differ in length");
  if (predicted.empty()) throw DataError("nothing to evaluate");
  const std::vector<bool> m = resolve_mask(mask, actual.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!m[i]) continue;
    if (predicted[i]) {
      actual[i] ? ++cm.tp : ++cm.fp;
    } else {
      actual[i] ? ++cm.fn : ++cm.tn;
    }
  }
  return cm;
}

SummaryStats summary_stats(const ConfusionMatrix& cm) {
  SummaryStats s;
  const double p = static_cast<double>(cm.positives());
  const double n = static_cast<double>(cm.negatives());
  if (cm.total() > 0) s.accuracy = static_cast<double>(cm.tp + cm.tn) / (p + n);
  if (cm.positives() > 0) s.sensitivity = static_cast<double>(cm.tp) / p;
  if (cm.negatives() > 0) {
    s.fpr = static_cast<double>(cm.fp) / n;
    s.specificity = 1.0 - *s.fpr;
  }
  return s;
}

RocCurve roc_curve(std::span<const double> probabilities, const std::vector<bool>& actual,
                   const std::vector<bool>& mask) {
  if (probabilities.size() != actual.size()) throw DataError("probabilities and labels differ in length");
  if (actual.empty()) throw DataError("nothing to evaluate");
  const std::vector<bool> m = resolve_mask(mask, actual.size());

  std::vector<std::pair<double, bool>> rows;
  for (std::size_t i = 0; i < actual.size(); ++i)
    if (m[i]) rows.emplace_back(probabilities[i], actual[i]);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  const std::size_t pos = static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.second; }));
  const std::size_t neg = rows.size() - pos;

  // Descending thresholds: distinct values, the fixed 0 and 1, and a final one
  // below every value so the sweep ends with everything predicted positive.
  std::vector<double> thresholds;
  for (const auto& r : rows) thresholds.push_back(r.first);
  thresholds.push_back(0.0);
  thresholds.push_back(1.0);
  thresholds.push_back(std::min(0.0, rows.back().first) - 1.0);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve curve;
  std::size_t idx = 0, tp = 0, fp = 0;
  for (double t : thresholds) {
    while (idx < rows.size() && rows[idx].first > t) {
      rows[idx].second ? ++tp : ++fp;
      ++idx;
    }
    const RocPoint pt{t, neg ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0,
                      pos ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0};
    if (!curve.points.empty() && curve.points.back().fpr == pt.fpr && curve.points.back().tpr == pt.tpr) continue;
    curve.points.push_back(pt);
  }

  if (pos > 0 && neg > 0) {
    double auc = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      const auto& a = curve.points[i - 1];
      const auto& b = curve.points[i];
      auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    curve.auc = auc;
  }
  return curve;
}

}  // namespace eds
