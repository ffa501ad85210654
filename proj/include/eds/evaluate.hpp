#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace eds {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t positives() const noexcept { return tp + fn; }
  std::size_t negatives() const noexcept { return fp + tn; }
  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Ratios whose denominator is zero are nullopt.
struct SummaryStats {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> fpr;
};

// An empty mask means "all rows".
ConfusionMatrix confusion_matrix(const std::vector<bool>& predicted, const std::vector<bool>& actual,
                                 const std::vector<bool>& mask = {});
SummaryStats summary_stats(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold = 0.0;  // predicted positive iff probability > threshold
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // FPR non-decreasing
  std::optional<double> auc;     // nullopt when only one class is present
};

RocCurve roc_curve(std::span<const double> probabilities, const std::vector<bool>& actual,
                   const std::vector<bool>& mask = {});

}  // namespace eds
