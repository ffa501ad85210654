#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eds/forecast.hpp"
#include "eds/parallel.hpp"
#include "eds/preprocess.hpp"
#include "eds/series.hpp"

namespace eds {

struct DetectorConfig {
  std::size_t window_size = 1000;
  std::size_t n_iterations_refit = 5;
  ForecastModelSpec model;
  std::vector<Preprocessor> preprocessors;
  double n_standard_deviations = 2.0;
  double event_threshold = 0.7;
  std::size_t bed_window_size = 10;
  // Probability that a trial is an outlier under normal behaviour.
  double trial_success_prob = 0.5;
  // Absolute outlier threshold per column (preprocessed scale); replaces the
  // sd-multiplier rule for the named columns.
  std::map<std::string, double> threshold_override;
  // Rows inside an Event episode are treated as missing when a later window
  // trains, for each column whose own outliers there would raise the event
  // (and likewise the outliers at the onset of such a column), so an ongoing
  // event does not teach the model its own shape. A column whose masked share
  // of the window would exceed max_masked_fraction trains unmasked, which lets
  // a persistent baseline shift be absorbed.
  bool mask_outliers = true;
  double max_masked_fraction = 0.5;

  // Throws ConfigError on violated constraints; returns soft warnings.
  std::vector<std::string> validate() const;

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

enum class Label { Warmup, Normal, Event };
const char* to_string(Label label) noexcept;
Label parse_label_name(std::string_view name);

struct ClassificationRecord {
  std::size_t index = 0;
  std::string timestamp;
  std::vector<std::optional<double>> residuals;  // per quality column; empty when unmeasured
  std::vector<bool> outliers;
  bool is_outlier = false;
  double event_probability = 0.0;
  Label label = Label::Warmup;

  friend bool operator==(const ClassificationRecord&, const ClassificationRecord&) = default;
};

struct WindowDiagnostic {
  std::size_t window_start = 0;
  std::size_t window_end = 0;
  std::string message;

  friend bool operator==(const WindowDiagnostic&, const WindowDiagnostic&) = default;
};

struct DetectionResult {
  DetectorConfig config;
  std::vector<std::string> columns;  // quality columns, residual order
  std::vector<ClassificationRecord> records;
  std::vector<WindowDiagnostic> diagnostics;
  std::vector<std::string> warnings;

  std::vector<bool> predicted_events() const;
  std::vector<double> probabilities() const;
  // True for rows that carry a prediction (not Warmup).
  std::vector<bool> scored_mask() const;

  friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

// Binomial CDF P(X <= outliers) for X ~ Bin(window, p).
double bed_probability(std::size_t outliers, std::size_t window, double p = 0.5);

struct OutlierVerdict {
  std::vector<bool> per_column;
  bool any = false;
};

// |r_j| > tau_j per column (strict); unmeasured residuals are never outliers.
OutlierVerdict classify_residuals(std::span<const std::optional<double>> residuals,
                                  std::span<const double> thresholds);

// Sliding-window count of outliers feeding the binomial discriminator. Until
// `capacity` verdicts have been pushed the window length is the number pushed.
class BedBuffer {
public:
  explicit BedBuffer(std::size_t capacity) : capacity_(capacity), ring_(capacity, false) {}

  void push(bool outlier);
  std::size_t count() const noexcept { return count_; }
  std::size_t length() const noexcept { return filled_; }

private:
  std::size_t capacity_;
  std::vector<bool> ring_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::size_t count_ = 0;
};

// Floor applied to sd-derived thresholds so constant signals stay inliers.
inline constexpr double kMinOutlierThreshold = 1e-9;

// Checks that `config` can run on `frame` (the preconditions of detect_events)
// without running it. Returns the soft warnings detect_events would report.
std::vector<std::string> check_applicable(const SeriesFrame& frame, const DetectorConfig& config);

// Under Execution::Parallel windows are fitted concurrently when they are
// independent (mask_outliers off), otherwise columns within a window are.
// The binomial pass is sequential. Both policies return identical results.
DetectionResult detect_events(const SeriesFrame& frame, const DetectorConfig& config,
                              Execution exec = Execution::Parallel);

}  // namespace eds
