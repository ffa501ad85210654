#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eds/series.hpp"

namespace eds {

enum class PreprocessKind {
  ImputeInterpolation,
  ImputeLOCF,
  ImputeMA,
  ImputeMean,
  ImputeReplace,
  NormalizeZScore,
  NormalizeMinMax,
};

struct Preprocessor {
  PreprocessKind kind = PreprocessKind::ImputeInterpolation;
  std::size_t ma_window = 4;     // ImputeMA: neighbours taken on each side
  double replace_value = 0.0;    // ImputeReplace
  double range_lo = 0.0;         // NormalizeMinMax target range
  double range_hi = 1.0;

  bool is_imputer() const noexcept { return kind < PreprocessKind::NormalizeZScore; }
  bool is_normalizer() const noexcept { return !is_imputer(); }
  void validate() const;

  friend bool operator==(const Preprocessor&, const Preprocessor&) = default;
};

// Accepts "ImputeTSInterpolation", "ImputeTSLOCF", "ImputeTSMA", "ImputeTSMean",
// "ImputeTSReplace", "NormalizeZScore", "NormalizeMinMax" and short aliases
// ("interpolation", "locf", "zscore", "minmax", ...), case-insensitive.
PreprocessKind parse_preprocess_kind(std::string_view name);
const char* to_string(PreprocessKind kind) noexcept;

// Fills every unobserved cell; observed cells are copied through unchanged.
// Throws DataError when nothing is observed.
std::vector<double> impute(ColumnView column, const Preprocessor& method);

struct NormalizationState {
  PreprocessKind kind = PreprocessKind::NormalizeZScore;
  // z-score: centre = mean, scale = sample sd. min-max: centre = min, scale = max - min.
  double centre = 0.0;
  double scale = 1.0;
  double range_lo = 0.0;
  double range_hi = 1.0;
  bool degenerate = false;
};

NormalizationState fit_normalizer(std::span<const double> column, const Preprocessor& method);
double apply_normalizer(double value, const NormalizationState& state) noexcept;
double invert_normalizer(double value, const NormalizationState& state) noexcept;
std::vector<double> apply_normalizer(std::span<const double> column, const NormalizationState& state);
std::vector<double> invert_normalizer(std::span<const double> column, const NormalizationState& state);

}  // namespace eds
