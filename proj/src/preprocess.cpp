#include "eds/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "eds/error.hpp"

namespace eds {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

double observed_mean(ColumnView column) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.is_observed(i)) {
      sum += column.values[i];
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace

void Preprocessor::validate() const {
  if (kind == PreprocessKind::ImputeMA && ma_window < 1) throw ConfigError("ImputeTSMA window must be >= 1", "maWindow");
  if (kind == PreprocessKind::NormalizeMinMax && !(range_lo < range_hi))
    throw ConfigError("NormalizeMinMax range requires lo < hi", "minMaxLo");
}

PreprocessKind parse_preprocess_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "imputetsinterpolation" || n == "interpolation" || n == "imputeinterpolation")
    return PreprocessKind::ImputeInterpolation;
  if (n == "imputetslocf" || n == "locf" || n == "imputelocf") return PreprocessKind::ImputeLOCF;
  if (n == "imputetsma" || n == "ma" || n == "imputema") return PreprocessKind::ImputeMA;
  if (n == "imputetsmean" || n == "mean" || n == "imputemean") return PreprocessKind::ImputeMean;
  if (n == "imputetsreplace" || n == "replace" || n == "imputereplace") return PreprocessKind::ImputeReplace;
  if (n == "normalizezscore" || n == "zscore" || n == "z-score") return PreprocessKind::NormalizeZScore;
  if (n == "normalizeminmax" || n == "minmax" || n == "min-max") return PreprocessKind::NormalizeMinMax;
  throw ConfigError("unknown preprocessor '" + std::string(name) + "'", "preprocessors");
}

const char* to_string(PreprocessKind kind) noexcept {
  switch (kind) {
    case PreprocessKind::ImputeInterpolation: return "ImputeTSInterpolation";
    case PreprocessKind::ImputeLOCF: return "ImputeTSLOCF";
    case PreprocessKind::ImputeMA: return "ImputeTSMA";
    case PreprocessKind::ImputeMean: return "ImputeTSMean";
    case PreprocessKind::ImputeReplace: return "ImputeTSReplace";
    case PreprocessKind::NormalizeZScore: return "NormalizeZScore";
    case PreprocessKind::NormalizeMinMax: return "NormalizeMinMax";
  }
  return "?";
}

std::vector<double> impute(ColumnView column, const Preprocessor& method) {
  if (!method.is_imputer()) throw ConfigError(std::string(to_string(method.kind)) + " is not an imputation method");
  method.validate();
  const std::size_t n = column.size();
  if (n == 0 || column.missing_count() == n) throw DataError("cannot impute a column with no observed values");

  std::vector<double> out(column.values.begin(), column.values.end());
  if (column.missing_count() == 0) return out;

  // Observed positions, ascending.
  std::vector<std::size_t> obs;
  for (std::size_t i = 0; i < n; ++i)
    if (column.is_observed(i)) obs.push_back(i);

  auto fill = [&](auto&& value_for) {
    for (std::size_t i = 0; i < n; ++i)
      if (!column.is_observed(i)) out[i] = value_for(i);
  };

  PreprocessKind kind = method.kind;
  if (kind == PreprocessKind::ImputeMA && method.ma_window >= n) {
    spdlog::warn("ImputeTSMA window {} not smaller than column length {}; imputing by mean", method.ma_window, n);
    kind = PreprocessKind::ImputeMean;
  }

  switch (kind) {
    case PreprocessKind::ImputeMean: {
      const double m = observed_mean(column);
      fill([&](std::size_t) { return m; });
      break;
    }
    case PreprocessKind::ImputeReplace:
      fill([&](std::size_t) { return method.replace_value; });
      break;
    case PreprocessKind::ImputeLOCF:
      // Leading gaps have nothing to carry; they take the first observation.
      fill([&](std::size_t i) {
        auto it = std::upper_bound(obs.begin(), obs.end(), i);
        return it == obs.begin() ? out[obs.front()] : out[*(it - 1)];
      });
      break;
    case PreprocessKind::ImputeInterpolation:
      fill([&](std::size_t i) {
        auto it = std::upper_bound(obs.begin(), obs.end(), i);
        if (it == obs.begin()) return out[obs.front()];
        if (it == obs.end()) return out[obs.back()];
        const std::size_t lo = *(it - 1), hi = *it;
        const double t = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
        return out[lo] + t * (out[hi] - out[lo]);
      });
      break;
    case PreprocessKind::ImputeMA: {
      // k nearest observations on each side; the d-th nearest weighs k + 1 - d.
      const std::size_t k = method.ma_window;
      fill([&](std::size_t i) {
        const auto right = std::upper_bound(obs.begin(), obs.end(), i);
        const std::size_t left_avail = static_cast<std::size_t>(right - obs.begin());
        const std::size_t right_avail = static_cast<std::size_t>(obs.end() - right);
        double num = 0.0, den = 0.0;
        for (std::size_t d = 1; d <= k; ++d) {
          const double w = static_cast<double>(k + 1 - d);
          if (d <= left_avail) {
            num += w * column.values[*(right - static_cast<std::ptrdiff_t>(d))];
            den += w;
          }
          if (d <= right_avail) {
            num += w * column.values[*(right + static_cast<std::ptrdiff_t>(d - 1))];
            den += w;
          }
        }
        return num / den;
      });
      break;
    }
    default:
      break;
  }
  return out;
}

NormalizationState fit_normalizer(std::span<const double> column, const Preprocessor& method) {
  if (!method.is_normalizer()) throw ConfigError(std::string(to_string(method.kind)) + " is not a normalization method");
  method.validate();
  if (column.size() < 2) throw DataError("normalizer needs at least 2 values");

  NormalizationState s;
  s.kind = method.kind;
  s.range_lo = method.range_lo;
  s.range_hi = method.range_hi;
  if (method.kind == PreprocessKind::NormalizeZScore) {
    const double n = static_cast<double>(column.size());
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    s.centre = mean;
    s.scale = std::sqrt(ss / (n - 1.0));
    s.degenerate = !(s.scale > 0.0);
  } else {
    const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    s.centre = *mn;
    s.scale = *mx - *mn;
    s.degenerate = !(s.scale > 0.0);
  }
  if (s.degenerate) {
    // Callers running many windows aggregate this into one diagnostic.
    spdlog::debug("{} fitted on a constant column; values map to {}", to_string(method.kind),
                 method.kind == PreprocessKind::NormalizeZScore ? 0.0 : method.range_lo);
  }
  return s;
}

double apply_normalizer(double value, const NormalizationState& s) noexcept {
  if (s.kind == PreprocessKind::NormalizeZScore) {
    return s.degenerate ? 0.0 : (value - s.centre) / s.scale;
  }
  if (s.degenerate) return s.range_lo;
  return s.range_lo + (value - s.centre) / s.scale * (s.range_hi - s.range_lo);
}

double invert_normalizer(double value, const NormalizationState& s) noexcept {
  if (s.kind == PreprocessKind::NormalizeZScore) {
    return s.degenerate ? s.centre : value * s.scale + s.centre;
  }
  if (s.degenerate) return s.centre;
  return s.centre + (value - s.range_lo) / (s.range_hi - s.range_lo) * s.scale;
}

std::vector<double> apply_normalizer(std::span<const double> column, const NormalizationState& state) {
  std::vector<double> out(column.size());
  std::transform(column.begin(), column.end(), out.begin(), [&](double v) { return apply_normalizer(v, state); });
  return out;
}

std::vector<double> invert_normalizer(std::span<const double> column, const NormalizationState& state) {
  std::vector<double> out(column.size());
  std::transform(column.begin(), column.end(), out.begin(), [&](double v) { return invert_normalizer(v, state); });
  return out;
}

}  // namespace eds
