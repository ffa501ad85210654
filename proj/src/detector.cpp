#include "eds/detector.hpp"

#include <cstdlib>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "eds/error.hpp"

namespace eds {

namespace {

struct WindowOutcome {
  std::size_t train_start = 0;
  std::size_t horizon_start = 0;
  std::vector<std::vector<std::optional<double>>> residuals;  // [step][column]
  std::vector<OutlierVerdict> verdicts;
  std::vector<WindowDiagnostic> diagnostics;
  std::vector<std::size_t> degenerate_columns;
};

struct PreparedColumn {
  bool usable = false;
  std::vector<double> train;                          // imputed + normalized
  std::vector<std::uint8_t> measured;                 // training cells not filled in
  std::vector<std::optional<double>> horizon;         // normalized observations
};

// `flagged` marks training cells to treat as missing; it is ignored when it
// would hide more than `max_masked` cells or every observation.
PreparedColumn prepare_column(ColumnView train, ColumnView horizon, std::span<const std::uint8_t> flagged,
                              double max_masked, const std::vector<Preprocessor>& steps, bool& degenerate) {
  PreparedColumn out;
  if (train.missing_count() == train.size()) return out;
  out.usable = true;

  std::vector<double> values(train.values.begin(), train.values.end());
  std::vector<std::uint8_t> observed(train.observed.begin(), train.observed.end());
  if (!flagged.empty()) {
    std::size_t masked = 0, remaining = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      masked += observed[i] && flagged[i];
      remaining += observed[i] && !flagged[i];
    }
    if (masked > 0 && remaining > 0 && static_cast<double>(masked) <= max_masked * static_cast<double>(train.size()))
      for (std::size_t i = 0; i < observed.size(); ++i)
        if (flagged[i]) observed[i] = 0;
  }
  out.measured = observed;
  const bool complete = std::all_of(observed.begin(), observed.end(), [](std::uint8_t o) { return o != 0; });
  bool imputed = complete;
  for (const auto& step : steps) {
    if (!step.is_imputer() || imputed) continue;
    values = impute({values, observed}, step);
    std::fill(observed.begin(), observed.end(), std::uint8_t{1});
    imputed = true;
  }
  if (!imputed) values = impute({values, observed}, Preprocessor{PreprocessKind::ImputeInterpolation});

  out.horizon.resize(horizon.size());
  for (std::size_t i = 0; i < horizon.size(); ++i) out.horizon[i] = horizon.at(i);

  for (const auto& step : steps) {
    if (!step.is_normalizer()) continue;
    const NormalizationState state = fit_normalizer(values, step);
    degenerate = degenerate || state.degenerate;
    values = apply_normalizer(values, state);
    for (auto& h : out.horizon)
      if (h) h = apply_normalizer(*h, state);
  }
  out.train = std::move(values);
  return out;
}

// Predictions [column][step] for the usable columns of one window.
std::vector<std::vector<double>> forecast_window(const FittedModel& model, const SeriesMatrix& train,
                                                 const std::vector<const PreparedColumn*>& cols, std::size_t h) {
  if (model.spec.kind != ModelKind::NeuralMultivariate) return predict(model, h).values;

  // Exogenous inputs are the measured horizon values; gaps carry the previous value forward.
  const std::size_t m = cols.size();
  std::vector<std::vector<std::optional<double>>> rows(h, std::vector<std::optional<double>>(m));
  std::vector<double> last(m);
  for (std::size_t k = 0; k < m; ++k) {
    double carry = train.columns[k].back();
    last[k] = carry;
    for (std::size_t i = 0; i < h; ++i) {
      if (cols[k]->horizon[i]) carry = *cols[k]->horizon[i];
      rows[i][k] = carry;
    }
  }
  return predict_multivariate(model, rows, last).values;
}

FittedModel fit_with_fallback(const SeriesMatrix& train, const ForecastModelSpec& spec, WindowOutcome& out,
                              std::size_t train_end, Execution exec) {
  try {
    return fit(train, spec, exec);
  } catch (const std::exception& e) {
    out.diagnostics.push_back({out.train_start, train_end,
                               std::string("fit failed (") + e.what() + "); fell back to Naive"});
    ForecastModelSpec naive = spec;
    naive.kind = ModelKind::Naive;
    return fit(train, naive, Execution::Serial);
  }
}

// Smallest outlier count in `window` trials whose event probability exceeds the
// threshold (window + 1 when none does).
std::size_t onset_count(std::size_t window, const DetectorConfig& config) {
  std::size_t c = 0;
  while (c <= window && !(bed_probability(c, window, config.trial_success_prob) > config.event_threshold)) ++c;
  return c;
}

WindowOutcome run_window(const SeriesFrame& frame, const DetectorConfig& config,
                         const std::vector<std::size_t>& quality, const std::vector<double>& overrides,
                         const std::vector<std::vector<std::uint8_t>>& flagged,
                         const std::vector<std::vector<std::uint8_t>>& recent, std::size_t w, std::size_t h,
                         Execution exec) {
  WindowOutcome out;
  out.train_start = w - config.window_size;
  out.horizon_start = w;
  const WindowView train_view(frame, out.train_start, w);
  const WindowView horizon_view(frame, w, w + h);

  const std::size_t q = quality.size();
  std::vector<PreparedColumn> prepared(q);
  for (std::size_t k = 0; k < q; ++k) {
    bool degenerate = false;
    std::vector<std::uint8_t> mask;
    if (!flagged.empty()) {
      mask.assign(flagged[k].begin() + out.train_start, flagged[k].begin() + w);
      // Outliers in the trailing binomial window may be the onset of an event
      // that has not been labelled yet; they are hidden once the column is
      // within two outliers of crossing the event threshold on its own.
      const std::size_t tail = std::min(config.bed_window_size, config.window_size);
      std::size_t count = 0;
      for (std::size_t t = w - tail; t < w; ++t) count += recent[k][t];
      if (count > 0 && count + 2 >= onset_count(tail, config))
        for (std::size_t t = w - tail; t < w; ++t) mask[t - out.train_start] |= recent[k][t];
    }
    prepared[k] = prepare_column(train_view.column(quality[k]), horizon_view.column(quality[k]), mask,
                                 config.max_masked_fraction, config.preprocessors, degenerate);
    if (degenerate) out.degenerate_columns.push_back(k);
    if (!prepared[k].usable)
      out.diagnostics.push_back({out.train_start, w,
                                 "column '" + frame.column(quality[k]).name +
                                     "' has no observations in the training window; not scored"});
  }

  SeriesMatrix train;
  std::vector<std::size_t> usable;
  std::vector<const PreparedColumn*> cols;
  for (std::size_t k = 0; k < q; ++k) {
    if (!prepared[k].usable) continue;
    usable.push_back(k);
    cols.push_back(&prepared[k]);
    train.names.push_back(frame.column(quality[k]).name);
    train.columns.push_back(prepared[k].train);
    train.measured.push_back(prepared[k].measured);
  }

  out.residuals.assign(h, std::vector<std::optional<double>>(q));
  std::vector<double> thresholds(q, 0.0);
  if (!usable.empty()) {
    ForecastModelSpec spec = config.model;
    if (spec.kind == ModelKind::NeuralMultivariate && usable.size() < 2) spec.kind = ModelKind::Naive;
    FittedModel model = fit_with_fallback(train, spec, out, w, exec);
    std::vector<std::vector<double>> pred;
    try {
      pred = forecast_window(model, train, cols, h);
    } catch (const std::exception& e) {
      out.diagnostics.push_back({out.train_start, w, std::string("forecast failed (") + e.what() +
                                                         "); fell back to Naive"});
      ForecastModelSpec naive = spec;
      naive.kind = ModelKind::Naive;
      model = fit(train, naive, Execution::Serial);
      pred = predict(model, h).values;
    }

    for (std::size_t u = 0; u < usable.size(); ++u) {
      const std::size_t k = usable[u];
      const double sd_rule = config.n_standard_deviations * model.columns[u].residual_sd;
      thresholds[k] = std::isnan(overrides[k]) ? std::max(sd_rule, kMinOutlierThreshold) : overrides[k];
      for (std::size_t i = 0; i < h; ++i) {
        if (const auto& obs = prepared[k].horizon[i]) out.residuals[i][k] = *obs - pred[u][i];
      }
    }
  }
  out.verdicts.reserve(h);
  for (std::size_t i = 0; i < h; ++i) out.verdicts.push_back(classify_residuals(out.residuals[i], thresholds));
  return out;
}

}  // namespace

std::vector<std::string> DetectorConfig::validate() const {
  model.validate();
  for (const auto& p : preprocessors) p.validate();
  if (n_iterations_refit < 1) throw ConfigError("nIterationsRefit must be >= 1", "nIterationsRefit");
  if (window_size < model.min_window())
    throw ConfigError("windowSize " + std::to_string(window_size) + " is below the " + model_name(model.kind) +
                      " minimum of " + std::to_string(model.min_window()),
                      "windowSize");
  if (window_size < 2 && std::any_of(preprocessors.begin(), preprocessors.end(),
                                     [](const Preprocessor& p) { return p.is_normalizer(); }))
    throw ConfigError("normalization needs windowSize >= 2", "windowSize");
  if (!(n_standard_deviations >= 0.0) || !std::isfinite(n_standard_deviations))
    throw ConfigError("nStandardDeviations must be a finite value >= 0", "nStandardDeviations");
  if (!(event_threshold >= 0.0 && event_threshold <= 1.0)) throw ConfigError("eventThreshold must lie in [0, 1]", "eventThreshold");
  if (!(max_masked_fraction >= 0.0 && max_masked_fraction <= 1.0))
    throw ConfigError("maxMaskedFraction must lie in [0, 1]", "maxMaskedFraction");
  if (bed_window_size < 1) throw ConfigError("bedWindowSize must be >= 1", "bedWindowSize");
  if (!(trial_success_prob > 0.0 && trial_success_prob < 1.0))
    throw ConfigError("trialSuccessProb must lie in (0, 1)", "trialSuccessProb");
  for (const auto& [name, tau] : threshold_override)
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("threshold override for '" + name + "' must be >= 0", "thresholdOverride");

  std::vector<std::string> warnings;
  if (bed_window_size > window_size)
    warnings.push_back("bedWindowSize " + std::to_string(bed_window_size) + " exceeds windowSize " +
                       std::to_string(window_size));
  return warnings;
}

const char* to_string(Label label) noexcept {
  switch (label) {
    case Label::Warmup: return "Warmup";
    case Label::Normal: return "Normal";
    case Label::Event: return "Event";
  }
  return "?";
}

Label parse_label_name(std::string_view name) {
  if (name == "Warmup") return Label::Warmup;
  if (name == "Normal") return Label::Normal;
  if (name == "Event") return Label::Event;
  throw DataError("unknown label '" + std::string(name) + "'");
}

std::vector<bool> DetectionResult::predicted_events() const {
  std::vector<bool> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].label == Label::Event;
  return out;
}

std::vector<double> DetectionResult::probabilities() const {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].event_probability;
  return out;
}

std::vector<bool> DetectionResult::scored_mask() const {
  std::vector<bool> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].label != Label::Warmup;
  return out;
}

double bed_probability(std::size_t outliers, std::size_t window, double p) {
  if (window == 0) throw std::invalid_argument("binomial window must be >= 1");
  if (outliers > window) throw std::invalid_argument("outlier count exceeds binomial window");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("trial probability must lie in (0, 1)");
  if (outliers == window) return 1.0;

  if (p == 0.5 && window <= 63) {
    // Exact: sum of C(n, i) over i <= r, scaled by 2^-n.
    unsigned __int128 coeff = 1, sum = 0;
    for (std::size_t i = 0; i <= outliers; ++i) {
      sum += coeff;
      coeff = coeff * (window - i) / (i + 1);
    }
    return std::ldexp(static_cast<double>(static_cast<unsigned long long>(sum)), -static_cast<int>(window));
  }

  const double n = static_cast<double>(window);
  const double lp = std::log(p), lq = std::log1p(-p);
  std::vector<double> terms(outliers + 1);
  for (std::size_t i = 0; i <= outliers; ++i) {
    const double k = static_cast<double>(i);
    terms[i] = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lp + (n - k) * lq;
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return std::clamp(std::exp(peak) * acc, 0.0, 1.0);
}

OutlierVerdict classify_residuals(std::span<const std::optional<double>> residuals,
                                  std::span<const double> thresholds) {
  if (residuals.size() != thresholds.size()) throw std::invalid_argument("residual/threshold count mismatch");
  OutlierVerdict v;
  v.per_column.resize(residuals.size());
  for (std::size_t j = 0; j < residuals.size(); ++j) {
    v.per_column[j] = residuals[j].has_value() && std::abs(*residuals[j]) > thresholds[j];
    v.any = v.any || v.per_column[j];
  }
  return v;
}

void BedBuffer::push(bool outlier) {
  if (filled_ == capacity_) {
    count_ -= ring_[head_] ? 1 : 0;
  } else {
    ++filled_;
  }
  ring_[head_] = outlier;
  count_ += outlier ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
}

std::vector<std::string> check_applicable(const SeriesFrame& frame, const DetectorConfig& config) {
  std::vector<std::string> warnings = config.validate();
  const std::vector<std::size_t> quality = frame.quality_columns();
  if (quality.empty()) throw DataError("frame has no quality columns", "columns");
  if (frame.rows() < config.window_size + 1)
    throw DataError("frame has " + std::to_string(frame.rows()) + " rows; windowSize " +
                        std::to_string(config.window_size) + " requires at least " +
                        std::to_string(config.window_size + 1),
                    "windowSize");
  if (config.model.kind == ModelKind::NeuralMultivariate && quality.size() < 2)
    throw ConfigError("NeuralNetwork needs at least 2 quality columns", "buildModelAlgo");
  for (const auto& [name, tau] : config.threshold_override) {
    const auto idx = frame.find_column(name);
    if (!idx || std::find(quality.begin(), quality.end(), *idx) == quality.end())
      throw ConfigError("threshold override names unknown quality column '" + name + "'", "thresholdOverride");
  }
  for (std::size_t idx : quality)
    if (frame.column(idx).view().missing_count() == frame.rows())
      throw DataError("quality column '" + frame.column(idx).name + "' has no observed values", "columns");
  if (!frame.uniform_spacing()) warnings.push_back("timestamps are not uniformly spaced");
  return warnings;
}

DetectionResult detect_events(const SeriesFrame& frame, const DetectorConfig& config, Execution exec) {
  DetectionResult result;
  result.config = config;
  result.warnings = check_applicable(frame, config);

  const std::vector<std::size_t> quality = frame.quality_columns();
  std::vector<double> overrides(quality.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, tau] : config.threshold_override) {
    const auto pos = std::find(quality.begin(), quality.end(), *frame.find_column(name));
    overrides[static_cast<std::size_t>(pos - quality.begin())] = tau;
  }
  for (std::size_t idx : quality) result.columns.push_back(frame.column(idx).name);

  const std::size_t n = frame.rows();
  std::vector<std::size_t> starts;
  for (std::size_t w = config.window_size; w < n; w += config.n_iterations_refit) starts.push_back(w);

  result.records.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto& rec = result.records[r];
    rec.index = r;
    rec.timestamp = frame.timestamps()[r].text;
    rec.residuals.assign(quality.size(), std::nullopt);
    rec.outliers.assign(quality.size(), false);
  }

  BedBuffer bed(config.bed_window_size);
  std::vector<std::size_t> degenerate_windows(quality.size(), 0);
  auto absorb = [&](WindowOutcome& o) {
    for (std::size_t k : o.degenerate_columns) ++degenerate_windows[k];
    for (std::size_t i = 0; i < o.verdicts.size(); ++i) {
      auto& rec = result.records[o.horizon_start + i];
      rec.residuals = std::move(o.residuals[i]);
      rec.outliers = std::move(o.verdicts[i].per_column);
      rec.is_outlier = o.verdicts[i].any;
      bed.push(rec.is_outlier);
      rec.event_probability = bed_probability(bed.count(), bed.length(), config.trial_success_prob);
      rec.label = rec.event_probability > config.event_threshold ? Label::Event : Label::Normal;
    }
    for (auto& d : o.diagnostics) result.diagnostics.push_back(std::move(d));
  };

  if (config.mask_outliers) {
    // The binomial window of every Event row is hidden from later training
    // windows for each column whose own outliers there clear the event
    // threshold; outliers at the onset of a column's event are hidden as well.
    // Each window therefore depends on the verdicts of the previous ones.
    std::vector<std::vector<std::uint8_t>> flagged(quality.size(), std::vector<std::uint8_t>(n, 0));
    std::vector<std::vector<std::uint8_t>> recent = flagged;
    for (const std::size_t w : starts) {
      const std::size_t h = std::min(config.n_iterations_refit, n - w);
      WindowOutcome o = run_window(frame, config, quality, overrides, flagged, recent, w, h, exec);
      absorb(o);
      for (std::size_t r = w; r < w + h; ++r) {
        for (std::size_t k = 0; k < quality.size(); ++k) recent[k][r] = result.records[r].outliers[k];
        if (result.records[r].label != Label::Event) continue;
        const std::size_t from = r + 1 - std::min(r + 1 - config.window_size, config.bed_window_size);
        for (std::size_t k = 0; k < quality.size(); ++k) {
          // Only columns that would show the event on their own are hidden, so
          // the noise of bystanders in a multivariate alarm stays in training.
          std::size_t count = 0;
          for (std::size_t t = from; t <= r; ++t) count += result.records[t].outliers[k];
          if (bed_probability(count, r + 1 - from, config.trial_success_prob) > config.event_threshold)
            std::fill(flagged[k].begin() + from, flagged[k].begin() + r + 1, std::uint8_t{1});
        }
      }
    }
  } else {
    std::vector<WindowOutcome> outcomes(starts.size());
    for_each_index(starts.size(), exec, [&](std::size_t i) {
      const std::size_t w = starts[i];
      outcomes[i] = run_window(frame, config, quality, overrides, {}, {}, w, std::min(config.n_iterations_refit, n - w),
                               Execution::Serial);
    });
    for (auto& o : outcomes) absorb(o);
  }
  for (std::size_t k = 0; k < quality.size(); ++k) {
    if (degenerate_windows[k] > 0)
      result.warnings.push_back("column '" + result.columns[k] + "' was constant in " +
                                std::to_string(degenerate_windows[k]) +
                                " training windows; normalized values set to the range floor");
  }
  return result;
}

}  // namespace eds
