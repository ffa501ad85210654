#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eds/parallel.hpp"
#include "eds/preprocess.hpp"
#include "eds/series.hpp"

namespace eds {

enum class ModelKind { Meanf, Naive, Drift, SES, Holt, Theta, ArimaLite, NeuralMultivariate };

struct ArimaOptions {
  std::size_t max_p = 5;
  std::vector<int> d_choices{0, 1};
  bool include_intercept = true;
  // Dickey-Fuller t-statistic cut-off (with constant, 5% level). The series is
  // differenced when the statistic does not fall below it.
  double unit_root_critical = -2.86;

  friend bool operator==(const ArimaOptions&, const ArimaOptions&) = default;
};

struct NeuralOptions {
  std::size_t hidden_units = 4;
  std::size_t epochs = 500;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;

  friend bool operator==(const NeuralOptions&, const NeuralOptions&) = default;
};

struct ForecastModelSpec {
  ModelKind kind = ModelKind::ArimaLite;
  ArimaOptions arima;
  double grid_step = 0.05;  // SES / Holt / Theta smoothing grid on [0.01, 0.99]
  NeuralOptions neural;

  void validate() const;
  // Smallest training window the model accepts.
  std::size_t min_window() const noexcept;
  // Smallest number of columns the model accepts.
  std::size_t min_columns() const noexcept { return kind == ModelKind::NeuralMultivariate ? 2 : 1; }

  friend bool operator==(const ForecastModelSpec&, const ForecastModelSpec&) = default;
};

// "ForecastMeanf", "ForecastRWF" (drift selects Naive vs Drift), "ForecastSES",
// "ForecastHolt", "ForecastThetaf", "ForecastArima", "NeuralNetwork".
ModelKind parse_model_kind(std::string_view name, bool drift = false);
// Config-facing name; Naive and Drift both map to "ForecastRWF".
const char* model_name(ModelKind kind) noexcept;
const char* to_string(ModelKind kind) noexcept;

// Complete (imputed, finite) training columns. `measured`, when non-empty,
// flags per column which cells were measured rather than filled in; filled
// cells feed the model state but are left out of the residual spread and of
// the ArimaLite regressions.
struct SeriesMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<std::uint8_t>> measured;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t cols() const noexcept { return columns.size(); }
};

struct MeanState {
  double mean = 0.0;
};
struct NaiveState {
  double last = 0.0;
};
struct DriftState {
  double last = 0.0;
  double slope = 0.0;
};
struct SesState {
  double alpha = 0.0;
  double level = 0.0;
};
struct HoltState {
  double alpha = 0.0;
  double beta = 0.0;
  double level = 0.0;
  double trend = 0.0;
};
struct ThetaState {
  double alpha = 0.0;
  double level = 0.0;
  double drift = 0.0;  // half the OLS slope of the window on time
};
struct ArimaState {
  int d = 0;
  std::vector<double> phi;
  double intercept = 0.0;
  double aic = 0.0;
  std::vector<double> tail;  // last p values of the (differenced) working series, oldest first
  double last_level = 0.0;
};

// One-hidden-layer network, logistic hidden units, linear output.
struct Network {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  double forward(std::span<const double> x) const;
  friend bool operator==(const Network&, const Network&) = default;
};

struct NeuralState {
  Network net;
  double final_loss = 0.0;
};

using ColumnState =
    std::variant<MeanState, NaiveState, DriftState, SesState, HoltState, ThetaState, ArimaState, NeuralState>;

struct ColumnModel {
  std::string name;
  ColumnState state;
  // In-sample one-step fitted values for the trailing rows of the window that
  // have one (first_fitted_row onwards); residuals are observed - fitted.
  std::size_t first_fitted_row = 0;
  std::vector<double> fitted;
  std::vector<double> residuals;
  double residual_sd = 0.0;
};

struct FittedModel {
  ForecastModelSpec spec;
  std::vector<ColumnModel> columns;
  // NeuralMultivariate: min-max scalers of every column on the training window.
  std::vector<NormalizationState> scalers;

  std::vector<double> train_residual_sd() const;
};

struct Forecast {
  std::vector<std::vector<double>> values;  // [column][step], step 0 is horizon 1
};

FittedModel fit(const SeriesMatrix& window, const ForecastModelSpec& spec,
                Execution exec = Execution::Serial);
// Fits the quality columns of a window; fails on unobserved cells.
FittedModel fit(const WindowView& window, const ForecastModelSpec& spec,
                Execution exec = Execution::Serial);

// Univariate kinds only.
Forecast predict(const FittedModel& model, std::size_t h);

// One-step nowcasts for horizons 1..h (NeuralMultivariate only). known_rows[i][j]
// is the measured value of column j at step i+1; last_own[j] is column j's last
// training value. Any unobserved cell is a DataError.
Forecast predict_multivariate(const FittedModel& model,
                              std::span<const std::vector<std::optional<double>>> known_rows,
                              std::span<const double> last_own);

// Smoothing-parameter grid: lo, lo+step, ... up to and including 0.99.
std::vector<double> smoothing_grid(double step);

// Sample standard deviation (n-1); zero for fewer than two values.
double sample_sd(std::span<const double> values);

}  // namespace eds
