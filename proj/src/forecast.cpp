#include "eds/forecast.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "eds/error.hpp"

namespace eds {

namespace {

struct ColumnFit {
  ColumnState state;
  std::size_t first = 0;
  std::vector<double> fitted;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

ColumnFit fit_mean(std::span<const double> y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  return {MeanState{mean}, 0, std::vector<double>(y.size(), mean)};
}

ColumnFit fit_naive(std::span<const double> y) {
  return {NaiveState{y.back()}, 1, std::vector<double>(y.begin(), y.end() - 1)};
}

ColumnFit fit_drift(std::span<const double> y) {
  const std::size_t n = y.size();
  const double slope = (y[n - 1] - y[0]) / static_cast<double>(n - 1);
  std::vector<double> fitted(n - 1);
  for (std::size_t t = 1; t < n; ++t) fitted[t - 1] = y[t - 1] + slope;
  return {DriftState{y.back(), slope}, 1, std::move(fitted)};
}

struct SesPass {
  double sse = 0.0;
  double level = 0.0;
};

// Level starts at the first observation; one-step forecast of y_t is the level after y_{t-1}.
SesPass ses_pass(std::span<const double> y, double alpha, std::vector<double>* fitted) {
  SesPass r{0.0, y[0]};
  for (std::size_t t = 1; t < y.size(); ++t) {
    if (fitted) fitted->push_back(r.level);
    const double e = y[t] - r.level;
    r.sse += e * e;
    r.level += alpha * e;
  }
  return r;
}

double best_ses_alpha(std::span<const double> y, const std::vector<double>& grid) {
  double best_alpha = grid.front();
  double best_sse = std::numeric_limits<double>::infinity();
  for (double a : grid) {
    const double sse = ses_pass(y, a, nullptr).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_alpha = a;
    }
  }
  return best_alpha;
}

ColumnFit fit_ses(std::span<const double> y, const std::vector<double>& grid) {
  const double alpha = best_ses_alpha(y, grid);
  ColumnFit out;
  const SesPass pass = ses_pass(y, alpha, &out.fitted);
  out.state = SesState{alpha, pass.level};
  out.first = 1;
  return out;
}

struct HoltPass {
  double sse = 0.0;
  double level = 0.0;
  double trend = 0.0;
};

// Initial level y_1, trend y_1 - y_0; forecasts start at t = 2.
HoltPass holt_pass(std::span<const double> y, double alpha, double beta, std::vector<double>* fitted) {
  HoltPass r{0.0, y[1], y[1] - y[0]};
  for (std::size_t t = 2; t < y.size(); ++t) {
    const double f = r.level + r.trend;
    if (fitted) fitted->push_back(f);
    const double e = y[t] - f;
    r.sse += e * e;
    r.level = f + alpha * e;
    r.trend += alpha * beta * e;
  }
  return r;
}

ColumnFit fit_holt(std::span<const double> y, const std::vector<double>& grid) {
  double best_a = grid.front(), best_b = grid.front();
  double best_sse = std::numeric_limits<double>::infinity();
  for (double a : grid) {
    for (double b : grid) {
      const double sse = holt_pass(y, a, b, nullptr).sse;
      if (sse < best_sse) {
        best_sse = sse;
        best_a = a;
        best_b = b;
      }
    }
  }
  ColumnFit out;
  const HoltPass pass = holt_pass(y, best_a, best_b, &out.fitted);
  out.state = HoltState{best_a, best_b, pass.level, pass.trend};
  out.first = 2;
  return out;
}

double ols_time_slope(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  const double tbar = (n - 1.0) / 2.0;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double dt = static_cast<double>(t) - tbar;
    sxy += dt * (y[t] - ybar);
    sxx += dt * dt;
  }
  return sxy / sxx;
}

ColumnFit fit_theta(std::span<const double> y, const std::vector<double>& grid) {
  const double alpha = best_ses_alpha(y, grid);
  const double drift = ols_time_slope(y) / 2.0;
  ColumnFit out;
  const SesPass pass = ses_pass(y, alpha, &out.fitted);
  for (double& f : out.fitted) f += drift;
  out.state = ThetaState{alpha, pass.level, drift};
  out.first = 1;
  return out;
}

bool is_measured(std::span<const std::uint8_t> measured, std::size_t t) {
  return measured.empty() || measured[t] != 0;
}

// Dickey-Fuller regression dy_t = a + g*y_{t-1}; returns the t-statistic of g.
// Only steps between two measured cells enter the regression (all steps when
// fewer than 4 qualify).
double dickey_fuller_stat(std::span<const double> y, std::span<const std::uint8_t> measured) {
  std::vector<std::size_t> steps;
  for (std::size_t t = 1; t < y.size(); ++t)
    if (is_measured(measured, t) && is_measured(measured, t - 1)) steps.push_back(t);
  if (steps.size() < 4) {
    steps.resize(y.size() - 1);
    std::iota(steps.begin(), steps.end(), std::size_t{1});
  }
  const std::size_t n = steps.size();
  double xbar = 0.0, dbar = 0.0;
  for (std::size_t t : steps) {
    xbar += y[t - 1];
    dbar += y[t] - y[t - 1];
  }
  xbar /= static_cast<double>(n);
  dbar /= static_cast<double>(n);
  double sxx = 0.0, sxd = 0.0;
  for (std::size_t t : steps) {
    const double dx = y[t - 1] - xbar;
    sxx += dx * dx;
    sxd += dx * ((y[t] - y[t - 1]) - dbar);
  }
  if (!(sxx > 0.0)) return -std::numeric_limits<double>::infinity();  // constant: nothing to difference
  const double g = sxd / sxx;
  const double a = dbar - g * xbar;
  double sse = 0.0;
  for (std::size_t t : steps) {
    const double e = (y[t] - y[t - 1]) - a - g * y[t - 1];
    sse += e * e;
  }
  const double se = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  if (!(se > 0.0)) return g < 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  return g / se;
}

int choose_differencing(std::span<const double> y, std::span<const std::uint8_t> measured, const ArimaOptions& o) {
  const bool allow0 = std::find(o.d_choices.begin(), o.d_choices.end(), 0) != o.d_choices.end();
  const bool allow1 = std::find(o.d_choices.begin(), o.d_choices.end(), 1) != o.d_choices.end();
  if (!allow1) return 0;
  if (!allow0 || y.size() < 4) return 1;
  return dickey_fuller_stat(y, measured) > o.unit_root_critical ? 1 : 0;
}

ColumnFit fit_arima(std::span<const double> y, std::span<const std::uint8_t> measured, const ArimaOptions& o) {
  const int d = y.size() < 3 ? 0 : choose_differencing(y, measured, o);
  std::vector<double> z;
  std::vector<std::uint8_t> z_measured;
  if (d == 1) {
    z.resize(y.size() - 1);
    z_measured.resize(y.size() - 1);
    for (std::size_t t = 1; t < y.size(); ++t) {
      z[t - 1] = y[t] - y[t - 1];
      z_measured[t - 1] = is_measured(measured, t) && is_measured(measured, t - 1);
    }
  } else {
    z.assign(y.begin(), y.end());
    z_measured.resize(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) z_measured[t] = is_measured(measured, t);
  }
  const std::size_t m = z.size();
  const std::size_t k_int = o.include_intercept ? 1 : 0;

  // Largest order leaving at least one residual degree of freedom; all orders
  // are compared on the common sample [P, m).
  std::size_t P = o.max_p;
  while (P > 0 && m < 2 * P + k_int + 1) --P;
  const std::size_t n_eff = m - P;

  // Regression rows whose target and lags were all measured; every row when
  // too few qualify for the largest order.
  std::vector<std::size_t> rows;
  for (std::size_t t = P; t < m; ++t) {
    bool ok = z_measured[t] != 0;
    for (std::size_t lag = 1; ok && lag <= P; ++lag) ok = z_measured[t - lag] != 0;
    if (ok) rows.push_back(t);
  }
  if (rows.size() < P + k_int + 1) {
    rows.resize(n_eff);
    std::iota(rows.begin(), rows.end(), P);
  }
  const std::size_t n_rows = rows.size();

  struct Candidate {
    std::size_t p = 0;
    Eigen::VectorXd beta;
    double aic = std::numeric_limits<double>::infinity();
  } best;

  Eigen::VectorXd target(static_cast<Eigen::Index>(n_rows));
  for (std::size_t r = 0; r < n_rows; ++r) target[static_cast<Eigen::Index>(r)] = z[rows[r]];

  for (std::size_t p = 0; p <= P; ++p) {
    const std::size_t k = p + k_int;
    Eigen::VectorXd beta(static_cast<Eigen::Index>(k));
    double sse = 0.0;
    if (k == 0) {
      sse = target.squaredNorm();
    } else {
      Eigen::MatrixXd X(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(k));
      for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t t = rows[r];
        std::size_t c = 0;
        if (k_int) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) = 1.0;
        for (std::size_t lag = 1; lag <= p; ++lag)
          X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) = z[t - lag];
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
      qr.setThreshold(1e-10);
      if (static_cast<std::size_t>(qr.rank()) < k) continue;
      beta = qr.solve(target);
      if (!beta.allFinite()) continue;
      sse = (target - X * beta).squaredNorm();
    }
    const double n = static_cast<double>(n_rows);
    const double aic = n * std::log(std::max(sse / n, 1e-300)) + 2.0 * static_cast<double>(k);
    if (aic < best.aic) best = {p, beta, aic};
  }

  ArimaState st;
  st.d = d;
  st.aic = best.aic;
  st.intercept = k_int && best.beta.size() > 0 ? best.beta[0] : 0.0;
  for (std::size_t i = 0; i < best.p; ++i) st.phi.push_back(best.beta[static_cast<Eigen::Index>(k_int + i)]);
  st.last_level = y.back();
  st.tail.assign(z.end() - static_cast<std::ptrdiff_t>(best.p), z.end());

  ColumnFit out;
  out.first = P + static_cast<std::size_t>(d);
  out.fitted.resize(n_eff);
  for (std::size_t r = 0; r < n_eff; ++r) {
    const std::size_t t = P + r;
    double zhat = st.intercept;
    for (std::size_t lag = 1; lag <= best.p; ++lag) zhat += st.phi[lag - 1] * z[t - lag];
    out.fitted[r] = d == 1 ? y[t] + zhat : zhat;
  }
  out.state = std::move(st);
  return out;
}

double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Uniform in [-0.5, 0.5) from the top 53 bits; independent of the standard
// library's distribution implementation.
double init_weight(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
}

// Input vector for column j at row t: other columns at t, then column j at t-1.
void neural_inputs(std::span<const double> row_now, double own_prev, std::size_t j,
                   std::span<const NormalizationState> scalers, std::vector<double>& x) {
  x.clear();
  for (std::size_t k = 0; k < row_now.size(); ++k)
    if (k != j) x.push_back(apply_normalizer(row_now[k], scalers[k]));
  x.push_back(apply_normalizer(own_prev, scalers[j]));
}

ColumnFit fit_neural(const SeriesMatrix& w, std::size_t j, std::span<const NormalizationState> scalers,
                     const NeuralOptions& o) {
  const std::size_t n = w.rows();
  const std::size_t m = w.cols();
  const std::size_t rows = n - 1;
  const std::size_t H = o.hidden_units;

  std::vector<std::vector<double>> X(rows);
  std::vector<double> target(rows);
  std::vector<double> row(m);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t k = 0; k < m; ++k) row[k] = w.columns[k][t];
    neural_inputs(row, w.columns[j][t - 1], j, scalers, X[t - 1]);
    target[t - 1] = apply_normalizer(w.columns[j][t], scalers[j]);
  }

  Network net;
  net.inputs = m;
  net.hidden = H;
  std::mt19937_64 rng(o.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(j + 1));
  net.w1.resize(H * m);
  net.b1.resize(H);
  net.w2.resize(H);
  for (auto& v : net.w1) v = init_weight(rng);
  for (auto& v : net.b1) v = init_weight(rng);
  for (auto& v : net.w2) v = init_weight(rng);
  net.b2 = init_weight(rng);

  std::vector<double> gw1(H * m), gb1(H), gw2(H), hidden(H);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    std::fill(gw1.begin(), gw1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gw2.begin(), gw2.end(), 0.0);
    double gb2 = 0.0, loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& x = X[r];
      double out = net.b2;
      for (std::size_t h = 0; h < H; ++h) {
        double a = net.b1[h];
        for (std::size_t i = 0; i < m; ++i) a += net.w1[h * m + i] * x[i];
        hidden[h] = logistic(a);
        out += net.w2[h] * hidden[h];
      }
      const double e = out - target[r];
      loss += 0.5 * e * e;
      gb2 += e;
      for (std::size_t h = 0; h < H; ++h) {
        gw2[h] += e * hidden[h];
        const double delta = e * net.w2[h] * hidden[h] * (1.0 - hidden[h]);
        gb1[h] += delta;
        for (std::size_t i = 0; i < m; ++i) gw1[h * m + i] += delta * x[i];
      }
    }
    if (!std::isfinite(loss)) throw RuntimeFailure("neural network diverged on column '" + w.names[j] + "'");
    const double step = o.learning_rate * inv_rows;
    net.b2 -= step * gb2;
    for (std::size_t h = 0; h < H; ++h) {
      net.w2[h] -= step * gw2[h];
      net.b1[h] -= step * gb1[h];
      for (std::size_t i = 0; i < m; ++i) net.w1[h * m + i] -= step * gw1[h * m + i];
    }
  }

  NeuralState st;
  ColumnFit out;
  out.first = 1;
  out.fitted.resize(rows);
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double o_scaled = net.forward(X[r]);
    const double e = o_scaled - target[r];
    loss += 0.5 * e * e;
    out.fitted[r] = invert_normalizer(o_scaled, scalers[j]);
  }
  st.final_loss = loss * inv_rows;
  if (!std::isfinite(st.final_loss)) throw RuntimeFailure("neural network diverged on column '" + w.names[j] + "'");
  st.net = std::move(net);
  out.state = std::move(st);
  return out;
}

}  // namespace

double Network::forward(std::span<const double> x) const {
  double out = b2;
  for (std::size_t h = 0; h < hidden; ++h) {
    double a = b1[h];
    for (std::size_t i = 0; i < inputs; ++i) a += w1[h * inputs + i] * x[i];
    out += w2[h] * logistic(a);
  }
  return out;
}

void ForecastModelSpec::validate() const {
  if (!(grid_step > 0.0 && grid_step < 1.0)) throw ConfigError("gridStep must lie in (0, 1)", "gridStep");
  if (kind == ModelKind::ArimaLite) {
    if (arima.d_choices.empty()) throw ConfigError("dChoices must not be empty", "dChoices");
    for (int d : arima.d_choices)
      if (d != 0 && d != 1) throw ConfigError("dChoices accepts only 0 and 1", "dChoices");
  }
  if (kind == ModelKind::NeuralMultivariate) {
    if (neural.hidden_units < 1) throw ConfigError("hiddenUnits must be >= 1", "hiddenUnits");
    if (!(neural.learning_rate > 0.0) || !std::isfinite(neural.learning_rate))
      throw ConfigError("learningRate must be positive", "learningRate");
  }
}

std::size_t ForecastModelSpec::min_window() const noexcept {
  switch (kind) {
    case ModelKind::Meanf:
    case ModelKind::Naive: return 1;
    case ModelKind::Drift:
    case ModelKind::SES: return 2;
    case ModelKind::Holt:
    case ModelKind::Theta: return 3;
    case ModelKind::ArimaLite: return arima.max_p + 2;
    case ModelKind::NeuralMultivariate: return 10;
  }
  return 1;
}

ModelKind parse_model_kind(std::string_view name, bool drift) {
  const std::string n = lower(name);
  if (n == "forecastmeanf" || n == "meanf" || n == "mean") return ModelKind::Meanf;
  if (n == "forecastrwf" || n == "rwf") return drift ? ModelKind::Drift : ModelKind::Naive;
  if (n == "naive") return ModelKind::Naive;
  if (n == "drift") return ModelKind::Drift;
  if (n == "forecastses" || n == "ses") return ModelKind::SES;
  if (n == "forecastholt" || n == "holt") return ModelKind::Holt;
  if (n == "forecastthetaf" || n == "thetaf" || n == "theta") return ModelKind::Theta;
  if (n == "forecastarima" || n == "arima") return ModelKind::ArimaLite;
  if (n == "neuralnetwork" || n == "nnet" || n == "neural") return ModelKind::NeuralMultivariate;
  throw ConfigError("unknown model '" + std::string(name) + "'", "buildModelAlgo");
}

const char* model_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Meanf: return "ForecastMeanf";
    case ModelKind::Naive:
    case ModelKind::Drift: return "ForecastRWF";
    case ModelKind::SES: return "ForecastSES";
    case ModelKind::Holt: return "ForecastHolt";
    case ModelKind::Theta: return "ForecastThetaf";
    case ModelKind::ArimaLite: return "ForecastArima";
    case ModelKind::NeuralMultivariate: return "NeuralNetwork";
  }
  return "?";
}

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Meanf: return "Meanf";
    case ModelKind::Naive: return "Naive";
    case ModelKind::Drift: return "Drift";
    case ModelKind::SES: return "SES";
    case ModelKind::Holt: return "Holt";
    case ModelKind::Theta: return "Theta";
    case ModelKind::ArimaLite: return "ArimaLite";
    case ModelKind::NeuralMultivariate: return "NeuralMultivariate";
  }
  return "?";
}

std::vector<double> smoothing_grid(double step) {
  constexpr double lo = 0.01, hi = 0.99;
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + 1e-12) break;
    grid.push_back(std::min(v, hi));
  }
  if (hi - grid.back() > 1e-12) grid.push_back(hi);
  return grid;
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

std::vector<double> FittedModel::train_residual_sd() const {
  std::vector<double> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.residual_sd);
  return out;
}

FittedModel fit(const SeriesMatrix& window, const ForecastModelSpec& spec, Execution exec) {
  spec.validate();
  const std::size_t n = window.rows();
  if (window.cols() < spec.min_columns())
    throw DataError(std::string(to_string(spec.kind)) + " needs at least " + std::to_string(spec.min_columns()) +
                    " columns");
  if (n < spec.min_window())
    throw DataError(std::string(to_string(spec.kind)) + " needs a window of at least " +
                    std::to_string(spec.min_window()) + " rows, got " + std::to_string(n));
  for (std::size_t j = 0; j < window.cols(); ++j) {
    if (window.columns[j].size() != n) throw DataError("training columns differ in length");
    for (double v : window.columns[j])
      if (!std::isfinite(v)) throw DataError("non-finite value in training column '" + window.names[j] + "'");
  }

  FittedModel model;
  model.spec = spec;
  model.columns.resize(window.cols());
  if (spec.kind == ModelKind::NeuralMultivariate) {
    Preprocessor minmax{PreprocessKind::NormalizeMinMax};
    for (const auto& c : window.columns) model.scalers.push_back(fit_normalizer(c, minmax));
  }
  const std::vector<double> grid = smoothing_grid(spec.grid_step);
  if (!window.measured.empty()) {
    if (window.measured.size() != window.cols()) throw DataError("measured mask does not match the columns");
    for (const auto& m : window.measured)
      if (m.size() != n) throw DataError("measured mask differs in length from the columns");
  }
  auto measured = [&](std::size_t j) {
    return window.measured.empty() ? std::span<const std::uint8_t>{} : std::span<const std::uint8_t>(window.measured[j]);
  };

  for_each_index(window.cols(), exec, [&](std::size_t j) {
    std::span<const double> y = window.columns[j];
    ColumnFit f;
    switch (spec.kind) {
      case ModelKind::Meanf: f = fit_mean(y); break;
      case ModelKind::Naive: f = fit_naive(y); break;
      case ModelKind::Drift: f = fit_drift(y); break;
      case ModelKind::SES: f = fit_ses(y, grid); break;
      case ModelKind::Holt: f = fit_holt(y, grid); break;
      case ModelKind::Theta: f = fit_theta(y, grid); break;
      case ModelKind::ArimaLite: f = fit_arima(y, measured(j), spec.arima); break;
      case ModelKind::NeuralMultivariate: f = fit_neural(window, j, model.scalers, spec.neural); break;
    }
    ColumnModel& cm = model.columns[j];
    cm.name = j < window.names.size() ? window.names[j] : "column" + std::to_string(j);
    cm.first_fitted_row = f.first;
    cm.residuals.resize(f.fitted.size());
    for (std::size_t r = 0; r < f.fitted.size(); ++r) cm.residuals[r] = y[f.first + r] - f.fitted[r];
    cm.fitted = std::move(f.fitted);
    cm.state = std::move(f.state);
    std::vector<double> spread;
    for (std::size_t r = 0; r < cm.residuals.size(); ++r)
      if (is_measured(measured(j), f.first + r)) spread.push_back(cm.residuals[r]);
    cm.residual_sd = sample_sd(spread.size() >= 2 ? spread : cm.residuals);
  });
  return model;
}

FittedModel fit(const WindowView& window, const ForecastModelSpec& spec, Execution exec) {
  SeriesMatrix m;
  for (std::size_t idx : window.frame().quality_columns()) {
    const ColumnView c = window.column(idx);
    if (c.missing_count() > 0)
      throw DataError("column '" + window.frame().column(idx).name + "' has unobserved cells; impute first");
    m.names.push_back(window.frame().column(idx).name);
    m.columns.emplace_back(c.values.begin(), c.values.end());
  }
  return fit(m, spec, exec);
}

Forecast predict(const FittedModel& model, std::size_t h) {
  if (h < 1) throw std::invalid_argument("forecast horizon must be >= 1");
  Forecast out;
  out.values.reserve(model.columns.size());
  for (const auto& c : model.columns) {
    std::vector<double> v(h);
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          for (std::size_t i = 0; i < h; ++i) {
            const double step = static_cast<double>(i + 1);
            if constexpr (std::is_same_v<T, MeanState>) {
              v[i] = st.mean;
            } else if constexpr (std::is_same_v<T, NaiveState>) {
              v[i] = st.last;
            } else if constexpr (std::is_same_v<T, DriftState>) {
              v[i] = st.last + step * st.slope;
            } else if constexpr (std::is_same_v<T, SesState>) {
              v[i] = st.level;
            } else if constexpr (std::is_same_v<T, HoltState>) {
              v[i] = st.level + step * st.trend;
            } else if constexpr (std::is_same_v<T, ThetaState>) {
              v[i] = st.level + step * st.drift;
            } else if constexpr (std::is_same_v<T, NeuralState>) {
              throw std::invalid_argument("neural models forecast through predict_multivariate");
            }
          }
          if constexpr (std::is_same_v<T, ArimaState>) {
            std::vector<double> hist = st.tail;
            const std::size_t p = st.phi.size();
            double level = st.last_level;
            for (std::size_t i = 0; i < h; ++i) {
              double z = st.intercept;
              for (std::size_t lag = 1; lag <= p; ++lag) z += st.phi[lag - 1] * hist[hist.size() - lag];
              hist.push_back(z);
              if (st.d == 1) {
                level += z;
                v[i] = level;
              } else {
                v[i] = z;
              }
            }
          }
        },
        c.state);
    out.values.push_back(std::move(v));
  }
  return out;
}

Forecast predict_multivariate(const FittedModel& model,
                              std::span<const std::vector<std::optional<double>>> known_rows,
                              std::span<const double> last_own) {
  if (model.spec.kind != ModelKind::NeuralMultivariate)
    throw std::invalid_argument("predict_multivariate requires a NeuralMultivariate model");
  const std::size_t m = model.columns.size();
  const std::size_t h = known_rows.size();
  if (h < 1) throw std::invalid_argument("forecast horizon must be >= 1");
  if (last_own.size() != m) throw DataError("last_own must hold one value per column");

  std::vector<std::vector<double>> rows(h, std::vector<double>(m));
  for (std::size_t i = 0; i < h; ++i) {
    if (known_rows[i].size() != m) throw DataError("exogenous row " + std::to_string(i) + " has wrong width");
    for (std::size_t k = 0; k < m; ++k) {
      if (!known_rows[i][k])
        throw DataError("missing exogenous value for column '" + model.columns[k].name + "' at step " +
                        std::to_string(i + 1));
      rows[i][k] = *known_rows[i][k];
    }
  }

  Forecast out;
  out.values.assign(m, std::vector<double>(h));
  std::vector<double> x;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& net = std::get<NeuralState>(model.columns[j].state).net;
    for (std::size_t i = 0; i < h; ++i) {
      const double own_prev = i == 0 ? last_own[j] : rows[i - 1][j];
      neural_inputs(rows[i], own_prev, j, model.scalers, x);
      out.values[j][i] = invert_normalizer(net.forward(x), model.scalers[j]);
    }
  }
  return out;
}

}  // namespace eds
