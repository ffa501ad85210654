#include "eds/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "eds/error.hpp"

namespace eds {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<double> number_from_text(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
  return v;
}

double get_real(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string())
    if (auto n = number_from_text(v.get<std::string>())) return *n;
  throw ConfigError(key + " must be a number", key);
}

std::size_t get_count(const Json& v, const std::string& key) {
  const double d = get_real(v, key);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1e15) throw ConfigError(key + " must be a non-negative integer", key);
  return static_cast<std::size_t>(d);
}

bool get_bool(const Json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<long long>() == 0 || v.get<long long>() == 1)) return v.get<long long>() == 1;
  if (v.is_string()) {
    std::string s = trim(v.get<std::string>());
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
  }
  throw ConfigError(key + " must be true or false", key);
}

std::string get_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + " must be a string", key);
  return v.get<std::string>();
}

// Accepts a JSON array of strings or a comma-separated string.
std::vector<std::string> get_list(const Json& v, const std::string& key) {
  if (v.is_string()) return split_list(v.get<std::string>());
  if (!v.is_array()) throw ConfigError(key + " must be a list", key);
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (item.is_string()) {
      out.push_back(item.get<std::string>());
    } else if (item.is_number()) {
      out.push_back(format_double(item.get<double>()));
    } else {
      throw ConfigError(key + " entries must be strings", key);
    }
  }
  return out;
}

std::string canonical_key(std::string_view key) {
  if (key == "model") return "buildModelAlgo";
  if (key == "dataPrepators") return "preprocessors";
  if (key == "nStandardDeviationseventThreshold") return "nStandardDeviations";
  return std::string(key);
}

}  // namespace

void apply_config_value(ConfigDocument& doc, std::string_view raw_key, const Json& value) {
  const std::string key = canonical_key(raw_key);
  DetectorConfig& c = doc.detector;
  ForecastModelSpec& m = c.model;

  if (key == "postProcessorControl") {
    if (!value.is_object()) throw ConfigError("postProcessorControl must be an object", key);
    for (const auto& [k, v] : value.items()) apply_config_value(doc, k, v);
  } else if (key == "windowSize") {
    c.window_size = get_count(value, key);
  } else if (key == "nIterationsRefit") {
    c.n_iterations_refit = get_count(value, key);
  } else if (key == "buildModelAlgo") {
    const bool drift = m.kind == ModelKind::Drift;
    m.kind = parse_model_kind(trim(get_string(value, key)), drift);
  } else if (key == "drift") {
    const bool drift = get_bool(value, key);
    if (m.kind == ModelKind::Naive || m.kind == ModelKind::Drift) m.kind = drift ? ModelKind::Drift : ModelKind::Naive;
    else if (drift) throw ConfigError("drift applies only to ForecastRWF", key);
  } else if (key == "maxP") {
    m.arima.max_p = get_count(value, key);
  } else if (key == "dChoices") {
    m.arima.d_choices.clear();
    for (const auto& item : get_list(value, key)) {
      const auto d = number_from_text(item);
      if (!d || (*d != 0.0 && *d != 1.0)) throw ConfigError("dChoices accepts only 0 and 1", key);
      m.arima.d_choices.push_back(static_cast<int>(*d));
    }
  } else if (key == "includeIntercept") {
    m.arima.include_intercept = get_bool(value, key);
  } else if (key == "gridStep") {
    m.grid_step = get_real(value, key);
  } else if (key == "hiddenUnits") {
    m.neural.hidden_units = get_count(value, key);
  } else if (key == "epochs") {
    m.neural.epochs = get_count(value, key);
  } else if (key == "learningRate") {
    m.neural.learning_rate = get_real(value, key);
  } else if (key == "seed") {
    if (value.is_number_unsigned()) m.neural.seed = value.get<std::uint64_t>();
    else m.neural.seed = get_count(value, key);
  } else if (key == "preprocessors") {
    c.preprocessors.clear();
    for (const auto& name : get_list(value, key)) {
      Preprocessor p = doc.preprocessor_params;
      p.kind = parse_preprocess_kind(trim(name));
      c.preprocessors.push_back(p);
    }
  } else if (key == "maWindow" || key == "replaceValue" || key == "minMaxLo" || key == "minMaxHi") {
    Preprocessor& p = doc.preprocessor_params;
    if (key == "maWindow") p.ma_window = get_count(value, key);
    if (key == "replaceValue") p.replace_value = get_real(value, key);
    if (key == "minMaxLo") p.range_lo = get_real(value, key);
    if (key == "minMaxHi") p.range_hi = get_real(value, key);
    for (auto& step : c.preprocessors) {
      step.ma_window = p.ma_window;
      step.replace_value = p.replace_value;
      step.range_lo = p.range_lo;
      step.range_hi = p.range_hi;
    }
  } else if (key == "nStandardDeviations") {
    c.n_standard_deviations = get_real(value, key);
  } else if (key == "eventThreshold") {
    c.event_threshold = get_real(value, key);
  } else if (key == "bedWindowSize") {
    c.bed_window_size = get_count(value, key);
  } else if (key == "trialSuccessProb") {
    c.trial_success_prob = get_real(value, key);
  } else if (key == "thresholdOverride") {
    c.threshold_override.clear();
    if (value.is_object()) {
      for (const auto& [col, tau] : value.items()) c.threshold_override[col] = get_real(tau, key);
    } else {
      // "col:tau,col:tau"
      for (const auto& item : get_list(value, key)) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) throw ConfigError("thresholdOverride entries must be column:value", key);
        c.threshold_override[trim(item.substr(0, colon))] = get_real(Json(item.substr(colon + 1)), key);
      }
    }
  } else if (key == "maskOutliers") {
    c.mask_outliers = get_bool(value, key);
  } else if (key == "maxMaskedFraction") {
    c.max_masked_fraction = get_real(value, key);
  } else if (key == "columns") {
    doc.columns = get_list(value, key);
  } else if (key == "verbosityLevel") {
    // Accepted for call compatibility; logging is configured separately.
  } else {
    throw ConfigError("unknown configuration key '" + std::string(raw_key) + "'", std::string(raw_key));
  }
}

ConfigDocument config_from_json(const Json& object, ConfigDocument base) {
  if (!object.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [k, v] : object.items()) apply_config_value(base, k, v);
  base.detector.validate();
  return base;
}

ConfigDocument parse_config_text(std::string_view text, ConfigDocument base) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return config_from_json(j, std::move(base));
  }

  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("configuration line " + std::to_string(line_no) + " is not key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    apply_config_value(base, key, Json(value));
  }
  base.detector.validate();
  return base;
}

Json config_to_json(const DetectorConfig& c) {
  Json j;
  j["windowSize"] = c.window_size;
  j["nIterationsRefit"] = c.n_iterations_refit;
  j["buildModelAlgo"] = model_name(c.model.kind);
  j["drift"] = c.model.kind == ModelKind::Drift;
  j["maxP"] = c.model.arima.max_p;
  j["dChoices"] = c.model.arima.d_choices;
  j["includeIntercept"] = c.model.arima.include_intercept;
  j["gridStep"] = c.model.grid_step;
  j["hiddenUnits"] = c.model.neural.hidden_units;
  j["epochs"] = c.model.neural.epochs;
  j["learningRate"] = c.model.neural.learning_rate;
  j["seed"] = c.model.neural.seed;
  Json pre = Json::array();
  for (const auto& p : c.preprocessors) pre.push_back(to_string(p.kind));
  j["preprocessors"] = pre;
  const Preprocessor params = c.preprocessors.empty() ? Preprocessor{} : c.preprocessors.front();
  j["maWindow"] = params.ma_window;
  j["replaceValue"] = params.replace_value;
  j["minMaxLo"] = params.range_lo;
  j["minMaxHi"] = params.range_hi;
  j["nStandardDeviations"] = c.n_standard_deviations;
  j["eventThreshold"] = c.event_threshold;
  j["bedWindowSize"] = c.bed_window_size;
  j["trialSuccessProb"] = c.trial_success_prob;
  j["thresholdOverride"] = Json::object();
  for (const auto& [col, tau] : c.threshold_override) j["thresholdOverride"][col] = tau;
  j["maskOutliers"] = c.mask_outliers;
  j["maxMaskedFraction"] = c.max_masked_fraction;
  return j;
}

Json config_to_json(const ConfigDocument& doc) {
  Json j = config_to_json(doc.detector);
  j["columns"] = doc.columns;
  return j;
}

EventSpec event_spec_from_json(const Json& o) {
  if (!o.is_object()) throw ConfigError("event must be a JSON object", "events");
  EventSpec e;
  bool have_shape = false, have_start = false, have_duration = false, have_strength = false;
  for (const auto& [k, v] : o.items()) {
    if (k == "shape") {
      e.shape = parse_event_shape(get_string(v, k));
      have_shape = true;
    } else if (k == "columns") {
      e.columns = get_list(v, k);
    } else if (k == "start") {
      e.start = get_count(v, k);
      have_start = true;
    } else if (k == "duration") {
      e.duration = get_count(v, k);
      have_duration = true;
    } else if (k == "strength") {
      e.strength = get_real(v, k);
      have_strength = true;
    } else if (k == "period") {
      if (!v.is_null()) e.period = get_count(v, k);
    } else {
      throw ConfigError("unknown event key '" + k + "'", k);
    }
  }
  if (!have_shape) throw ConfigError("event needs a shape", "shape");
  if (!have_start) throw ConfigError("event needs a start row", "start");
  if (!have_duration) throw ConfigError("event needs a duration", "duration");
  if (!have_strength) throw ConfigError("event needs a strength", "strength");
  if (e.columns.empty()) throw ConfigError("event needs at least one column", "columns");
  if (e.duration < 1) throw ConfigError("event duration must be >= 1", "duration");
  if (!std::isfinite(e.strength)) throw ConfigError("event strength must be finite", "strength");
  if (e.period && *e.period < 1) throw ConfigError("event period must be >= 1", "period");
  return e;
}

Json event_spec_to_json(const EventSpec& e) {
  Json j{{"shape", to_string(e.shape)}, {"columns", e.columns}, {"start", e.start},
         {"duration", e.duration}, {"strength", e.strength}};
  j["period"] = e.period ? Json(*e.period) : Json(nullptr);
  return j;
}

std::vector<EventSpec> event_specs_from_json(const Json& array) {
  const Json* list = &array;
  if (array.is_object() && array.contains("events")) list = &array["events"];
  if (!list->is_array()) throw ConfigError("events must be a JSON array", "events");
  std::vector<EventSpec> out;
  for (const auto& item : *list) out.push_back(event_spec_from_json(item));
  return out;
}

}  // namespace eds
