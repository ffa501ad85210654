#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "eds/detector.hpp"
#include "eds/simulate.hpp"

namespace eds {

using Json = nlohmann::json;

// A detect configuration as read from a file or request body. `columns`
// selects (and orders) the frame columns to analyse; empty keeps all.
struct ConfigDocument {
  DetectorConfig detector;
  std::vector<std::string> columns;
  // Parameters shared by every preprocessor (maWindow, replaceValue, minMax range).
  Preprocessor preprocessor_params;
};

// Canonical keys (camelCase) are the DetectorConfig field names:
//   windowSize, nIterationsRefit, buildModelAlgo, drift, maxP, dChoices,
//   includeIntercept, gridStep, hiddenUnits, epochs, learningRate, seed,
//   preprocessors, maWindow, replaceValue, minMaxLo, minMaxHi,
//   nStandardDeviations, eventThreshold, bedWindowSize, trialSuccessProb,
//   thresholdOverride, maskOutliers, maxMaskedFraction, columns.
// Aliases: model -> buildModelAlgo, dataPrepators -> preprocessors,
// nStandardDeviationseventThreshold -> nStandardDeviations. A nested
// "postProcessorControl" object is flattened. Unknown keys are a ConfigError.
void apply_config_value(ConfigDocument& doc, std::string_view key, const Json& value);

// Applies every member of `object` onto `base`, then validates.
ConfigDocument config_from_json(const Json& object, ConfigDocument base = {});

// Flat "key = value" lines ('#' starts a comment) or, when the first
// non-blank character is '{', a JSON object.
ConfigDocument parse_config_text(std::string_view text, ConfigDocument base = {});

Json config_to_json(const DetectorConfig& config);
Json config_to_json(const ConfigDocument& doc);

// {shape, columns, start, duration, strength, period?}
EventSpec event_spec_from_json(const Json& object);
Json event_spec_to_json(const EventSpec& spec);
std::vector<EventSpec> event_specs_from_json(const Json& array);

}  // namespace eds
