#include "eds/pipeline.hpp"

#include "eds/error.hpp"

namespace eds {

SeriesFrame load_frame(std::string_view csv, const CsvOptions& options, std::span<const std::string> columns) {
  SeriesFrame frame = parse_csv(csv, options);
  if (columns.empty()) return frame;
  return select_columns(frame, columns);
}

Json csv_options_to_json(const CsvOptions& o) {
  Json j{{"eventColumn", o.event_column},
         {"operationalColumns", o.operational_columns},
         {"ignoredColumns", o.ignored_columns}};
  j["timeColumn"] = o.time_column.empty() ? Json(nullptr) : Json(o.time_column);
  return j;
}

CsvOptions csv_options_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("CSV options must be a JSON object");
  CsvOptions o;
  try {
    if (j.contains("timeColumn") && !j["timeColumn"].is_null()) o.time_column = j["timeColumn"].get<std::string>();
    if (j.contains("eventColumn")) o.event_column = j["eventColumn"].get<std::string>();
    if (j.contains("operationalColumns"))
      o.operational_columns = j["operationalColumns"].get<std::vector<std::string>>();
    if (j.contains("ignoredColumns")) o.ignored_columns = j["ignoredColumns"].get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed CSV options: ") + e.what());
  }
  return o;
}

}  // namespace eds
