#pragma once

#include <span>
#include <string>
#include <string_view>

#include "eds/config.hpp"
#include "eds/series.hpp"

namespace eds {

// Parses CSV text and keeps `columns` (all when empty). The CLI and the
// service both load data through here so that identical inputs give
// identical frames.
SeriesFrame load_frame(std::string_view csv, const CsvOptions& options, std::span<const std::string> columns);

// {timeColumn, eventColumn, operationalColumns, ignoredColumns}
Json csv_options_to_json(const CsvOptions& options);
CsvOptions csv_options_from_json(const Json& object);

}  // namespace eds
