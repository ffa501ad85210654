#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eds/config.hpp"
#include "eds/detector.hpp"
#include "eds/evaluate.hpp"
#include "eds/series.hpp"

namespace eds {

// One row per input row:
//   timestamp,residual_<col>...,isOutlier,eventProbability,label
// Unmeasured residuals are empty cells; isOutlier is 1/0.
std::string results_csv(const DetectionResult& result);

// Reads a results CSV back. Per-column outlier flags are not part of the CSV
// and come back empty; config, diagnostics and warnings are not restored.
DetectionResult parse_results_csv(std::string_view text);

Json record_to_json(const ClassificationRecord& record);
// Records [offset, offset + limit) plus paging metadata.
Json results_page_json(const DetectionResult& result, std::size_t offset, std::size_t limit);
// Complete result: config echo, columns, records, diagnostics, warnings.
Json result_to_json(const DetectionResult& result);
DetectionResult result_from_json(const Json& document);

// Scoring of a result against ground-truth labels (one per record). Warmup
// rows are skipped unless include_warmup, in which case they count as
// predicted Normal with probability 0.
struct Evaluation {
  ConfusionMatrix matrix;
  SummaryStats stats;
  std::size_t evaluated_rows = 0;
  bool include_warmup = false;
};
Evaluation evaluate_result(const DetectionResult& result, const std::vector<bool>& truth, bool include_warmup = false);
RocCurve roc_for_result(const DetectionResult& result, const std::vector<bool>& truth, bool include_warmup = false);

Json metrics_json(const Evaluation& evaluation);
// Plain-text confusion table (predicted rows x actual columns) plus ratios.
std::string metrics_table(const Evaluation& evaluation);

std::string roc_csv(const RocCurve& curve);  // threshold,fpr,tpr
Json roc_json(const RocCurve& curve);
std::string roc_svg(const RocCurve& curve);

// One panel per quality column; rows labelled Event are overlaid in red and
// ground-truth event rows, when present, are shaded.
std::string series_svg(const SeriesFrame& frame, const DetectionResult& result);

}  // namespace eds
