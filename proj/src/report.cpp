#include "eds/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "eds/error.hpp"

namespace eds {

namespace {

constexpr std::string_view kResidualPrefix = "residual_";

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + '"';
}

double parse_real(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError("results line " + std::to_string(line) + ": '" + text + "' is not a number");
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string opt_text(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Maximal runs [begin, end) where pred(row) holds.
template <class Pred>
std::vector<std::pair<std::size_t, std::size_t>> runs(std::size_t n, Pred pred) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n;) {
    if (!pred(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && pred(j)) ++j;
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

}  // namespace

std::string results_csv(const DetectionResult& result) {
  std::string out = "timestamp";
  for (const auto& c : result.columns) out += "," + csv_cell(std::string(kResidualPrefix) + c);
  out += ",isOutlier,eventProbability,label\n";
  for (const auto& r : result.records) {
    out += csv_cell(r.timestamp);
    for (const auto& res : r.residuals) {
      out += ',';
      if (res) out += format_double(*res);
    }
    out += r.is_outlier ? ",1," : ",0,";
    out += format_double(r.event_probability);
    out += ',';
    out += to_string(r.label);
    out += '\n';
  }
  return out;
}

DetectionResult parse_results_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("results CSV is empty");

  const auto header = split_csv_line(lines[0]);
  if (header.size() < 4 || header.front() != "timestamp" || header[header.size() - 3] != "isOutlier" ||
      header[header.size() - 2] != "eventProbability" || header.back() != "label")
    throw DataError("results CSV header must be timestamp,residual_<col>...,isOutlier,eventProbability,label");

  DetectionResult result;
  const std::size_t q = header.size() - 4;
  for (std::size_t k = 0; k < q; ++k) {
    const std::string& h = header[1 + k];
    if (h.rfind(kResidualPrefix, 0) != 0) throw DataError("results CSV column '" + h + "' is not a residual column");
    result.columns.push_back(h.substr(kResidualPrefix.size()));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size())
      throw DataError("results line " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    ClassificationRecord r;
    r.index = i - 1;
    r.timestamp = cells[0];
    for (std::size_t k = 0; k < q; ++k)
      r.residuals.push_back(cells[1 + k].empty() ? std::nullopt : std::optional<double>(parse_real(cells[1 + k], i + 1)));
    const std::string& flag = cells[1 + q];
    if (flag != "0" && flag != "1") throw DataError("results line " + std::to_string(i + 1) + ": isOutlier must be 0 or 1");
    r.is_outlier = flag == "1";
    r.event_probability = parse_real(cells[2 + q], i + 1);
    r.label = parse_label_name(cells[3 + q]);
    result.records.push_back(std::move(r));
  }
  return result;
}

Json record_to_json(const ClassificationRecord& r) {
  Json residuals = Json::array();
  for (const auto& v : r.residuals) residuals.push_back(opt_json(v));
  Json outliers = Json::array();
  for (bool b : r.outliers) outliers.push_back(b);
  return Json{{"index", r.index},
              {"timestamp", r.timestamp},
              {"residuals", residuals},
              {"outliers", outliers},
              {"isOutlier", r.is_outlier},
              {"eventProbability", r.event_probability},
              {"label", to_string(r.label)}};
}

Json results_page_json(const DetectionResult& result, std::size_t offset, std::size_t limit) {
  const std::size_t total = result.records.size();
  const std::size_t begin = std::min(offset, total);
  const std::size_t end = std::min(total, begin + limit);
  Json records = Json::array();
  for (std::size_t i = begin; i < end; ++i) records.push_back(record_to_json(result.records[i]));
  return Json{{"total", total}, {"offset", begin}, {"limit", limit}, {"columns", result.columns}, {"records", records}};
}

Json result_to_json(const DetectionResult& result) {
  Json diagnostics = Json::array();
  for (const auto& d : result.diagnostics)
    diagnostics.push_back({{"windowStart", d.window_start}, {"windowEnd", d.window_end}, {"message", d.message}});
  Json records = Json::array();
  for (const auto& r : result.records) records.push_back(record_to_json(r));
  return Json{{"config", config_to_json(result.config)},
              {"columns", result.columns},
              {"records", records},
              {"diagnostics", diagnostics},
              {"warnings", result.warnings}};
}

DetectionResult result_from_json(const Json& doc) {
  try {
    DetectionResult result;
    result.config = config_from_json(doc.at("config")).detector;
    result.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& j : doc.at("records")) {
      ClassificationRecord r;
      r.index = j.at("index").get<std::size_t>();
      r.timestamp = j.at("timestamp").get<std::string>();
      for (const auto& v : j.at("residuals"))
        r.residuals.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      for (const auto& v : j.at("outliers")) r.outliers.push_back(v.get<bool>());
      r.is_outlier = j.at("isOutlier").get<bool>();
      r.event_probability = j.at("eventProbability").get<double>();
      r.label = parse_label_name(j.at("label").get<std::string>());
      result.records.push_back(std::move(r));
    }
    for (const auto& d : doc.at("diagnostics"))
      result.diagnostics.push_back({d.at("windowStart").get<std::size_t>(), d.at("windowEnd").get<std::size_t>(),
                                    d.at("message").get<std::string>()});
    result.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return result;
  } catch (const Json::exception& e) {
    throw DataError(std::string("stored result is malformed: ") + e.what());
  }
}

namespace {

void check_truth(const DetectionResult& result, const std::vector<bool>& truth) {
  if (truth.size() != result.records.size())
    throw DataError("ground truth has " + std::to_string(truth.size()) + " rows, results have " +
                    std::to_string(result.records.size()));
}

}  // namespace

Evaluation evaluate_result(const DetectionResult& result, const std::vector<bool>& truth, bool include_warmup) {
  check_truth(result, truth);
  Evaluation e;
  e.include_warmup = include_warmup;
  const auto predicted = result.predicted_events();
  const auto mask = include_warmup ? std::vector<bool>(result.records.size(), true) : result.scored_mask();
  e.matrix = confusion_matrix(predicted, truth, mask);
  e.stats = summary_stats(e.matrix);
  e.evaluated_rows = e.matrix.total();
  return e;
}

RocCurve roc_for_result(const DetectionResult& result, const std::vector<bool>& truth, bool include_warmup) {
  check_truth(result, truth);
  const auto probabilities = result.probabilities();
  const auto mask = include_warmup ? std::vector<bool>(result.records.size(), true) : result.scored_mask();
  return roc_curve(probabilities, truth, mask);
}

Json metrics_json(const Evaluation& e) {
  const auto& m = e.matrix;
  return Json{{"confusionMatrix",
               {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
                {"positives", m.positives()}, {"negatives", m.negatives()}}},
              {"accuracy", opt_json(e.stats.accuracy)},
              {"sensitivity", opt_json(e.stats.sensitivity)},
              {"specificity", opt_json(e.stats.specificity)},
              {"fpr", opt_json(e.stats.fpr)},
              {"evaluatedRows", e.evaluated_rows},
              {"includeWarmup", e.include_warmup}};
}

std::string metrics_table(const Evaluation& e) {
  const auto& m = e.matrix;
  auto cell = [](std::size_t v, std::size_t width) {
    std::string s = std::to_string(v);
    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
  };
  std::ostringstream out;
  out << "                    Actual Event  Actual Normal\n";
  out << "Predicted Event   " << cell(m.tp, 14) << cell(m.fp, 15) << "\n";
  out << "Predicted Normal  " << cell(m.fn, 14) << cell(m.tn, 15) << "\n";
  out << "\n";
  out << "evaluated rows  " << e.evaluated_rows << (e.include_warmup ? " (warmup included)" : " (warmup excluded)")
      << "\n";
  out << "accuracy        " << opt_text(e.stats.accuracy) << "\n";
  out << "sensitivity     " << opt_text(e.stats.sensitivity) << "\n";
  out << "specificity     " << opt_text(e.stats.specificity) << "\n";
  out << "fpr             " << opt_text(e.stats.fpr) << "\n";
  return out.str();
}

std::string roc_csv(const RocCurve& curve) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : curve.points)
    out += format_double(p.threshold) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  return out;
}

Json roc_json(const RocCurve& curve) {
  Json points = Json::array();
  for (const auto& p : curve.points) points.push_back({{"threshold", p.threshold}, {"fpr", p.fpr}, {"tpr", p.tpr}});
  return Json{{"points", points}, {"auc", opt_json(curve.auc)}};
}

std::string roc_svg(const RocCurve& curve) {
  constexpr double size = 400, left = 70, top = 40;
  auto x = [&](double fpr) { return fixed(left + fpr * size); };
  auto y = [&](double tpr) { return fixed(top + (1.0 - tpr) * size); };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"510\" viewBox=\"0 0 520 510\">\n";
  out << "<rect width=\"520\" height=\"510\" fill=\"white\"/>\n";
  out << "<text x=\"270\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">ROC curve"
      << (curve.auc ? " (AUC " + fixed(*curve.auc, 4) + ")" : std::string(" (AUC undefined)")) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    out << "<text x=\"" << x(v) << "\" y=\"" << fixed(top + size + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(v, 1) << "</text>\n";
    out << "<text x=\"" << fixed(left - 8) << "\" y=\"" << y(v)
        << "\" text-anchor=\"end\" dominant-baseline=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fixed(v, 1) << "</text>\n";
  }
  out << "<text x=\"" << fixed(left + size / 2) << "\" y=\"" << fixed(top + size + 40)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">False Positive Rate</text>\n";
  out << "<text transform=\"translate(22," << fixed(top + size / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">True Positive Rate</text>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(1) << "\" y2=\"" << y(1)
      << "\" stroke=\"grey\" stroke-dasharray=\"6,4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
  for (const auto& p : curve.points) out << x(p.fpr) << "," << y(p.tpr) << " ";
  out << "\"/>\n</svg>\n";
  return out.str();
}

std::string series_svg(const SeriesFrame& frame, const DetectionResult& result) {
  constexpr double width = 1000, left = 70, right = 20, panel = 150, gap = 40, top = 30;
  const double plot_w = width - left - right;
  const std::size_t n = frame.rows();
  const std::size_t panels = result.columns.size();
  const double height = top + static_cast<double>(panels) * (panel + gap) + 20;
  auto xpos = [&](std::size_t i) { return left + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0) * plot_w; };

  const auto event_runs = runs(std::min(n, result.records.size()),
                               [&](std::size_t i) { return result.records[i].label == Label::Event; });
  const auto truth_runs = frame.has_labels() ? runs(n, [&](std::size_t i) { return frame.labels()[i]; })
                                             : std::vector<std::pair<std::size_t, std::size_t>>{};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << fixed(height)
      << "\" viewBox=\"0 0 " << width << " " << fixed(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">Detected events in red"
      << (frame.has_labels() ? "; labelled events shaded" : "") << "</text>\n";

  for (std::size_t p = 0; p < panels; ++p) {
    const Column& col = frame.column(result.columns[p]);
    const double y0 = top + static_cast<double>(p) * (panel + gap);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i)
      if (col.observed[i]) {
        lo = std::min(lo, col.values[i]);
        hi = std::max(hi, col.values[i]);
      }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi == lo) lo -= 0.5, hi += 0.5;
    auto ypos = [&](double v) { return y0 + (hi - v) / (hi - lo) * panel; };

    out << "<g>\n<text x=\"" << left << "\" y=\"" << fixed(y0 - 6) << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(col.name) << "</text>\n";
    for (const auto& [a, b] : truth_runs)
      out << "<rect x=\"" << fixed(xpos(a)) << "\" y=\"" << fixed(y0) << "\" width=\""
          << fixed(std::max(1.0, xpos(b - 1) - xpos(a))) << "\" height=\"" << panel
          << "\" fill=\"#f5b7b1\" fill-opacity=\"0.4\"/>\n";
    out << "<rect x=\"" << left << "\" y=\"" << fixed(y0) << "\" width=\"" << plot_w << "\" height=\"" << panel
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(y0 + 10)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(format_double(hi))
        << "</text>\n<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(y0 + panel)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(format_double(lo))
        << "</text>\n";

    auto polyline = [&](std::size_t a, std::size_t b, const char* style) {
      for (const auto& [s, e] : runs(b - a, [&](std::size_t i) { return col.observed[a + i] != 0; })) {
        out << "<polyline fill=\"none\" " << style << " points=\"";
        for (std::size_t i = a + s; i < a + e; ++i) out << fixed(xpos(i)) << "," << fixed(ypos(col.values[i])) << " ";
        out << "\"/>\n";
      }
    };
    polyline(0, n, "stroke=\"#2c3e50\" stroke-width=\"1\"");
    for (const auto& [a, b] : event_runs) polyline(a, b, "stroke=\"#e74c3c\" stroke-width=\"2\"");
    for (const auto& [a, b] : event_runs)
      if (b - a == 1 && col.observed[a])
        out << "<circle cx=\"" << fixed(xpos(a)) << "\" cy=\"" << fixed(ypos(col.values[a]))
            << "\" r=\"2\" fill=\"#e74c3c\"/>\n";
    out << "</g>\n";
  }
  out << "<text x=\"" << left << "\" y=\"" << fixed(height - 6) << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << xml_escape(n ? frame.timestamps().front().text : "") << "</text>\n";
  out << "<text x=\"" << width - right << "\" y=\"" << fixed(height - 6)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << xml_escape(n ? frame.timestamps().back().text : "") << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace eds
