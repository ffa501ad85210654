#include "eds/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <string>

#include <spdlog/spdlog.h>

#include "eds/error.hpp"

namespace eds {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_label(std::string_view s) {
  s = trim(s);
  if (s == "1" || s == "TRUE" || s == "true") return true;
  if (s == "0" || s == "FALSE" || s == "false") return false;
  return std::nullopt;
}

// RFC-4180 record splitter. Returns false at end of input.
class CsvReader {
public:
  explicit CsvReader(std::string_view text) : text_(text) {
    if (text_.size() >= 3 && text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        break;
      } else if (c == '\r') {
        if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        break;
      } else {
        field.push_back(c);
      }
    }
    if (quoted) throw DataError("unterminated quoted field at line " + std::to_string(line_ + 1));
    fields.push_back(std::move(field));
    ++line_;
    return true;
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

}  // namespace

const char* to_string(ColumnRole role) noexcept {
  switch (role) {
    case ColumnRole::Quality: return "quality";
    case ColumnRole::Operational: return "operational";
    case ColumnRole::Ignored: return "ignored";
  }
  return "quality";
}

std::optional<Timestamp> parse_timestamp(std::string_view raw) {
  const std::string_view s = trim(raw);
  std::int64_t integer = 0;
  if (parse_int(s, integer)) return Timestamp{std::string(s), integer};

  // YYYY-MM-DD[( |T)HH:MM[:SS]][Z]
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_int(s.substr(0, 4), year) || !parse_int(s.substr(5, 2), month) ||
      !parse_int(s.substr(8, 2), day))
    return std::nullopt;
  std::string_view rest = s.substr(10);
  if (!rest.empty()) {
    if (rest.front() != ' ' && rest.front() != 'T') return std::nullopt;
    rest.remove_prefix(1);
    if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
    if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
    if (rest[2] != ':' || !parse_int(rest.substr(0, 2), hour) || !parse_int(rest.substr(3, 2), minute))
      return std::nullopt;
    if (rest.size() == 8 && (rest[5] != ':' || !parse_int(rest.substr(6, 2), second)))
      return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    return std::nullopt;
  const std::int64_t key = days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
  return Timestamp{std::string(s), key};
}

std::size_t ColumnView::missing_count() const noexcept {
  return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), std::uint8_t{0}));
}

bool operator==(const Column& a, const Column& b) {
  if (a.name != b.name || a.role != b.role || a.observed != b.observed) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.observed[i] && a.values[i] != b.values[i]) return false;
  }
  return true;
}

SeriesFrame SeriesFrame::make(std::vector<Timestamp> timestamps, std::vector<Column> columns,
                              std::optional<std::vector<bool>> event_labels) {
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (c.name.empty()) throw DataError("column names must be non-empty");
    if (!names.insert(c.name).second) throw DataError("duplicate column name '" + c.name + "'");
    if (c.values.size() != timestamps.size() || c.observed.size() != timestamps.size())
      throw DataError("column '" + c.name + "' length differs from timestamp count");
  }
  if (event_labels && event_labels->size() != timestamps.size())
    throw DataError("event label count differs from timestamp count");
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i].key <= timestamps[i - 1].key)
      throw DataError("timestamps not strictly increasing at row " + std::to_string(i) + " ('" +
                      timestamps[i].text + "')");
  }
  SeriesFrame f;
  f.timestamps_ = std::move(timestamps);
  f.columns_ = std::move(columns);
  f.labels_ = std::move(event_labels);
  return f;
}

const Column& SeriesFrame::column(std::string_view name) const {
  if (auto i = find_column(name)) return columns_[*i];
  throw DataError("unknown column '" + std::string(name) + "'");
}

std::optional<std::size_t> SeriesFrame::find_column(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

const std::vector<bool>& SeriesFrame::labels() const {
  if (!labels_) throw DataError("frame has no event labels");
  return *labels_;
}

std::vector<std::size_t> SeriesFrame::quality_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].role == ColumnRole::Quality) out.push_back(i);
  return out;
}

bool SeriesFrame::uniform_spacing() const noexcept {
  if (timestamps_.size() < 3) return true;
  const std::int64_t step = timestamps_[1].key - timestamps_[0].key;
  for (std::size_t i = 2; i < timestamps_.size(); ++i)
    if (timestamps_[i].key - timestamps_[i - 1].key != step) return false;
  return true;
}

WindowView::WindowView(const SeriesFrame& frame, std::size_t start, std::size_t end)
    : frame_(&frame), start_(start), end_(end) {
  if (start >= end || end > frame.rows())
    throw DataError("window [" + std::to_string(start) + ", " + std::to_string(end) +
                    ") out of range for frame of " + std::to_string(frame.rows()) + " rows");
}

ColumnView WindowView::column(std::size_t index) const {
  const Column& c = frame_->column(index);
  return {std::span<const double>(c.values).subspan(start_, size()),
          std::span<const std::uint8_t>(c.observed).subspan(start_, size())};
}

SeriesFrame parse_csv(std::string_view text, const CsvOptions& options) {
  CsvReader reader(text);
  std::vector<std::string> header;
  if (!reader.next(header) || blank_record(header)) throw DataError("CSV has no header row");
  for (auto& h : header) h = std::string(trim(h));

  std::size_t time_idx = options.time_index;
  if (!options.time_column.empty()) {
    auto it = std::find(header.begin(), header.end(), options.time_column);
    if (it == header.end()) throw DataError("time column '" + options.time_column + "' not found in header");
    time_idx = static_cast<std::size_t>(it - header.begin());
  }
  if (time_idx >= header.size()) throw DataError("time column index out of range");

  std::optional<std::size_t> event_idx;
  std::vector<std::size_t> value_idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == time_idx) continue;
    if (!options.event_column.empty() && header[i] == options.event_column) {
      event_idx = i;
      continue;
    }
    value_idx.push_back(i);
  }

  auto role_of = [&](const std::string& name) {
    auto in = [&](const std::vector<std::string>& v) { return std::find(v.begin(), v.end(), name) != v.end(); };
    if (in(options.ignored_columns)) return ColumnRole::Ignored;
    if (in(options.operational_columns)) return ColumnRole::Operational;
    return ColumnRole::Quality;
  };

  std::vector<Column> columns(value_idx.size());
  for (std::size_t k = 0; k < value_idx.size(); ++k) {
    columns[k].name = header[value_idx[k]];
    columns[k].role = role_of(columns[k].name);
  }
  for (const auto& listed : {options.operational_columns, options.ignored_columns})
    for (const auto& name : listed)
      if (std::none_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; }))
        throw DataError("role given for unknown column '" + name + "'");

  std::vector<Timestamp> timestamps;
  std::optional<std::vector<bool>> labels;
  if (event_idx) labels.emplace();

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (blank_record(fields)) continue;
    const std::size_t line = reader.line();
    if (fields.size() > header.size())
      throw DataError("line " + std::to_string(line) + ": more fields than header columns");
    fields.resize(header.size());
    auto ts = parse_timestamp(fields[time_idx]);
    if (!ts) throw DataError("line " + std::to_string(line) + ": unparseable time '" + fields[time_idx] + "'");
    timestamps.push_back(std::move(*ts));
    for (std::size_t k = 0; k < value_idx.size(); ++k) columns[k].push(parse_number(fields[value_idx[k]]));
    if (event_idx) {
      auto label = parse_label(fields[*event_idx]);
      if (!label)
        throw DataError("line " + std::to_string(line) + ": invalid " + options.event_column + " value '" +
                        fields[*event_idx] + "'");
      labels->push_back(*label);
    }
  }
  if (timestamps.empty()) throw DataError("CSV has no data rows");

  SeriesFrame frame = SeriesFrame::make(std::move(timestamps), std::move(columns), std::move(labels));
  if (!frame.uniform_spacing()) spdlog::warn("timestamps are not uniformly spaced; detection uses row indices");
  return frame;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string emit_csv(const SeriesFrame& frame, bool include_labels) {
  std::string out = "Time";
  for (const auto& c : frame.columns()) out += "," + quote_field(c.name);
  const bool labels = include_labels && frame.has_labels();
  if (labels) out += ",EVENT";
  out += '\n';
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    out += quote_field(frame.timestamps()[r].text);
    for (const auto& c : frame.columns()) {
      out += ',';
      if (c.observed[r]) out += format_double(c.values[r]);
    }
    if (labels) out += frame.labels()[r] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

SeriesFrame select_columns(const SeriesFrame& frame, std::span<const std::string> names) {
  if (names.empty()) throw DataError("column selection is empty", "columns");
  std::vector<Column> columns;
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw DataError("column '" + n + "' selected twice", "columns");
    if (!frame.find_column(n)) throw DataError("unknown column '" + n + "'", "columns");
    columns.push_back(frame.column(n));
  }
  return SeriesFrame::make(frame.timestamps(), std::move(columns), frame.maybe_labels());
}

WindowView slice_window(const SeriesFrame& frame, std::size_t start, std::size_t size) {
  if (size == 0 || start + size > frame.rows())
    throw DataError("slice [" + std::to_string(start) + ", " + std::to_string(start + size) +
                    ") out of range for frame of " + std::to_string(frame.rows()) + " rows");
  return WindowView(frame, start, start + size);
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find(sep, begin);
    if (end == std::string_view::npos) end = text.size();
    auto item = trim(text.substr(begin, end - begin));
    if (!item.empty()) out.emplace_back(item);
    begin = end + 1;
  }
  return out;
}

}  // namespace eds
