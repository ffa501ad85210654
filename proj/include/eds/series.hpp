#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eds {

enum class ColumnRole { Quality, Operational, Ignored };

const char* to_string(ColumnRole role) noexcept;

// A single time point. `text` is the rendering read from (or written to) CSV;
// `key` orders rows: epoch seconds for ISO-8601 datetimes, the value itself for
// integer indices.
struct Timestamp {
  std::string text;
  std::int64_t key = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

// Parses "2016-08-14 00:00:00", "2016-08-14T00:00:00[Z]", "2016-08-14" or a
// plain integer. Returns nullopt for anything else.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Non-owning read access to one column (or a row range of it).
struct ColumnView {
  std::span<const double> values;
  std::span<const std::uint8_t> observed;

  std::size_t size() const noexcept { return values.size(); }
  bool is_observed(std::size_t i) const noexcept { return observed[i] != 0; }
  std::optional<double> at(std::size_t i) const {
    return is_observed(i) ? std::optional<double>(values[i]) : std::nullopt;
  }
  std::size_t missing_count() const noexcept;
};

// Numeric column with an explicit observed mask; an unobserved cell carries no value.
struct Column {
  std::string name;
  ColumnRole role = ColumnRole::Quality;
  std::vector<double> values;
  std::vector<std::uint8_t> observed;

  std::size_t size() const noexcept { return values.size(); }
  void push(std::optional<double> v) {
    values.push_back(v.value_or(0.0));
    observed.push_back(v.has_value() ? 1 : 0);
  }
  ColumnView view() const noexcept { return {values, observed}; }

  friend bool operator==(const Column& a, const Column& b);
};

class WindowView;

// Column-oriented multivariate series. Immutable once constructed through
// make(); all invariants are checked there.
class SeriesFrame {
public:
  SeriesFrame() = default;

  static SeriesFrame make(std::vector<Timestamp> timestamps, std::vector<Column> columns,
                          std::optional<std::vector<bool>> event_labels = std::nullopt);

  std::size_t rows() const noexcept { return timestamps_.size(); }
  std::size_t column_count() const noexcept { return columns_.size(); }
  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const noexcept;
  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<bool>& labels() const;
  const std::optional<std::vector<bool>>& maybe_labels() const noexcept { return labels_; }

  // Indices of columns whose role is Quality, in column order.
  std::vector<std::size_t> quality_columns() const;

  // True when every consecutive timestamp gap is the same.
  bool uniform_spacing() const noexcept;

  friend bool operator==(const SeriesFrame&, const SeriesFrame&) = default;

private:
  std::vector<Timestamp> timestamps_;
  std::vector<Column> columns_;
  std::optional<std::vector<bool>> labels_;
};

// Rows [start, end) of a frame. Holds a pointer; the frame must outlive the view.
class WindowView {
public:
  WindowView(const SeriesFrame& frame, std::size_t start, std::size_t end);

  std::size_t start() const noexcept { return start_; }
  std::size_t end() const noexcept { return end_; }
  std::size_t size() const noexcept { return end_ - start_; }
  const SeriesFrame& frame() const noexcept { return *frame_; }
  ColumnView column(std::size_t index) const;

private:
  const SeriesFrame* frame_;
  std::size_t start_;
  std::size_t end_;
};

struct CsvOptions {
  // Time column by name; when empty, `time_index` is used.
  std::string time_column;
  std::size_t time_index = 0;
  std::string event_column = "EVENT";
  // Columns tagged Operational / Ignored instead of Quality.
  std::vector<std::string> operational_columns;
  std::vector<std::string> ignored_columns;
};

SeriesFrame parse_csv(std::string_view text, const CsvOptions& options = {});
std::string emit_csv(const SeriesFrame& frame, bool include_labels = true);

SeriesFrame select_columns(const SeriesFrame& frame, std::span<const std::string> names);
WindowView slice_window(const SeriesFrame& frame, std::size_t start, std::size_t size);

// Shortest-exact rendering used everywhere a double is written to text.
std::string format_double(double value);

// Splits "a,b,c" on commas, trimming blanks; empty items are dropped.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace eds
