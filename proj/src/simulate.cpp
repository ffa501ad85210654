#include "eds/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "eds/error.hpp"

namespace eds {

EventShape parse_event_shape(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  n.erase(std::remove_if(n.begin(), n.end(), [](char c) { return c == '-' || c == '_'; }), n.end());
  if (n == "square") return EventShape::Square;
  if (n == "ramp") return EventShape::Ramp;
  if (n == "sinusoidal" || n == "sin") return EventShape::Sinusoidal;
  if (n == "slowsinusoidal" || n == "slowsin") return EventShape::SlowSinusoidal;
  throw ConfigError("unknown event shape '" + std::string(name) + "'");
}

const char* to_string(EventShape shape) noexcept {
  switch (shape) {
    case EventShape::Square: return "square";
    case EventShape::Ramp: return "ramp";
    case EventShape::Sinusoidal: return "sinusoidal";
    case EventShape::SlowSinusoidal: return "slow-sinusoidal";
  }
  return "?";
}

std::size_t EventSpec::effective_period() const noexcept {
  if (period) return *period;
  return shape == EventShape::SlowSinusoidal ? duration : std::max<std::size_t>(2, duration / 5);
}

double EventSpec::offset(std::size_t t) const noexcept {
  const double rel = static_cast<double>(t - start);
  switch (shape) {
    case EventShape::Square: return strength;
    case EventShape::Ramp:
      return duration == 1 ? strength : strength * rel / static_cast<double>(duration - 1);
    case EventShape::Sinusoidal:
    case EventShape::SlowSinusoidal:
      return strength * std::sin(2.0 * std::numbers::pi * rel / static_cast<double>(effective_period()));
  }
  return 0.0;
}

SeriesFrame inject_events(const SeriesFrame& frame, std::span<const EventSpec> specs, std::uint64_t /*seed*/) {
  std::vector<Column> columns = frame.columns();
  std::vector<bool> labels = frame.has_labels() ? frame.labels() : std::vector<bool>(frame.rows(), false);

  // Per column, the intervals already claimed, for overlap rejection.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> claimed(columns.size());
  for (const auto& spec : specs) {
    if (spec.duration < 1) throw ConfigError("event duration must be >= 1");
    if (spec.columns.empty()) throw ConfigError("event names no target columns");
    if (spec.start + spec.duration > frame.rows())
      throw DataError("event [" + std::to_string(spec.start) + ", " + std::to_string(spec.start + spec.duration) +
                      ") exceeds frame of " + std::to_string(frame.rows()) + " rows");
    if ((spec.shape == EventShape::Sinusoidal || spec.shape == EventShape::SlowSinusoidal) && spec.period &&
        *spec.period < 1)
      throw ConfigError("event period must be >= 1");
    const std::size_t end = spec.start + spec.duration;
    for (const auto& name : spec.columns) {
      const auto idx = frame.find_column(name);
      if (!idx) throw DataError("event targets unknown column '" + name + "'");
      for (const auto& [s, e] : claimed[*idx])
        if (spec.start < e && s < end)
          throw ConfigError("events overlap on column '" + name + "'");
      claimed[*idx].emplace_back(spec.start, end);
      Column& c = columns[*idx];
      for (std::size_t t = spec.start; t < end; ++t)
        if (c.observed[t]) c.values[t] += spec.offset(t);
    }
    for (std::size_t t = spec.start; t < end; ++t) labels[t] = true;
  }
  return SeriesFrame::make(frame.timestamps(), std::move(columns), std::move(labels));
}

}  // namespace eds
