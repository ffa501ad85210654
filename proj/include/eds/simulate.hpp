#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eds/series.hpp"

namespace eds {

enum class EventShape { Square, Ramp, Sinusoidal, SlowSinusoidal };

EventShape parse_event_shape(std::string_view name);
const char* to_string(EventShape shape) noexcept;

struct EventSpec {
  EventShape shape = EventShape::Square;
  std::vector<std::string> columns;
  std::size_t start = 0;
  std::size_t duration = 1;
  double strength = 1.0;
  std::optional<std::size_t> period;  // sinusoidal shapes only

  // Period used for sinusoidal shapes when none is given.
  std::size_t effective_period() const noexcept;
  // Additive offset at row `t` (t must lie inside the event).
  double offset(std::size_t t) const noexcept;

  friend bool operator==(const EventSpec&, const EventSpec&) = default;
};

// Adds each event's offset to its target columns and sets labels on its rows.
// Unobserved cells stay unobserved. Existing labels are kept (OR-ed).
// `seed` is accepted for shapes with a random component; all current shapes are deterministic.
SeriesFrame inject_events(const SeriesFrame& frame, std::span<const EventSpec> specs, std::uint64_t seed = 0);

}  // namespace eds
