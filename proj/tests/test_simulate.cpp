#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eds/error.hpp"
#include "eds/simulate.hpp"

using namespace eds;

namespace {

SeriesFrame zeros(std::size_t rows, std::vector<std::string> names) {
  std::vector<Timestamp> ts;
  std::vector<Column> cols;
  for (auto& n : names) cols.push_back(Column{n});
  for (std::size_t t = 0; t < rows; ++t) {
    ts.push_back({std::to_string(t), static_cast<std::int64_t>(t)});
    for (auto& c : cols) c.push(0.0);
  }
  return SeriesFrame::make(ts, cols);
}

EventSpec event(EventShape s, std::string col, std::size_t start, std::size_t dur, double a) {
  EventSpec e;
  e.shape = s;
  e.columns = {std::move(col)};
  e.start = start;
  e.duration = dur;
  e.strength = a;
  return e;
}

}  // namespace

TEST(InjectEvents, SquareOnZeroColumn) {
  const auto f = inject_events(zeros(8, {"A"}), std::vector{event(EventShape::Square, "A", 2, 3, 1.0)});
  EXPECT_EQ(f.column(0).values, (std::vector<double>{0, 0, 1, 1, 1, 0, 0, 0}));
  EXPECT_EQ(f.labels(), (std::vector<bool>{false, false, true, true, true, false, false, false}));
}

TEST(InjectEvents, RampEndpoints) {
  const auto f = inject_events(zeros(5, {"A"}), std::vector{event(EventShape::Ramp, "A", 0, 5, 4.0)});
  EXPECT_EQ(f.column(0).values, (std::vector<double>{0, 1, 2, 3, 4}));
  const auto one = inject_events(zeros(3, {"A"}), std::vector{event(EventShape::Ramp, "A", 1, 1, 4.0)});
  EXPECT_EQ(one.column(0).values[1], 4.0);
}

TEST(InjectEvents, SinusoidalValues) {
  auto e = event(EventShape::Sinusoidal, "A", 10, 40, 3.0);
  EXPECT_EQ(e.effective_period(), 8u);
  const auto f = inject_events(zeros(60, {"A"}), std::vector{e});
  EXPECT_EQ(f.column(0).values[10], 0.0);
  EXPECT_NEAR(f.column(0).values[10 + 2], 3.0, 1e-12);  // P / 4
  auto slow = event(EventShape::SlowSinusoidal, "A", 0, 40, 3.0);
  EXPECT_EQ(slow.effective_period(), 40u);
  EXPECT_NEAR(slow.offset(10), 3.0, 1e-12);
  auto tiny = event(EventShape::Sinusoidal, "A", 0, 3, 1.0);
  EXPECT_EQ(tiny.effective_period(), 2u);
}

TEST(InjectEvents, LeitFigureScenario) {
  std::vector<Timestamp> ts;
  Column leit{"Leit"}, ph{"pH"};
  for (std::size_t t = 0; t < 4000; ++t) {
    ts.push_back({std::to_string(t), static_cast<std::int64_t>(t)});
    leit.push(211.0 + std::sin(0.01 * static_cast<double>(t)));
    ph.push(8.3);
  }
  const auto base = SeriesFrame::make(ts, {ph, leit});
  const auto f = inject_events(base, std::vector{event(EventShape::Square, "Leit", 2000, 500, 5.0)});
  for (std::size_t t = 0; t < 4000; ++t) {
    const bool in = t >= 2000 && t < 2500;
    EXPECT_EQ(f.labels()[t], in);
    if (in) EXPECT_EQ(f.column("Leit").values[t], base.column("Leit").values[t] + 5.0);
    EXPECT_EQ(f.column("pH").values[t], 8.3);
  }
}

TEST(InjectEvents, ChangesOnlySpecCellsAndSubtractionRestores) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> grid(-4096, 4096);
  std::vector<Timestamp> ts;
  std::vector<Column> cols{{"A"}, {"B"}, {"C"}};
  for (std::size_t t = 0; t < 600; ++t) {
    ts.push_back({std::to_string(t), static_cast<std::int64_t>(t)});
    // Dyadic values keep x + offset - offset exact in binary floating point.
    for (auto& c : cols) c.push(grid(rng) / 64.0);
  }
  cols[1].observed[30] = 0;
  const auto base = SeriesFrame::make(ts, cols);
  std::vector<EventSpec> specs{event(EventShape::Square, "A", 10, 50, 2.5), event(EventShape::Ramp, "B", 20, 33, -8.0),
                               event(EventShape::Square, "A", 300, 20, 0.75)};
  specs.push_back(event(EventShape::Sinusoidal, "C", 400, 100, 8.0));
  const auto f = inject_events(base, specs);

  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t t = 0; t < base.rows(); ++t) {
      const EventSpec* hit = nullptr;
      for (const auto& s : specs)
        if (s.columns[0] == base.column(k).name && t >= s.start && t < s.start + s.duration) hit = &s;
      EXPECT_EQ(f.column(k).observed[t], base.column(k).observed[t]);
      if (!base.column(k).observed[t]) continue;
      if (!hit) {
        EXPECT_EQ(f.column(k).values[t] - base.column(k).values[t], 0.0);
      } else if (hit->shape != EventShape::Sinusoidal) {
        EXPECT_EQ(f.column(k).values[t] - hit->offset(t), base.column(k).values[t]);
      } else {
        EXPECT_NEAR(f.column(k).values[t] - hit->offset(t), base.column(k).values[t], 1e-12);
      }
    }
  }
  for (std::size_t t = 0; t < base.rows(); ++t) {
    bool in = false;
    for (const auto& s : specs) in = in || (t >= s.start && t < s.start + s.duration);
    EXPECT_EQ(f.labels()[t], in);
  }
}

TEST(InjectEvents, ExistingLabelsArePreserved) {
  auto base = zeros(6, {"A"});
  base = SeriesFrame::make(base.timestamps(), base.columns(), std::vector<bool>{true, false, false, false, false, false});
  const auto f = inject_events(base, std::vector{event(EventShape::Square, "A", 3, 2, 1.0)});
  EXPECT_EQ(f.labels(), (std::vector<bool>{true, false, false, true, true, false}));
}

TEST(InjectEvents, Errors) {
  const auto f = zeros(10, {"A", "B"});
  EXPECT_THROW(inject_events(f, std::vector{event(EventShape::Square, "A", 8, 3, 1.0)}), DataError);
  EXPECT_THROW(inject_events(f, std::vector{event(EventShape::Square, "Z", 0, 3, 1.0)}), DataError);
  EXPECT_THROW(inject_events(f, std::vector{event(EventShape::Square, "A", 0, 0, 1.0)}), ConfigError);
  EXPECT_THROW(inject_events(f, std::vector{event(EventShape::Square, "A", 0, 5, 1.0),
                                            event(EventShape::Ramp, "A", 4, 3, 1.0)}),
               ConfigError);
  // Same rows on different columns are fine.
  EXPECT_NO_THROW(inject_events(f, std::vector{event(EventShape::Square, "A", 0, 5, 1.0),
                                               event(EventShape::Ramp, "B", 0, 5, 1.0)}));
}

TEST(EventShape, Parsing) {
  EXPECT_EQ(parse_event_shape("square"), EventShape::Square);
  EXPECT_EQ(parse_event_shape("Ramp"), EventShape::Ramp);
  EXPECT_EQ(parse_event_shape("slow-sinusoidal"), EventShape::SlowSinusoidal);
  EXPECT_EQ(parse_event_shape("sinusoidal"), EventShape::Sinusoidal);
  EXPECT_THROW(parse_event_shape("triangle"), ConfigError);
}
