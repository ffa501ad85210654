#pragma once

// Seeded synthetic fixtures shared by the unit and acceptance suites.

#include <cstdint>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "eds/series.hpp"
#include "eds/simulate.hpp"

namespace eds::fixtures {

// AR(1) base signal x_t = phi x_{t-1} + e_t, e ~ N(0, sigma), as a one-column frame
// with integer timestamps. Gaussian draws use Box-Muller over the raw engine so the
// series does not depend on the standard library's distribution implementation.
inline SeriesFrame ar1_frame(std::size_t n, double phi, double sigma, std::uint64_t seed,
                             const std::string& name = "X") {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  auto normal = [&] {
    const double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  std::vector<Timestamp> ts;
  Column c{name};
  double x = normal() * sigma / std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) x = phi * x + sigma * normal();
    ts.push_back({std::to_string(t), static_cast<std::int64_t>(t)});
    c.push(x);
  }
  return SeriesFrame::make(std::move(ts), {std::move(c)});
}

inline EventSpec square_event(const std::string& column, std::size_t start, std::size_t duration, double strength) {
  EventSpec e;
  e.shape = EventShape::Square;
  e.columns = {column};
  e.start = start;
  e.duration = duration;
  e.strength = strength;
  return e;
}

}  // namespace eds::fixtures
