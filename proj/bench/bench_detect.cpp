// Serial reference vs parallel kernels on synthetic AR(1) frames.

#include <benchmark/benchmark.h>

#include "eds/detector.hpp"
#include "eds/forecast.hpp"
#include "eds/simulate.hpp"
#include "synthetic.hpp"

using namespace eds;

namespace {

SeriesFrame frame_with(std::size_t rows, std::size_t cols) {
  std::vector<Column> columns;
  std::vector<EventSpec> events;
  SeriesFrame first;
  for (std::size_t k = 0; k < cols; ++k) {
    const std::string name = "c" + std::to_string(k);
    auto f = fixtures::ar1_frame(rows, 0.6, 1.0, 100 + k, name);
    columns.push_back(f.column(0));
    events.push_back(fixtures::square_event(name, rows / 2 + 37 * k, 50, 8.0));
    if (k == 0) first = std::move(f);
  }
  return inject_events(SeriesFrame::make(first.timestamps(), std::move(columns)), events);
}

DetectorConfig config(bool mask) {
  DetectorConfig c;
  c.window_size = 200;
  c.n_iterations_refit = 5;
  c.model.kind = ModelKind::ArimaLite;
  c.mask_outliers = mask;
  return c;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

// range(0): 0 serial, 1 parallel.
void BM_DetectUnmasked(benchmark::State& state) {
  const auto frame = frame_with(5000, 1);
  const auto c = config(false);
  for (auto _ : state) benchmark::DoNotOptimize(detect_events(frame, c, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frame.rows()));
}

void BM_DetectMaskedSixColumns(benchmark::State& state) {
  const auto frame = frame_with(5000, 6);
  const auto c = config(true);
  for (auto _ : state) benchmark::DoNotOptimize(detect_events(frame, c, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frame.rows()));
}

void BM_FitSixteenColumns(benchmark::State& state) {
  const auto frame = frame_with(2000, 16);
  SeriesMatrix m;
  for (const auto& c : frame.columns()) {
    m.names.push_back(c.name);
    m.columns.push_back(c.values);
  }
  ForecastModelSpec spec;
  spec.kind = ModelKind::ArimaLite;
  for (auto _ : state) benchmark::DoNotOptimize(fit(m, spec, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_DetectUnmasked)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectMaskedSixColumns)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitSixteenColumns)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
