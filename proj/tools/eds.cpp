// eds: batch detect / simulate / evaluate / roc runs and the HTTP service.
// Exit codes: 0 ok, 1 configuration error, 2 data error, 3 runtime failure.
// Failures print one line to stderr:
//   eds: error kind=<config|data|runtime> field=<name|-> message=<text>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "eds/config.hpp"
#include "eds/error.hpp"
#include "eds/pipeline.hpp"
#include "eds/report.hpp"
#include "eds/service.hpp"
#include "eds/simulate.hpp"

namespace fs = std::filesystem;
using namespace eds;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 1;
    case ErrorKind::Data: return 2;
    case ErrorKind::Runtime: return 3;
  }
  return 3;
}

int fail(ErrorKind kind, const std::string& message, const std::string& field = {}) {
  std::string flat = message;
  for (char& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "eds: error kind=" << to_string(kind) << " field=" << (field.empty() ? "-" : field)
            << " message=" << flat << "\n";
  return exit_code(kind);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'", "input");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) throw RuntimeFailure("cannot write '" + path.string() + "'");
}

struct CsvFlags {
  std::string time_column;
  std::string event_column = "EVENT";
  std::string operational;
  std::string ignored;

  void add(CLI::App* app) {
    app->add_option("--time-column", time_column, "Name of the time column (default: first column)");
    app->add_option("--event-column", event_column, "Name of the ground-truth label column")->capture_default_str();
    app->add_option("--operational", operational, "Comma-separated operational (non-scored) columns");
    app->add_option("--ignore", ignored, "Comma-separated columns to drop");
  }
  CsvOptions options() const {
    CsvOptions o;
    o.time_column = time_column;
    o.event_column = event_column;
    o.operational_columns = split_list(operational);
    o.ignored_columns = split_list(ignored);
    return o;
  }
};

struct DetectArgs {
  std::string input, config, out, columns, model, preprocess;
  std::optional<std::size_t> window_size, refit, bed_window, max_p, seed;
  std::optional<double> n_sd, event_threshold;
  bool drift = false, no_mask = false, serial = false, include_warmup = false, no_plot = false;
  CsvFlags csv;
};

int run_detect(const DetectArgs& a) {
  ConfigDocument doc;
  if (!a.config.empty()) {
    std::string text;
    try {
      text = read_text(a.config);
    } catch (const Error& e) {
      throw ConfigError(e.what(), "config");
    }
    doc = parse_config_text(text);
  }
  auto set = [&](const char* key, const Json& v) { apply_config_value(doc, key, v); };
  if (!a.model.empty()) set("buildModelAlgo", a.model);
  if (a.drift) set("drift", true);
  if (a.window_size) set("windowSize", *a.window_size);
  if (a.refit) set("nIterationsRefit", *a.refit);
  if (a.n_sd) set("nStandardDeviations", *a.n_sd);
  if (a.event_threshold) set("eventThreshold", *a.event_threshold);
  if (a.bed_window) set("bedWindowSize", *a.bed_window);
  if (a.max_p) set("maxP", *a.max_p);
  if (a.seed) set("seed", *a.seed);
  if (!a.preprocess.empty()) set("preprocessors", a.preprocess);
  if (a.no_mask) set("maskOutliers", false);
  if (!a.columns.empty()) set("columns", a.columns);
  doc.detector.validate();

  const SeriesFrame frame = load_frame(read_text(a.input), a.csv.options(), doc.columns);
  const DetectionResult result =
      detect_events(frame, doc.detector, a.serial ? Execution::Serial : Execution::Parallel);
  for (const auto& w : result.warnings) spdlog::warn("{}", w);
  for (const auto& d : result.diagnostics) spdlog::info("rows [{}, {}): {}", d.window_start, d.window_end, d.message);

  const fs::path out(a.out);
  fs::create_directories(out);
  write_text(out / "results.csv", results_csv(result));
  write_text(out / "results.json", result_to_json(result).dump(2) + "\n");
  if (!a.no_plot) write_text(out / "plot.svg", series_svg(frame, result));

  std::size_t events = 0;
  for (const auto& r : result.records) events += r.label == Label::Event;
  std::cout << "rows " << result.records.size() << ", warmup " << doc.detector.window_size << ", event rows "
            << events << "\n";
  if (frame.has_labels()) {
    const Evaluation e = evaluate_result(result, frame.labels(), a.include_warmup);
    write_text(out / "metrics.json", metrics_json(e).dump(2) + "\n");
    write_text(out / "metrics.txt", metrics_table(e));
    std::cout << metrics_table(e);
  }
  return 0;
}

struct SimulateArgs {
  std::string input, out, shape, columns, events;
  std::optional<std::size_t> start, duration, period;
  std::optional<double> strength;
  std::uint64_t seed = 0;
  CsvFlags csv;
};

int run_simulate(const SimulateArgs& a) {
  std::vector<EventSpec> specs;
  if (!a.events.empty()) {
    std::string text;
    try {
      text = read_text(a.events);
    } catch (const Error& e) {
      throw ConfigError(e.what(), "events");
    }
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("events file is not valid JSON: ") + e.what(), "events");
    }
    specs = event_specs_from_json(j);
  }
  if (!a.shape.empty()) {
    Json j{{"shape", a.shape}, {"columns", a.columns}};
    if (!a.start) throw ConfigError("--start is required with --shape", "start");
    if (!a.duration) throw ConfigError("--duration is required with --shape", "duration");
    if (!a.strength) throw ConfigError("--strength is required with --shape", "strength");
    j["start"] = *a.start;
    j["duration"] = *a.duration;
    j["strength"] = *a.strength;
    if (a.period) j["period"] = *a.period;
    specs.push_back(event_spec_from_json(j));
  }
  if (specs.empty()) throw ConfigError("give --shape/--columns/--start/--duration/--strength or --events", "shape");

  const SeriesFrame frame = load_frame(read_text(a.input), a.csv.options(), {});
  const SeriesFrame injected = inject_events(frame, specs, a.seed);
  write_text(a.out, emit_csv(injected, true));
  std::size_t labelled = 0;
  for (bool b : injected.labels()) labelled += b;
  std::cout << "wrote " << a.out << ": " << injected.rows() << " rows, " << labelled << " event rows\n";
  return 0;
}

struct ScoreArgs {
  std::string results, truth, out, svg, table;
  bool include_warmup = false;
  CsvFlags csv;
};

// Results and truth must describe the same rows.
std::pair<DetectionResult, std::vector<bool>> load_scoring(const ScoreArgs& a) {
  DetectionResult result = parse_results_csv(read_text(a.results));
  const SeriesFrame truth = load_frame(read_text(a.truth), a.csv.options(), {});
  if (!truth.has_labels())
    throw DataError("truth file has no '" + a.csv.event_column + "' label column", "truth");
  if (truth.rows() != result.records.size())
    throw DataError("truth has " + std::to_string(truth.rows()) + " rows but results have " +
                        std::to_string(result.records.size()),
                    "truth");
  for (std::size_t i = 0; i < truth.rows(); ++i)
    if (truth.timestamps()[i].text != result.records[i].timestamp)
      throw DataError("row " + std::to_string(i) + ": truth timestamp '" + truth.timestamps()[i].text +
                          "' differs from results timestamp '" + result.records[i].timestamp + "'",
                      "truth");
  return {std::move(result), truth.labels()};
}

int run_evaluate(const ScoreArgs& a) {
  const auto [result, truth] = load_scoring(a);
  const Evaluation e = evaluate_result(result, truth, a.include_warmup);
  if (!a.out.empty()) write_text(a.out, metrics_json(e).dump(2) + "\n");
  if (!a.table.empty()) write_text(a.table, metrics_table(e));
  std::cout << metrics_table(e);
  return 0;
}

int run_roc(const ScoreArgs& a) {
  const auto [result, truth] = load_scoring(a);
  const RocCurve curve = roc_for_result(result, truth, a.include_warmup);
  write_text(a.out, roc_csv(curve));
  if (!a.svg.empty()) write_text(a.svg, roc_svg(curve));
  std::cout << "points " << curve.points.size() << ", auc "
            << (curve.auc ? format_double(*curve.auc) : std::string("undefined")) << "\n";
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::size_t workers = 0;
};

int run_serve(const ServeArgs& a) {
  ServerOptions o;
  o.host = a.host;
  o.port = a.port;
  o.workers = a.workers;
  if (!a.data_dir.empty()) {
    o.data_dir = a.data_dir;
  } else if (const char* env = std::getenv("EDS_DATA_DIR"); env && *env) {
    o.data_dir = env;
  } else {
    o.data_dir = "eds-data";
  }

  // SIGINT/SIGTERM are taken synchronously by a watcher thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpService service(o);
  const int port = service.bind();
  std::cout << "listening on http://" << o.host << ":" << port << " (data " << fs::absolute(o.data_dir).string()
            << ")" << std::endl;
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.listen();
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-window event detection for multivariate sensor series"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  DetectArgs d;
  auto* detect = app.add_subcommand("detect", "Run the detector over a CSV file");
  detect->add_option("--input", d.input, "Input CSV")->required();
  detect->add_option("--config", d.config, "Config file (key = value lines or JSON); flags override it");
  detect->add_option("--columns", d.columns, "Comma-separated columns to analyse (default: all)");
  detect->add_option("--model", d.model, "ForecastMeanf, ForecastRWF, ForecastSES, ForecastHolt, ForecastThetaf, "
                                         "ForecastArima or NeuralNetwork");
  detect->add_flag("--drift", d.drift, "ForecastRWF with drift");
  detect->add_option("--window-size", d.window_size, "Training window length");
  detect->add_option("--refit-every", d.refit, "Forecast horizon and window step");
  detect->add_option("--n-sd", d.n_sd, "Outlier threshold in residual standard deviations");
  detect->add_option("--event-threshold", d.event_threshold, "Event probability threshold");
  detect->add_option("--bed-window", d.bed_window, "Binomial event discriminator window");
  detect->add_option("--max-p", d.max_p, "Largest AR order for ForecastArima");
  detect->add_option("--seed", d.seed, "NeuralNetwork weight seed");
  detect->add_option("--preprocess", d.preprocess, "Comma-separated preprocessors, applied in order");
  detect->add_flag("--no-mask-outliers", d.no_mask, "Train on event rows as measured");
  detect->add_flag("--serial", d.serial, "Use the single-threaded reference path");
  detect->add_flag("--include-warmup", d.include_warmup, "Score warmup rows as predicted Normal");
  detect->add_flag("--no-plot", d.no_plot, "Skip the SVG plot");
  detect->add_option("--out", d.out, "Output directory")->required();
  d.csv.add(detect);

  SimulateArgs s;
  auto* simulate = app.add_subcommand("simulate", "Inject synthetic events into a CSV file");
  simulate->add_option("--input", s.input, "Input CSV")->required();
  simulate->add_option("--shape", s.shape, "square, ramp, sinusoidal or slow-sinusoidal");
  simulate->add_option("--columns", s.columns, "Comma-separated target columns");
  simulate->add_option("--start", s.start, "First event row (0-based)");
  simulate->add_option("--duration", s.duration, "Event length in rows");
  simulate->add_option("--strength", s.strength, "Amplitude in column units");
  simulate->add_option("--period", s.period, "Period in rows for sinusoidal shapes");
  simulate->add_option("--events", s.events, "JSON file with a list of events");
  simulate->add_option("--seed", s.seed, "Seed for randomised shapes")->capture_default_str();
  simulate->add_option("--out", s.out, "Output CSV")->required();
  s.csv.add(simulate);

  ScoreArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a results CSV against labelled data");
  evaluate->add_option("--results", ev.results, "results.csv from detect")->required();
  evaluate->add_option("--truth", ev.truth, "CSV with the ground-truth label column")->required();
  evaluate->add_option("--out", ev.out, "Write metrics JSON here");
  evaluate->add_option("--table", ev.table, "Write the text table here");
  evaluate->add_flag("--include-warmup", ev.include_warmup, "Score warmup rows as predicted Normal");
  ev.csv.add(evaluate);

  ScoreArgs rc;
  auto* roc = app.add_subcommand("roc", "ROC curve of the event probabilities");
  roc->add_option("--results", rc.results, "results.csv from detect")->required();
  roc->add_option("--truth", rc.truth, "CSV with the ground-truth label column")->required();
  roc->add_option("--out", rc.out, "ROC CSV (threshold,fpr,tpr)")->required();
  roc->add_option("--svg", rc.svg, "ROC plot");
  roc->add_flag("--include-warmup", rc.include_warmup, "Score warmup rows with probability 0");
  rc.csv.add(roc);

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service (store root: --data-dir or EDS_DATA_DIR)");
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv.port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--data-dir", sv.data_dir, "Store root");
  serve->add_option("--workers", sv.workers, "Detection workers (0 = available parallelism)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::Config, e.what());
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    if (*detect) return run_detect(d);
    if (*simulate) return run_simulate(s);
    if (*evaluate) return run_evaluate(ev);
    if (*roc) return run_roc(rc);
    if (*serve) return run_serve(sv);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), e.field());
  } catch (const std::exception& e) {
    return fail(ErrorKind::Runtime, e.what());
  }
  return 0;
}
