#include "eds/service.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "httplib.h"

#include "eds/error.hpp"
#include "eds/parallel.hpp"
#include "eds/pipeline.hpp"
#include "eds/report.hpp"
#include "eds/simulate.hpp"

namespace fs = std::filesystem;

namespace eds {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw RuntimeFailure("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw RuntimeFailure("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 &&
         std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '-'; });
}

DatasetInfo describe(const std::string& id, const CsvOptions& options, const SeriesFrame& frame) {
  DatasetInfo info;
  info.id = id;
  info.options = options;
  info.rows = frame.rows();
  for (const auto& c : frame.columns()) {
    info.column_names.push_back(c.name);
    info.column_roles.push_back(to_string(c.role));
    info.missing.push_back(c.view().missing_count());
  }
  info.has_labels = frame.has_labels();
  return info;
}

Json info_to_disk(const DatasetInfo& info) {
  Json j = dataset_to_json(info);
  j["options"] = csv_options_to_json(info.options);
  return j;
}

DatasetInfo info_from_disk(const Json& j) {
  DatasetInfo info;
  info.id = j.at("datasetId").get<std::string>();
  info.options = csv_options_from_json(j.at("options"));
  info.rows = j.at("rows").get<std::size_t>();
  for (const auto& c : j.at("columns")) {
    info.column_names.push_back(c.at("name").get<std::string>());
    info.column_roles.push_back(c.at("role").get<std::string>());
    info.missing.push_back(c.at("missing").get<std::size_t>());
  }
  info.has_labels = j.at("hasLabels").get<bool>();
  info.created_at = j.at("createdAt").get<std::string>();
  return info;
}

}  // namespace

Json dataset_to_json(const DatasetInfo& info) {
  Json cols = Json::array();
  for (std::size_t i = 0; i < info.column_names.size(); ++i)
    cols.push_back({{"name", info.column_names[i]}, {"role", info.column_roles[i]}, {"missing", info.missing[i]}});
  return Json{{"datasetId", info.id},   {"rows", info.rows},           {"columns", cols},
              {"hasLabels", info.has_labels}, {"createdAt", info.created_at}};
}

const char* to_string(JobStatus s) noexcept {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "?";
}

JobStatus parse_job_status(std::string_view name) {
  if (name == "queued") return JobStatus::Queued;
  if (name == "running") return JobStatus::Running;
  if (name == "done") return JobStatus::Done;
  if (name == "failed") return JobStatus::Failed;
  throw DataError("unknown job status '" + std::string(name) + "'");
}

Json job_to_json(const JobRecord& job) {
  auto opt = [](const std::string& s) { return s.empty() ? Json(nullptr) : Json(s); };
  return Json{{"jobId", job.id},
              {"datasetId", job.dataset_id},
              {"columns", job.config.columns},
              {"config", config_to_json(job.config.detector)},
              {"status", to_string(job.status)},
              {"createdAt", job.created_at},
              {"startedAt", opt(job.started_at)},
              {"finishedAt", opt(job.finished_at)},
              {"diagnostics", job.diagnostics},
              {"warnings", job.warnings},
              {"error", opt(job.error)},
              {"hasMetrics", job.has_metrics}};
}

JobRecord job_from_json(const Json& j) {
  auto str = [&](const char* key) { return j.at(key).is_null() ? std::string() : j.at(key).get<std::string>(); };
  JobRecord job;
  job.id = j.at("jobId").get<std::string>();
  job.dataset_id = j.at("datasetId").get<std::string>();
  job.config = config_from_json(j.at("config"));
  job.config.columns = j.at("columns").get<std::vector<std::string>>();
  job.status = parse_job_status(j.at("status").get<std::string>());
  job.created_at = str("createdAt");
  job.started_at = str("startedAt");
  job.finished_at = str("finishedAt");
  job.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  job.warnings = j.at("warnings").get<std::vector<std::string>>();
  job.error = str("error");
  job.has_metrics = j.at("hasMetrics").get<bool>();
  return job;
}

// --- Store -----------------------------------------------------------------

Store::Store(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "datasets");
  fs::create_directories(root_ / "jobs");
}

DatasetInfo Store::put_dataset(const std::string& csv, const CsvOptions& options) {
  const SeriesFrame frame = parse_csv(csv, options);
  // The options decide how the bytes are read, so they are part of the key.
  const std::string id = sha256_hex(csv_options_to_json(options).dump() + '\n' + csv);
  if (auto existing = find_dataset(id)) return *existing;
  DatasetInfo info = describe(id, options, frame);
  info.created_at = utc_now();
  write_atomic(root_ / "datasets" / (id + ".csv"), csv);
  write_atomic(root_ / "datasets" / (id + ".json"), info_to_disk(info).dump(2));
  return info;
}

std::optional<DatasetInfo> Store::find_dataset(const std::string& id) const {
  if (!valid_id(id)) return std::nullopt;
  const fs::path meta = root_ / "datasets" / (id + ".json");
  if (!fs::exists(meta)) return std::nullopt;
  return info_from_disk(Json::parse(read_file(meta)));
}

std::string Store::dataset_csv(const std::string& id) const {
  return read_file(root_ / "datasets" / (id + ".csv"));
}

SeriesFrame Store::dataset_frame(const DatasetInfo& info, const std::vector<std::string>& columns) const {
  return load_frame(dataset_csv(info.id), info.options, columns);
}

std::vector<DatasetInfo> Store::list_datasets() const {
  std::vector<DatasetInfo> out;
  for (const auto& entry : fs::directory_iterator(root_ / "datasets"))
    if (entry.path().extension() == ".json") out.push_back(info_from_disk(Json::parse(read_file(entry.path()))));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
  });
  return out;
}

void Store::write_job(const JobRecord& job) const {
  write_atomic(root_ / "jobs" / job.id / "job.json", job_to_json(job).dump(2));
}

std::vector<JobRecord> Store::load_jobs() const {
  std::vector<JobRecord> out;
  for (const auto& entry : fs::directory_iterator(root_ / "jobs")) {
    const fs::path file = entry.path() / "job.json";
    if (!entry.is_directory() || !fs::exists(file)) continue;
    try {
      out.push_back(job_from_json(Json::parse(read_file(file))));
    } catch (const std::exception& e) {
      spdlog::warn("skipping unreadable job record {}: {}", file.string(), e.what());
    }
  }
  return out;
}

void Store::write_job_file(const std::string& job_id, const std::string& name, const std::string& content) const {
  write_atomic(root_ / "jobs" / job_id / name, content);
}

std::optional<std::string> Store::read_job_file(const std::string& job_id, const std::string& name) const {
  if (!valid_id(job_id)) return std::nullopt;
  const fs::path file = root_ / "jobs" / job_id / name;
  if (!fs::exists(file)) return std::nullopt;
  return read_file(file);
}

// --- JobService ------------------------------------------------------------

JobService::JobService(Store& store, std::size_t workers) : store_(store) {
  for (JobRecord& job : store_.load_jobs()) {
    if (job.status == JobStatus::Running) {
      job.status = JobStatus::Failed;
      job.error = "service stopped while the job was running";
      job.finished_at = utc_now();
      store_.write_job(job);
    }
    if (job.status == JobStatus::Queued) queue_.push_back(job.id);
    jobs_.emplace(job.id, std::move(job));
  }
  std::sort(queue_.begin(), queue_.end(), [&](const std::string& a, const std::string& b) {
    return std::tie(jobs_.at(a).created_at, a) < std::tie(jobs_.at(b).created_at, b);
  });
  const std::size_t n = workers == 0 ? available_threads() : workers;
  for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this] { work(); });
}

JobService::~JobService() { stop(); }

void JobService::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  queued_.notify_all();
  for (auto& t : workers_)
    if (t.joinable()) t.join();
}

JobRecord JobService::submit(const std::string& dataset_id, const ConfigDocument& config) {
  const auto info = store_.find_dataset(dataset_id);
  if (!info) throw DataError("unknown dataset '" + dataset_id + "'", "datasetId");
  config.detector.validate();
  try {
    const SeriesFrame frame = store_.dataset_frame(*info, config.columns);
    check_applicable(frame, config.detector);
  } catch (const Error& e) {
    throw Rejected(e);
  }

  static std::mutex rng_mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  JobRecord job;
  job.dataset_id = dataset_id;
  job.config = config;
  job.created_at = utc_now();
  {
    std::lock_guard lock(mutex_);
    do {
      std::lock_guard rl(rng_mutex);
      char buf[24];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
      job.id = std::string("job-") + buf;
    } while (jobs_.count(job.id));
    store_.write_job(job);
    jobs_.emplace(job.id, job);
    queue_.push_back(job.id);
  }
  queued_.notify_one();
  changed_.notify_all();
  return job;
}

std::optional<JobRecord> JobService::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<JobRecord> JobService::list() const {
  std::lock_guard lock(mutex_);
  std::vector<JobRecord> out;
  for (const auto& [id, job] : jobs_) out.push_back(job);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id); });
  return out;
}

std::optional<JobRecord> JobService::wait(const std::string& id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  const auto finished = [&] {
    const auto it = jobs_.find(id);
    return it == jobs_.end() || it->second.status == JobStatus::Done || it->second.status == JobStatus::Failed;
  };
  changed_.wait_for(lock, timeout, finished);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void JobService::update(const JobRecord& job) {
  {
    std::lock_guard lock(mutex_);
    store_.write_job(job);
    jobs_[job.id] = job;
  }
  changed_.notify_all();
}

void JobService::work() {
  for (;;) {
    JobRecord job;
    {
      std::unique_lock lock(mutex_);
      queued_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = jobs_.at(queue_.front());
      queue_.pop_front();
    }
    run(std::move(job));
  }
}

void JobService::run(JobRecord job) {
  job.status = JobStatus::Running;
  job.started_at = utc_now();
  update(job);
  try {
    const auto info = store_.find_dataset(job.dataset_id);
    if (!info) throw DataError("dataset '" + job.dataset_id + "' disappeared from the store");
    const SeriesFrame frame = store_.dataset_frame(*info, job.config.columns);
    // One job is sequential; concurrency comes from running jobs side by side.
    const DetectionResult result = detect_events(frame, job.config.detector, Execution::Serial);
    store_.write_job_file(job.id, "results.csv", results_csv(result));
    store_.write_job_file(job.id, "result.json", result_to_json(result).dump());
    if (frame.has_labels()) {
      store_.write_job_file(job.id, "metrics.json", metrics_json(evaluate_result(result, frame.labels())).dump(2));
      store_.write_job_file(job.id, "roc.json", roc_json(roc_for_result(result, frame.labels())).dump());
      job.has_metrics = true;
    }
    for (const auto& d : result.diagnostics)
      job.diagnostics.push_back("rows [" + std::to_string(d.window_start) + ", " + std::to_string(d.window_end) +
                                "): " + d.message);
    job.warnings = result.warnings;
    job.status = JobStatus::Done;
  } catch (const std::exception& e) {
    job.status = JobStatus::Failed;
    job.error = e.what();
  }
  job.finished_at = utc_now();
  update(job);
}

// --- HTTP ------------------------------------------------------------------

namespace {

constexpr std::size_t kDefaultPage = 1000;
constexpr std::size_t kMaxPage = 10000;

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const std::string& kind,
                const std::string& field = {}) {
  Json body{{"error", message}, {"kind", kind}, {"status", status}};
  body["fields"] = Json::array();
  if (!field.empty()) body["fields"].push_back({{"field", field}, {"message", message}});
  send_json(res, status, body);
}

void send_error(httplib::Response& res, int status, const Error& e) {
  send_error(res, status, e.what(), to_string(e.kind()), e.field());
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::optional<std::size_t> count_param(const httplib::Request& req, const std::string& key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string v = req.get_param_value(key);
  std::size_t used = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || v.front() == '-') throw ConfigError(key + " must be a non-negative integer", key);
  return static_cast<std::size_t>(n);
}

CsvOptions upload_options(const httplib::Request& req) {
  CsvOptions o;
  if (req.has_param("timeColumn")) o.time_column = req.get_param_value("timeColumn");
  if (req.has_param("eventColumn")) o.event_column = req.get_param_value("eventColumn");
  if (req.has_param("operationalColumns")) o.operational_columns = split_list(req.get_param_value("operationalColumns"));
  if (req.has_param("ignoredColumns")) o.ignored_columns = split_list(req.get_param_value("ignoredColumns"));
  return o;
}

}  // namespace

struct HttpService::Impl {
  ServerOptions options;
  Store store;
  JobService jobs;
  httplib::Server server;
  bool bound = false;

  explicit Impl(ServerOptions o)
      : options(std::move(o)), store(options.data_dir), jobs(store, options.workers) {
    routes();
  }

  // Runs `fn`; Error kinds map to 400 (config), 422 (data, rejected) and 500.
  template <class Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Rejected& e) {
      send_error(res, 422, e);
    } catch (const Error& e) {
      send_error(res, e.kind() == ErrorKind::Runtime ? 500 : 400, e);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what(), "runtime");
    }
  }

  std::optional<JobRecord> job_or_404(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    auto job = jobs.get(id);
    if (!job) send_error(res, 404, "unknown job '" + id + "'", "data", "jobId");
    return job;
  }

  // Job must exist and be done; otherwise responds 404 / 409.
  std::optional<JobRecord> finished_job(const httplib::Request& req, httplib::Response& res) {
    auto job = job_or_404(req, res);
    if (!job) return std::nullopt;
    if (job->status == JobStatus::Failed) {
      send_error(res, 409, "job " + job->id + " failed: " + job->error, "runtime", "jobId");
      return std::nullopt;
    }
    if (job->status != JobStatus::Done) {
      send_error(res, 409, "job " + job->id + " is " + to_string(job->status), "runtime", "jobId");
      return std::nullopt;
    }
    return job;
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.set_payload_max_length(std::size_t{1} << 30);

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, Json{{"status", "ok"}});
    });

    server.Post("/api/datasets", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::string csv = req.body;
        if (req.is_multipart_form_data()) {
          if (!req.has_file("file")) throw ConfigError("multipart upload needs a 'file' part", "file");
          csv = req.get_file_value("file").content;
        }
        if (csv.empty()) throw DataError("uploaded CSV is empty", "file");
        try {
          send_json(res, 201, dataset_to_json(store.put_dataset(csv, upload_options(req))));
        } catch (const DataError& e) {
          send_error(res, 400, e);
        }
      });
    });

    server.Get("/api/datasets", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        Json list = Json::array();
        for (const auto& d : store.list_datasets()) list.push_back(dataset_to_json(d));
        send_json(res, 200, Json{{"datasets", list}});
      });
    });

    server.Get("/api/datasets/:id/preview", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto info = store.find_dataset(req.path_params.at("id"));
        if (!info) return send_error(res, 404, "unknown dataset '" + req.path_params.at("id") + "'", "data", "datasetId");
        const std::size_t k = std::min<std::size_t>(count_param(req, "rows").value_or(20), info->rows);
        const SeriesFrame frame = store.dataset_frame(*info, {});
        Json head = Json::array();
        for (std::size_t r = 0; r < k; ++r) {
          Json values = Json::array();
          for (const auto& c : frame.columns()) values.push_back(c.observed[r] ? Json(c.values[r]) : Json(nullptr));
          Json row{{"timestamp", frame.timestamps()[r].text}, {"values", values}};
          row["event"] = frame.has_labels() ? Json(static_cast<bool>(frame.labels()[r])) : Json(nullptr);
          head.push_back(row);
        }
        Json body = dataset_to_json(*info);
        body["preview"] = head;
        send_json(res, 200, body);
      });
    });

    server.Get("/api/datasets/:id/csv", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto info = store.find_dataset(req.path_params.at("id"));
        if (!info) return send_error(res, 404, "unknown dataset '" + req.path_params.at("id") + "'", "data", "datasetId");
        res.set_content(store.dataset_csv(info->id), "text/csv");
      });
    });

    server.Post("/api/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Json body = parse_body(req);
        if (!body.is_object()) throw ConfigError("request body must be a JSON object");
        if (!body.contains("datasetId") || !body["datasetId"].is_string())
          throw ConfigError("datasetId is required", "datasetId");
        const std::string dataset_id = body["datasetId"].get<std::string>();
        ConfigDocument doc;
        if (body.contains("config")) doc = config_from_json(body["config"]);
        if (body.contains("columns")) apply_config_value(doc, "columns", body["columns"]);
        doc.detector.validate();
        if (!store.find_dataset(dataset_id))
          return send_error(res, 404, "unknown dataset '" + dataset_id + "'", "data", "datasetId");
        const JobRecord job = jobs.submit(dataset_id, doc);
        res.set_header("Location", "/api/jobs/" + job.id);
        send_json(res, 202, job_to_json(job));
      });
    });

    server.Get("/api/jobs", [this](const httplib::Request&, httplib::Response& res) {
      Json list = Json::array();
      for (const auto& j : jobs.list()) list.push_back(job_to_json(j));
      send_json(res, 200, Json{{"jobs", list}});
    });

    server.Get("/api/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto job = job_or_404(req, res)) send_json(res, 200, job_to_json(*job));
    });

    server.Get("/api/jobs/:id/results", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto job = finished_job(req, res);
        if (!job) return;
        const std::size_t offset = count_param(req, "offset").value_or(0);
        const std::size_t limit = count_param(req, "limit").value_or(kDefaultPage);
        if (limit < 1 || limit > kMaxPage)
          throw ConfigError("limit must lie in [1, " + std::to_string(kMaxPage) + "]", "limit");
        const auto doc = store.read_job_file(job->id, "result.json");
        if (!doc) throw RuntimeFailure("result of job " + job->id + " is missing from the store");
        Json page = results_page_json(result_from_json(Json::parse(*doc)), offset, limit);
        page["jobId"] = job->id;
        send_json(res, 200, page);
      });
    });

    server.Get("/api/jobs/:id/results.csv", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto job = finished_job(req, res);
        if (!job) return;
        const auto csv = store.read_job_file(job->id, "results.csv");
        if (!csv) throw RuntimeFailure("results of job " + job->id + " are missing from the store");
        res.set_header("Content-Disposition", "attachment; filename=\"" + job->id + "-results.csv\"");
        res.set_content(*csv, "text/csv");
      });
    });

    for (const auto& [path, file, what] : {std::tuple{"/api/jobs/:id/metrics", "metrics.json", "metrics"},
                                           std::tuple{"/api/jobs/:id/roc", "roc.json", "ROC"}}) {
      server.Get(path, [this, name = std::string(file), label = std::string(what)](const httplib::Request& req,
                                                                                   httplib::Response& res) {
        guarded(res, [&] {
          const auto job = finished_job(req, res);
          if (!job) return;
          if (!job->has_metrics)
            return send_error(res, 422, "dataset of job " + job->id + " has no event labels; " + label +
                                            " are unavailable", "data", "datasetId");
          const auto body = store.read_job_file(job->id, name);
          if (!body) throw RuntimeFailure(label + " of job " + job->id + " are missing from the store");
          Json j = Json::parse(*body);
          j["jobId"] = job->id;
          send_json(res, 200, j);
        });
      });
    }

    server.Post("/api/simulate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Json body = parse_body(req);
        if (!body.is_object()) throw ConfigError("request body must be a JSON object");
        if (!body.contains("datasetId") || !body["datasetId"].is_string())
          throw ConfigError("datasetId is required", "datasetId");
        if (!body.contains("events")) throw ConfigError("events are required", "events");
        const std::vector<EventSpec> specs = event_specs_from_json(body["events"]);
        std::uint64_t seed = 0;
        if (body.contains("seed")) {
          if (!body["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer", "seed");
          seed = body["seed"].get<std::uint64_t>();
        }
        const std::string id = body["datasetId"].get<std::string>();
        const auto info = store.find_dataset(id);
        if (!info) return send_error(res, 404, "unknown dataset '" + id + "'", "data", "datasetId");
        std::string csv;
        CsvOptions options;
        try {
          const SeriesFrame injected = inject_events(store.dataset_frame(*info, {}), specs, seed);
          csv = emit_csv(injected, true);
          options.operational_columns = info->options.operational_columns;
          options.ignored_columns = info->options.ignored_columns;
        } catch (const Error& e) {
          throw Rejected(e);
        }
        Json out = dataset_to_json(store.put_dataset(csv, options));
        out["sourceDatasetId"] = id;
        send_json(res, 201, out);
      });
    });
  }
};

HttpService::HttpService(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

HttpService::~HttpService() {
  stop();
}

int HttpService::bind() {
  auto& o = impl_->options;
  int port = o.port;
  bool ok = false;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(o.host);
    ok = port > 0;
  } else {
    ok = impl_->server.bind_to_port(o.host, port);
  }
  if (!ok) throw RuntimeFailure("cannot bind " + o.host + ":" + std::to_string(o.port));
  impl_->bound = true;
  return port;
}

void HttpService::listen() {
  if (!impl_->bound) bind();
  impl_->server.listen_after_bind();
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  impl_->jobs.stop();
}

JobService& HttpService::jobs() noexcept { return impl_->jobs; }

}  // namespace eds
