#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "eds/config.hpp"
#include "eds/error.hpp"
#include "eds/detector.hpp"
#include "eds/series.hpp"

namespace eds {

std::string sha256_hex(std::string_view data);
// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now();

struct DatasetInfo {
  std::string id;
  CsvOptions options;
  std::size_t rows = 0;
  std::vector<std::string> column_names;
  std::vector<std::string> column_roles;
  std::vector<std::size_t> missing;
  bool has_labels = false;
  std::string created_at;
};
Json dataset_to_json(const DatasetInfo& info);

enum class JobStatus { Queued, Running, Done, Failed };
const char* to_string(JobStatus status) noexcept;
JobStatus parse_job_status(std::string_view name);

struct JobRecord {
  std::string id;
  std::string dataset_id;
  ConfigDocument config;
  JobStatus status = JobStatus::Queued;
  std::string created_at;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> diagnostics;
  std::vector<std::string> warnings;
  std::string error;
  bool has_metrics = false;
};
Json job_to_json(const JobRecord& job);
JobRecord job_from_json(const Json& object);

// Files under a root directory:
//   datasets/<id>.csv, datasets/<id>.json        (id = content hash)
//   jobs/<jobId>/job.json, results.csv, result.json, metrics.json, roc.json
// Writes go through a temporary file and a rename.
class Store {
public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  // Parses (DataError on invalid CSV) and stores; re-uploading identical
  // content with identical options returns the existing dataset.
  DatasetInfo put_dataset(const std::string& csv, const CsvOptions& options);
  std::optional<DatasetInfo> find_dataset(const std::string& id) const;
  std::string dataset_csv(const std::string& id) const;
  SeriesFrame dataset_frame(const DatasetInfo& info, const std::vector<std::string>& columns) const;
  std::vector<DatasetInfo> list_datasets() const;

  void write_job(const JobRecord& job) const;
  std::vector<JobRecord> load_jobs() const;
  void write_job_file(const std::string& job_id, const std::string& name, const std::string& content) const;
  std::optional<std::string> read_job_file(const std::string& job_id, const std::string& name) const;

private:
  std::filesystem::path root_;
};

// Runs detect jobs on a bounded pool of workers. All job records live here
// behind one mutex; a job's detection runs without holding it.
class JobService {
public:
  JobService(Store& store, std::size_t workers);
  ~JobService();
  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  // Checks the job against its dataset first: ConfigError for an invalid
  // configuration, DataError/ConfigError wrapped as `Rejected` for semantic
  // violations against the data.
  JobRecord submit(const std::string& dataset_id, const ConfigDocument& config);
  std::optional<JobRecord> get(const std::string& id) const;
  std::vector<JobRecord> list() const;
  // Blocks until the job leaves queued/running or the timeout passes.
  std::optional<JobRecord> wait(const std::string& id, std::chrono::milliseconds timeout) const;
  void stop();

  Store& store() noexcept { return store_; }

private:
  void work();
  void run(JobRecord job);
  void update(const JobRecord& job);

  Store& store_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::condition_variable queued_;
  std::map<std::string, JobRecord> jobs_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

// A semantic violation of a request against stored data (HTTP 422).
class Rejected : public Error {
public:
  explicit Rejected(const Error& cause) : Error(cause.kind(), cause.what(), cause.field()) {}
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir;
  std::size_t workers = 0;  // 0 = available parallelism
};

// HTTP front end. All bodies are JSON except the CSV download endpoints.
class HttpService {
public:
  explicit HttpService(ServerOptions options);
  ~HttpService();

  // Binds; returns the bound port. Throws RuntimeFailure when binding fails.
  int bind();
  // Serves until stop(); call after bind().
  void listen();
  void stop();
  JobService& jobs() noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eds
