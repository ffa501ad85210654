#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <thread>

#include "httplib.h"

#include "eds/error.hpp"
#include "eds/pipeline.hpp"
#include "eds/report.hpp"
#include "eds/service.hpp"
#include "eds/simulate.hpp"
#include "synthetic.hpp"

using namespace eds;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("eds-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string labelled_csv(std::size_t rows = 600) {
  const auto base = fixtures::ar1_frame(rows, 0.5, 1.0, 5, "A");
  const std::vector<EventSpec> events{fixtures::square_event("A", rows / 2, 40, 10.0)};
  return emit_csv(inject_events(base, events));
}

std::string unlabelled_csv() { return emit_csv(fixtures::ar1_frame(400, 0.5, 1.0, 6, "A")); }

ConfigDocument small_config() {
  ConfigDocument doc;
  doc.detector.window_size = 100;
  return doc;
}

// A server on a free port, stopped on destruction.
struct Server {
  explicit Server(const fs::path& dir) : service(ServerOptions{"127.0.0.1", 0, dir, 2}) {
    port = service.bind();
    thread = std::thread([this] { service.listen(); });
  }
  ~Server() {
    service.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
  HttpService service;
  int port = 0;
  std::thread thread;
};

std::string upload(httplib::Client& c, const std::string& csv) {
  const auto res = c.Post("/api/datasets", csv, "text/csv");
  EXPECT_TRUE(res);
  EXPECT_EQ(res->status, 201) << res->body;
  return Json::parse(res->body).at("datasetId");
}

}  // namespace

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Store, DatasetsAreKeyedByContentAndOptions) {
  Store store(scratch("store"));
  const auto csv = labelled_csv();
  const auto a = store.put_dataset(csv, {});
  const auto b = store.put_dataset(csv, {});
  EXPECT_EQ(a.id, b.id);
  CsvOptions other;
  other.event_column = "";
  const auto c = store.put_dataset(csv, other);
  EXPECT_NE(a.id, c.id);
  EXPECT_TRUE(a.has_labels);
  EXPECT_FALSE(c.has_labels);
  EXPECT_EQ(store.dataset_csv(a.id), csv);
  EXPECT_EQ(store.list_datasets().size(), 2u);
  EXPECT_FALSE(store.find_dataset("nope"));
  EXPECT_THROW(store.put_dataset("a,b\n", {}), DataError);
}

TEST(JobService, RunsJobsAndMatchesDirectDetection) {
  Store store(scratch("jobs"));
  const auto csv = labelled_csv();
  const auto info = store.put_dataset(csv, {});
  JobService jobs(store, 2);
  const auto job = jobs.submit(info.id, small_config());
  const auto done = jobs.wait(job.id, std::chrono::seconds(60));
  ASSERT_TRUE(done);
  ASSERT_EQ(done->status, JobStatus::Done) << done->error;
  EXPECT_TRUE(done->has_metrics);
  const auto direct = detect_events(load_frame(csv, {}, {}), small_config().detector);
  EXPECT_EQ(store.read_job_file(job.id, "results.csv"), results_csv(direct));
  EXPECT_TRUE(store.read_job_file(job.id, "metrics.json"));
}

TEST(JobService, SubmitChecksConfigAndData) {
  Store store(scratch("submit"));
  const auto info = store.put_dataset(unlabelled_csv(), {});
  JobService jobs(store, 1);
  EXPECT_THROW(jobs.submit("missing", small_config()), DataError);
  auto bad = small_config();
  bad.detector.event_threshold = 2.0;
  EXPECT_THROW(jobs.submit(info.id, bad), ConfigError);
  auto too_long = small_config();
  too_long.detector.window_size = 5000;
  EXPECT_THROW(jobs.submit(info.id, too_long), Rejected);
  auto unknown_column = small_config();
  unknown_column.columns = {"Z"};
  try {
    jobs.submit(info.id, unknown_column);
    FAIL() << "expected Rejected";
  } catch (const Rejected& e) {
    EXPECT_EQ(e.field(), "columns");
  }
}

TEST(JobService, RestartFailsRunningJobsAndRequeuesQueuedOnes) {
  const auto dir = scratch("restart");
  Store store(dir);
  const auto info = store.put_dataset(labelled_csv(), {});
  JobRecord running;
  running.id = "job-running";
  running.dataset_id = info.id;
  running.config = small_config();
  running.status = JobStatus::Running;
  running.created_at = "2026-01-01T00:00:00Z";
  JobRecord queued = running;
  queued.id = "job-queued";
  queued.status = JobStatus::Queued;
  store.write_job(running);
  store.write_job(queued);

  JobService jobs(store, 1);
  EXPECT_EQ(jobs.get("job-running")->status, JobStatus::Failed);
  const auto done = jobs.wait("job-queued", std::chrono::seconds(60));
  ASSERT_TRUE(done);
  EXPECT_EQ(done->status, JobStatus::Done);
  EXPECT_EQ(Store(dir).load_jobs().size(), 2u);
}

TEST(JobRecordJson, RoundTrip) {
  JobRecord job;
  job.id = "job-1";
  job.dataset_id = "abc";
  job.config = small_config();
  job.config.columns = {"A"};
  job.status = JobStatus::Done;
  job.created_at = "2026-01-01T00:00:00Z";
  job.warnings = {"w"};
  job.has_metrics = true;
  const auto back = job_from_json(job_to_json(job));
  EXPECT_EQ(back.id, job.id);
  EXPECT_EQ(back.status, job.status);
  EXPECT_EQ(back.config.detector, job.config.detector);
  EXPECT_EQ(back.config.columns, job.config.columns);
  EXPECT_EQ(back.warnings, job.warnings);
  EXPECT_TRUE(back.has_metrics);
}

TEST(HttpService, HappyPathAndDownloads) {
  Server server(scratch("http"));
  auto c = server.client();
  ASSERT_EQ(c.Get("/api/health")->status, 200);
  const auto csv = labelled_csv();
  const auto id = upload(c, csv);
  EXPECT_EQ(upload(c, csv), id);
  EXPECT_EQ(c.Get("/api/datasets/" + id + "/csv")->body, csv);
  const auto preview = Json::parse(c.Get("/api/datasets/" + id + "/preview?rows=3")->body);
  EXPECT_EQ(preview["preview"].size(), 3u);
  EXPECT_EQ(preview["rows"], 600);

  const Json body{{"datasetId", id}, {"config", {{"windowSize", 100}}}};
  const auto submitted = c.Post("/api/jobs", body.dump(), "application/json");
  ASSERT_EQ(submitted->status, 202) << submitted->body;
  const std::string job = Json::parse(submitted->body).at("jobId");
  EXPECT_EQ(submitted->get_header_value("Location"), "/api/jobs/" + job);
  ASSERT_EQ(server.service.jobs().wait(job, std::chrono::seconds(60))->status, JobStatus::Done);

  const auto page = Json::parse(c.Get("/api/jobs/" + job + "/results?offset=10&limit=5")->body);
  EXPECT_EQ(page["total"], 600);
  EXPECT_EQ(page["records"].size(), 5u);
  EXPECT_EQ(page["records"][0]["index"], 10);
  const auto metrics = Json::parse(c.Get("/api/jobs/" + job + "/metrics")->body);
  EXPECT_GT(metrics["confusionMatrix"]["tp"].get<int>(), 0);
  const auto roc = Json::parse(c.Get("/api/jobs/" + job + "/roc")->body);
  EXPECT_FALSE(roc["points"].empty());
  EXPECT_EQ(Json::parse(c.Get("/api/jobs")->body)["jobs"].size(), 1u);

  const Json sim{{"datasetId", id},
                 {"events", {{{"shape", "square"}, {"columns", {"A"}}, {"start", 10}, {"duration", 5}, {"strength", 3}}}}};
  const auto simulated = c.Post("/api/simulate", sim.dump(), "application/json");
  ASSERT_EQ(simulated->status, 201) << simulated->body;
  EXPECT_EQ(Json::parse(simulated->body)["sourceDatasetId"], id);
}

TEST(HttpService, ErrorStatuses) {
  const auto dir = scratch("http-errors");
  {
    // A job left running by a previous process comes back as failed.
    Store store(dir);
    const auto info = store.put_dataset(labelled_csv(), {});
    JobRecord stale;
    stale.id = "job-stale";
    stale.dataset_id = info.id;
    stale.config = small_config();
    stale.status = JobStatus::Running;
    stale.created_at = utc_now();
    store.write_job(stale);
  }
  Server server(dir);
  auto c = server.client();

  auto status_of = [](const httplib::Result& r) { return r ? r->status : -1; };
  EXPECT_EQ(status_of(c.Post("/api/datasets", "just one line", "text/csv")), 400);
  EXPECT_EQ(status_of(c.Get("/api/datasets/unknown/preview")), 404);
  EXPECT_EQ(status_of(c.Get("/api/jobs/unknown")), 404);
  EXPECT_EQ(status_of(c.Get("/api/jobs/job-stale/results.csv")), 409);

  const auto unlabelled = upload(c, unlabelled_csv());
  EXPECT_EQ(status_of(c.Post("/api/jobs", "{not json", "application/json")), 400);
  EXPECT_EQ(status_of(c.Post("/api/jobs", Json{{"datasetId", "missing"}}.dump(), "application/json")), 404);
  const auto bad = c.Post("/api/jobs", Json{{"datasetId", unlabelled}, {"config", {{"eventThreshold", 3}}}}.dump(),
                          "application/json");
  ASSERT_EQ(status_of(bad), 400);
  const auto err = Json::parse(bad->body);
  EXPECT_EQ(err["status"], 400);
  EXPECT_EQ(err["fields"][0]["field"], "eventThreshold");
  EXPECT_EQ(status_of(c.Post("/api/jobs", Json{{"datasetId", unlabelled}, {"config", {{"windowSize", 5000}}}}.dump(),
                             "application/json")),
            422);

  const auto ok = c.Post("/api/jobs", Json{{"datasetId", unlabelled}, {"config", {{"windowSize", 100}}}}.dump(),
                         "application/json");
  ASSERT_EQ(status_of(ok), 202);
  const std::string job = Json::parse(ok->body).at("jobId");
  ASSERT_EQ(server.service.jobs().wait(job, std::chrono::seconds(60))->status, JobStatus::Done);
  EXPECT_EQ(status_of(c.Get("/api/jobs/" + job + "/metrics")), 422);
  EXPECT_EQ(status_of(c.Get("/api/jobs/" + job + "/roc")), 422);
  EXPECT_EQ(status_of(c.Get("/api/jobs/" + job + "/results?limit=0")), 400);
  EXPECT_EQ(status_of(c.Get("/api/jobs/" + job + "/results.csv")), 200);
}
