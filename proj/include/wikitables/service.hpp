#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "wikitables/crawl.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace wikitables {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  std::filesystem::path state_dir = "wikitables-state";
  /// Corpus used by /corpus/* requests that name neither a job nor a root.
  std::optional<std::filesystem::path> corpus_root;
  /// Static files served under /ui/.
  std::optional<std::filesystem::path> static_dir;
  std::function<void(const std::string&)> log;
};

/// "host:port" or ":port" or "host" (default port kept).
void apply_bind_address(ServiceOptions& options, const std::string& bind);

/// JSON-over-HTTP front end for jobs and corpus queries.
///
///   POST /jobs                      create and start a job (201, 409, 400)
///   GET  /jobs                      all jobs
///   GET  /jobs/{id}                 one job
///   POST /jobs/{id}/pause|resume
///   GET  /jobs/{id}/progress        job state only
///   GET  /corpus/stats              ?job= | ?corpus_root=
///   GET  /corpus/search             same, plus query fields
///   GET  /corpus/tables/{page}/{offset}[/csv]
///   GET  /health
///
/// Errors answer {"code", "message", "fields"}. Jobs are persisted under
/// state_dir/jobs; after a restart unfinished jobs come back paused.
class ApiServer {
 public:
  explicit ApiServer(ServiceOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Restores persisted jobs, binds, and serves on a background thread.
  /// Throws Error when the state directory is corrupt or the port is taken.
  void start();
  /// Pauses running jobs, saves their state, and stops serving.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  int port() const { return port_; }
  std::string base_url() const;

 private:
  struct JobEntry {
    std::string id;
    JobConfig config;
    std::unique_ptr<CrawlJob> job;
    JobState last_saved;
    bool saved = false;
  };

  void restore();
  void routes();
  void save(JobEntry& entry, const JobState& state);
  void monitor();
  Json resource(const JobEntry& entry, const JobState& state) const;
  JobState state_of(const JobEntry& entry) const;
  JobEntry* find(const std::string& id);
  std::filesystem::path corpus_for(const httplib::Request& req);

  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::thread monitor_;
  int port_ = 0;

  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::map<std::string, std::unique_ptr<JobEntry>> jobs_;
  std::uint64_t next_id_ = 1;
};

}  // namespace wikitables
