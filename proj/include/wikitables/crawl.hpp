#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wikitables/filter.hpp"
#include "wikitables/json_io.hpp"
#include "wikitables/source.hpp"
#include "wikitables/types.hpp"

namespace wikitables {

class CheckpointLog;
class CorpusStore;

struct JobConfig {
  std::string snapshot_date;
  SourceConfig source;
  FilterConfig filters;
  int chunk_count = 1;
  int chunk_index = 0;
  std::filesystem::path corpus_root;
  int worker_count = 2;
  /// fsync every table file and checkpoint record.
  bool durable = true;

  /// Throws ValidationError naming every bad field ("source.max_retries",
  /// "filters.null_threshold", ...).
  void validate() const;
};

Json to_json(const JobConfig& cfg);
/// Fields present in `j` override `base`; unknown fields are rejected.
JobConfig job_config_from_json(const Json& j, JobConfig base = {});

enum class JobPhase { listing, crawling, paused, finished, failed };

std::string_view to_string(JobPhase phase);
std::optional<JobPhase> parse_job_phase(std::string_view text);

struct JobState {
  JobPhase phase = JobPhase::listing;
  /// Pages in this job's chunk; unknown until the listing is done.
  std::optional<std::size_t> pages_total;
  std::size_t pages_done = 0;
  double avg_page_seconds = 0.0;
  /// pages_left * avg_page_seconds; absent without enough data.
  std::optional<double> eta_seconds;
  Clock::time_point started_at{};
  Clock::time_point updated_at{};
  std::size_t tables_written = 0;
  std::size_t pages_missing = 0;
  std::size_t pages_unparsable = 0;
  int peak_in_flight = 0;
  std::string error;

  std::optional<std::size_t> pages_left() const {
    if (!pages_total) return std::nullopt;
    return *pages_total - pages_done;
  }
};

Json to_json(const JobState& state);
JobState job_state_from_json(const Json& j);

/// Chunk `index` of `count` near-equal contiguous parts of n items, as a
/// [begin, end) index range; the first n % count chunks get one extra item.
std::pair<std::size_t, std::size_t> chunk_bounds(std::size_t n, int count, int index);

std::vector<PageRef> plan_chunks(const std::vector<PageRef>& titles, int chunk_count,
                                 int chunk_index);

/// Average seconds per page as an exponential moving average over the
/// intervals between page completions.
class ProgressTracker {
 public:
  using Now = std::function<double()>;

  static constexpr double kAlpha = 0.05;

  explicit ProgressTracker(Now now = {}, double alpha = kAlpha);

  /// Starts a measuring period; the next interval is measured from here.
  void start();
  void page_done();
  bool has_average() const { return samples_ > 0; }
  double average() const { return average_; }
  std::optional<double> eta(std::size_t pages_left) const;

 private:
  Now now_;
  double alpha_;
  double last_ = 0.0;
  double average_ = 0.0;
  std::size_t samples_ = 0;
};

/// Instrumentation hooks, called from worker threads.
struct JobHooks {
  std::function<void(std::int64_t page_id)> page_started;
  std::function<void(std::int64_t page_id)> page_finished;
  std::function<void(const std::string& message)> log;
};

/// One corpus-construction job: lists titles, persists them to titles.tsv,
/// then runs fetch -> extract -> filter -> store -> checkpoint for the pages
/// of its chunk on worker_count threads. Pages already in the checkpoint are
/// skipped, so a job can always be restarted where it stopped.
class CrawlJob {
 public:
  explicit CrawlJob(JobConfig cfg, JobHooks hooks = {});
  ~CrawlJob();
  CrawlJob(const CrawlJob&) = delete;
  CrawlJob& operator=(const CrawlJob&) = delete;

  const JobConfig& config() const { return cfg_; }

  /// Runs on a background thread. With `paused`, the job only becomes
  /// visible as paused and starts working on resume().
  void start(bool paused = false);

  /// Stops handing out pages; in-flight pages finish and reach the
  /// checkpoint, then the phase becomes paused. No-op on finished jobs.
  JobState pause();
  JobState resume();
  JobState progress() const;

  /// Blocks until the job is finished or failed.
  JobState wait();
  /// Blocks until the phase is one of `phases` or the timeout expires.
  bool wait_for(std::initializer_list<JobPhase> phases, std::chrono::milliseconds timeout);

  /// Pauses and joins all threads; the job can be resumed by a new process.
  void shutdown();

 private:
  struct WorkItem {
    PageRef ref;
    std::optional<RawPage> page;
  };

  void run();
  void prepare();
  void produce();
  bool push(WorkItem item);
  void work();
  void process(WorkItem& item);
  void fail(const std::string& message);
  JobState snapshot_locked() const;
  void log(const std::string& message) const;

  JobConfig cfg_;
  JobHooks hooks_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  JobState state_;
  ProgressTracker tracker_;
  bool launched_ = false;
  bool pause_requested_ = false;
  bool stop_requested_ = false;
  bool failed_ = false;
  bool producer_done_ = false;
  std::deque<WorkItem> queue_;
  std::size_t queue_capacity_ = 4;
  int in_flight_ = 0;

  std::unique_ptr<CorpusStore> store_;
  std::unique_ptr<CheckpointLog> log_;
  std::unique_ptr<WikiClient> client_;
  std::int64_t first_id_ = 0;
  std::int64_t last_id_ = -1;
  std::size_t chunk_begin_ = 0;
  std::size_t chunk_end_ = 0;

  std::thread controller_;
  std::vector<std::thread> workers_;
};

/// Runs a job in the calling thread and returns its final state.
JobState run_job(const JobConfig& cfg, JobHooks hooks = {});

struct RefilterResult {
  std::size_t tables_read = 0;
  std::size_t tables_written = 0;
};

/// Applies `filters` to every table of an existing corpus and writes the
/// survivors, with the listing and checkpoint, to a new corpus at `dest`.
RefilterResult refilter_corpus(const std::filesystem::path& source,
                               const std::filesystem::path& dest,
                               const FilterConfig& filters, bool durable = true);

}  // namespace wikitables
