#include "wikitables/crawl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_set>

#include "wikitables/checkpoint.hpp"
#include "wikitables/error.hpp"
#include "wikitables/extract.hpp"
#include "wikitables/failpoint.hpp"
#include "wikitables/store.hpp"
#include "wikitables/version.hpp"

namespace fs = std::filesystem;

namespace wikitables {

namespace {

void collect(std::vector<std::string>& fields, const std::string& prefix,
             const std::function<void()>& check) {
  try {
    check();
  } catch (const ValidationError& e) {
    for (const auto& f : e.fields()) fields.push_back(prefix + f);
  }
}

// Reads one optional member of `j`, recording the field on a type error.
template <typename T>
void read_field(const Json& j, const char* key, T& out, const std::string& prefix,
                std::vector<std::string>& bad) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    bad.push_back(prefix + key);
  }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known,
                    const std::string& prefix, std::vector<std::string>& bad) {
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return key == k; });
    if (!ok) bad.push_back(prefix + key);
  }
}

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Calls fn(index, ref) for every line of a titles file.
void for_each_title(const fs::path& path,
                    const std::function<bool(std::size_t, const PageRef&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read title listing " + path.string());
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const auto ref = parse_title_line(line);
    if (!ref)
      throw CorpusError("title listing " + path.string() + " is malformed at line " +
                        std::to_string(index + 1));
    if (!fn(index++, *ref)) return;
  }
}

}  // namespace

void JobConfig::validate() const {
  std::vector<std::string> bad;
  if (!valid_date(snapshot_date)) bad.emplace_back("snapshot_date");
  if (chunk_count < 1) bad.emplace_back("chunk_count");
  if (chunk_index < 0 || chunk_index >= std::max(chunk_count, 1)) bad.emplace_back("chunk_index");
  if (corpus_root.empty()) bad.emplace_back("corpus_root");
  if (worker_count < 1 || worker_count > 64) bad.emplace_back("worker_count");
  collect(bad, "source.", [&] { source.validate(); });
  collect(bad, "filters.", [&] { filters.validate(); });
  if (!bad.empty()) {
    std::string what = "invalid job config:";
    for (const auto& f : bad) what += " " + f;
    throw ValidationError(what, bad);
  }
}

Json to_json(const JobConfig& cfg) {
  Json source;
  source["api_base_url"] = cfg.source.api_base_url;
  source["dump_path"] = cfg.source.dump_path ? Json(cfg.source.dump_path->string()) : Json();
  source["max_concurrent_requests"] = cfg.source.max_concurrent_requests;
  source["min_request_interval_ms"] = cfg.source.min_request_interval.count();
  source["max_retries"] = cfg.source.max_retries;
  source["backoff_base_ms"] = cfg.source.backoff_base.count();
  source["user_agent"] = cfg.source.user_agent;
  source["article_base_url"] = cfg.source.article_base_url;
  source["request_timeout_s"] = cfg.source.request_timeout.count();
  source["list_batch_size"] = cfg.source.list_batch_size;

  Json j;
  j["snapshot_date"] = cfg.snapshot_date;
  j["source"] = std::move(source);
  j["filters"] = to_json(cfg.filters);
  j["chunk_count"] = cfg.chunk_count;
  j["chunk_index"] = cfg.chunk_index;
  j["corpus_root"] = cfg.corpus_root.string();
  j["worker_count"] = cfg.worker_count;
  j["durable"] = cfg.durable;
  return j;
}

JobConfig job_config_from_json(const Json& j, JobConfig base) {
  if (!j.is_object()) throw ValidationError("job config must be a JSON object", {"config"});
  std::vector<std::string> bad;
  reject_unknown(j,
                 {"snapshot_date", "source", "filters", "chunk_count", "chunk_index",
                  "corpus_root", "worker_count", "durable"},
                 "", bad);
  read_field(j, "snapshot_date", base.snapshot_date, "", bad);
  read_field(j, "chunk_count", base.chunk_count, "", bad);
  read_field(j, "chunk_index", base.chunk_index, "", bad);
  read_field(j, "worker_count", base.worker_count, "", bad);
  read_field(j, "durable", base.durable, "", bad);
  std::string root = base.corpus_root.string();
  read_field(j, "corpus_root", root, "", bad);
  base.corpus_root = root;

  if (const auto it = j.find("source"); it != j.end()) {
    if (!it->is_object()) {
      bad.emplace_back("source");
    } else {
      const Json& s = *it;
      SourceConfig& src = base.source;
      reject_unknown(s,
                     {"api_base_url", "dump_path", "max_concurrent_requests",
                      "min_request_interval_ms", "max_retries", "backoff_base_ms",
                      "user_agent", "article_base_url", "request_timeout_s",
                      "list_batch_size"},
                     "source.", bad);
      read_field(s, "api_base_url", src.api_base_url, "source.", bad);
      if (const auto dump = s.find("dump_path"); dump != s.end()) {
        if (dump->is_null()) {
          src.dump_path.reset();
        } else if (dump->is_string()) {
          src.dump_path = dump->get<std::string>();
        } else {
          bad.emplace_back("source.dump_path");
        }
      }
      read_field(s, "max_concurrent_requests", src.max_concurrent_requests, "source.", bad);
      read_field(s, "max_retries", src.max_retries, "source.", bad);
      read_field(s, "user_agent", src.user_agent, "source.", bad);
      read_field(s, "article_base_url", src.article_base_url, "source.", bad);
      read_field(s, "list_batch_size", src.list_batch_size, "source.", bad);
      std::int64_t ms = src.min_request_interval.count();
      read_field(s, "min_request_interval_ms", ms, "source.", bad);
      src.min_request_interval = std::chrono::milliseconds(ms);
      ms = src.backoff_base.count();
      read_field(s, "backoff_base_ms", ms, "source.", bad);
      src.backoff_base = std::chrono::milliseconds(ms);
      std::int64_t secs = src.request_timeout.count();
      read_field(s, "request_timeout_s", secs, "source.", bad);
      src.request_timeout = std::chrono::seconds(secs);
    }
  }
  if (const auto it = j.find("filters"); it != j.end()) {
    try {
      // Merge over the base filters, then validate as a whole.
      Json merged = to_json(base.filters);
      if (!it->is_object()) throw ValidationError("filters must be an object", {""});
      for (const auto& [key, value] : it->items()) merged[key] = value;
      base.filters = filter_config_from_json(merged);
    } catch (const ValidationError& e) {
      for (const auto& f : e.fields()) bad.push_back(f.empty() ? "filters" : "filters." + f);
    }
  }
  if (!bad.empty()) {
    std::string what = "invalid job config:";
    for (const auto& f : bad) what += " " + f;
    throw ValidationError(what, bad);
  }
  return base;
}

std::string_view to_string(JobPhase phase) {
  switch (phase) {
    case JobPhase::listing: return "listing";
    case JobPhase::crawling: return "crawling";
    case JobPhase::paused: return "paused";
    case JobPhase::finished: return "finished";
    case JobPhase::failed: return "failed";
  }
  return "failed";
}

std::optional<JobPhase> parse_job_phase(std::string_view text) {
  for (const auto phase : {JobPhase::listing, JobPhase::crawling, JobPhase::paused,
                           JobPhase::finished, JobPhase::failed})
    if (to_string(phase) == text) return phase;
  return std::nullopt;
}

Json to_json(const JobState& state) {
  Json j;
  j["phase"] = std::string(to_string(state.phase));
  j["pages_total"] = state.pages_total ? Json(*state.pages_total) : Json();
  j["pages_done"] = state.pages_done;
  j["pages_left"] = state.pages_left() ? Json(*state.pages_left()) : Json();
  j["avg_page_seconds"] = state.avg_page_seconds;
  j["eta_seconds"] = state.eta_seconds ? Json(*state.eta_seconds) : Json();
  j["started_at"] = format_timestamp(state.started_at);
  j["updated_at"] = format_timestamp(state.updated_at);
  j["tables_written"] = state.tables_written;
  j["pages_missing"] = state.pages_missing;
  j["pages_unparsable"] = state.pages_unparsable;
  j["peak_in_flight"] = state.peak_in_flight;
  j["error"] = state.error.empty() ? Json() : Json(state.error);
  return j;
}

JobState job_state_from_json(const Json& j) {
  JobState s;
  const auto phase = parse_job_phase(j.at("phase").get<std::string>());
  if (!phase) throw Error("unknown job phase " + j.at("phase").dump());
  s.phase = *phase;
  if (!j.at("pages_total").is_null()) s.pages_total = j.at("pages_total").get<std::size_t>();
  s.pages_done = j.at("pages_done").get<std::size_t>();
  s.avg_page_seconds = j.value("avg_page_seconds", 0.0);
  if (const auto it = j.find("eta_seconds"); it != j.end() && !it->is_null())
    s.eta_seconds = it->get<double>();
  s.started_at = parse_timestamp(j.at("started_at").get<std::string>());
  s.updated_at = parse_timestamp(j.at("updated_at").get<std::string>());
  s.tables_written = j.value("tables_written", std::size_t{0});
  s.pages_missing = j.value("pages_missing", std::size_t{0});
  s.pages_unparsable = j.value("pages_unparsable", std::size_t{0});
  s.peak_in_flight = j.value("peak_in_flight", 0);
  if (const auto it = j.find("error"); it != j.end() && it->is_string())
    s.error = it->get<std::string>();
  return s;
}

std::pair<std::size_t, std::size_t> chunk_bounds(std::size_t n, int count, int index) {
  if (count < 1 || index < 0 || index >= count)
    throw ConfigError("chunk index " + std::to_string(index) + " is outside [0, " +
                      std::to_string(count) + ")");
  const auto k = static_cast<std::size_t>(count);
  const auto i = static_cast<std::size_t>(index);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  const std::size_t begin = i * base + std::min(i, extra);
  return {begin, begin + base + (i < extra ? 1 : 0)};
}

std::vector<PageRef> plan_chunks(const std::vector<PageRef>& titles, int chunk_count,
                                 int chunk_index) {
  const auto [begin, end] = chunk_bounds(titles.size(), chunk_count, chunk_index);
  return {titles.begin() + static_cast<std::ptrdiff_t>(begin),
          titles.begin() + static_cast<std::ptrdiff_t>(end)};
}

ProgressTracker::ProgressTracker(Now now, double alpha)
    : now_(now ? std::move(now) : Now(steady_seconds)), alpha_(alpha) {
  last_ = now_();
}

void ProgressTracker::start() { last_ = now_(); }

void ProgressTracker::page_done() {
  const double t = now_();
  const double sample = std::max(0.0, t - last_);
  last_ = t;
  average_ = samples_ == 0 ? sample : alpha_ * sample + (1.0 - alpha_) * average_;
  ++samples_;
}

std::optional<double> ProgressTracker::eta(std::size_t pages_left) const {
  if (pages_left == 0) return 0.0;
  if (!has_average()) return std::nullopt;
  return static_cast<double>(pages_left) * average_;
}

CrawlJob::CrawlJob(JobConfig cfg, JobHooks hooks)
    : cfg_(std::move(cfg)), hooks_(std::move(hooks)) {
  queue_capacity_ = static_cast<std::size_t>(std::max(cfg_.worker_count, 1)) * 2;
}

CrawlJob::~CrawlJob() { shutdown(); }

void CrawlJob::log(const std::string& message) const {
  if (hooks_.log) hooks_.log(message);
}

void CrawlJob::start(bool paused) {
  std::unique_lock lock(mutex_);
  if (launched_ || controller_.joinable()) return;
  state_.started_at = state_.updated_at = Clock::now();
  if (paused) {
    state_.phase = JobPhase::paused;
    pause_requested_ = true;
    // Show what a previous run left behind, if anything.
    try {
      CorpusStore store(cfg_.corpus_root, false);
      if (fs::exists(store.titles_path())) {
        std::size_t n = 0;
        for_each_title(store.titles_path(), [&](std::size_t, const PageRef&) {
          ++n;
          return true;
        });
        const auto [begin, end] = chunk_bounds(n, cfg_.chunk_count, cfg_.chunk_index);
        std::int64_t lo = 0, hi = -1;
        for_each_title(store.titles_path(), [&](std::size_t i, const PageRef& ref) {
          if (i == begin) lo = ref.page_id;
          if (i + 1 == end) hi = ref.page_id;
          return i + 1 < end;
        });
        state_.pages_total = end - begin;
        for (const auto& r : read_checkpoint(store.checkpoint_path(), std::nullopt).records)
          if (r.page_id >= lo && r.page_id <= hi) ++state_.pages_done;
      }
    } catch (const std::exception&) {
    }
    return;
  }
  launched_ = true;
  state_.phase = JobPhase::listing;
  controller_ = std::thread([this] { run(); });
}

JobState CrawlJob::pause() {
  std::lock_guard lock(mutex_);
  if (state_.phase == JobPhase::finished || state_.phase == JobPhase::failed)
    return snapshot_locked();
  pause_requested_ = true;
  if (state_.phase == JobPhase::crawling && in_flight_ == 0) {
    state_.phase = JobPhase::paused;
    state_.updated_at = Clock::now();
  }
  cv_.notify_all();
  return snapshot_locked();
}

JobState CrawlJob::resume() {
  std::unique_lock lock(mutex_);
  if (state_.phase == JobPhase::finished || state_.phase == JobPhase::failed)
    return snapshot_locked();
  pause_requested_ = false;
  if (!launched_) {
    if (controller_.joinable()) {
      lock.unlock();
      controller_.join();
      lock.lock();
    }
    launched_ = true;
    stop_requested_ = false;
    state_.phase = JobPhase::listing;
    controller_ = std::thread([this] { run(); });
  } else if (state_.phase == JobPhase::paused) {
    state_.phase = JobPhase::crawling;
    tracker_.start();
  }
  state_.updated_at = Clock::now();
  cv_.notify_all();
  return snapshot_locked();
}

JobState CrawlJob::progress() const {
  std::lock_guard lock(mutex_);
  return snapshot_locked();
}

JobState CrawlJob::snapshot_locked() const {
  JobState s = state_;
  s.avg_page_seconds = tracker_.average();
  if (s.pages_total) s.eta_seconds = tracker_.eta(*s.pages_left());
  if (s.phase == JobPhase::finished) s.eta_seconds = 0.0;
  return s;
}

JobState CrawlJob::wait() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] {
    return state_.phase == JobPhase::finished || state_.phase == JobPhase::failed;
  });
  return snapshot_locked();
}

bool CrawlJob::wait_for(std::initializer_list<JobPhase> phases,
                        std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] {
    return std::find(phases.begin(), phases.end(), state_.phase) != phases.end();
  });
}

void CrawlJob::shutdown() {
  {
    std::lock_guard lock(mutex_);
    stop_requested_ = true;
    pause_requested_ = true;
    cv_.notify_all();
  }
  if (controller_.joinable()) controller_.join();
  std::lock_guard lock(mutex_);
  launched_ = false;
}

void CrawlJob::fail(const std::string& message) {
  std::lock_guard lock(mutex_);
  if (!failed_) {
    failed_ = true;
    state_.error = message;
  }
  cv_.notify_all();
}

void CrawlJob::prepare() {
  cfg_.validate();
  store_ = std::make_unique<CorpusStore>(cfg_.corpus_root, cfg_.durable);
  const CheckpointHeader header{cfg_.snapshot_date, cfg_.chunk_count};

  // Refuse a mismatching corpus before anything is written.
  const CheckpointContents previous = read_checkpoint(store_->checkpoint_path(), header);
  CorpusManifest manifest;
  manifest.format_version = kCorpusFormatVersion;
  manifest.toolkit_version = kToolkitVersion;
  manifest.snapshot_date = cfg_.snapshot_date;
  manifest.filters = cfg_.filters;
  manifest.created_at = Clock::now();
  store_->ensure_manifest(manifest);
  if (const auto removed = store_->recover(); removed > 0)
    log("removed " + std::to_string(removed) + " partial table files");

  if (!cfg_.source.use_dump()) client_ = std::make_unique<WikiClient>(cfg_.source);

  const fs::path titles = store_->titles_path();
  if (!fs::exists(titles)) {
    const fs::path tmp = cfg_.corpus_root / ".titles.tsv.tmp";
    const fs::path spill = cfg_.corpus_root / ".spill";
    fs::create_directories(spill);
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      const auto sink = [&](const PageRef& ref) { out << format_title_line(ref) << '\n'; };
      if (cfg_.source.use_dump()) {
        TitleSorter sorter(spill, 100'000);
        list_dump_titles(*cfg_.source.dump_path, [&](const PageRef& ref) { sorter.add(ref); });
        sorter.finish(sink);
      } else {
        ListOptions options;
        options.spill_dir = spill;
        const ListResult listed = list_page_titles(*client_, options, sink);
        log("listed " + std::to_string(listed.total) + " titles in " +
            std::to_string(listed.requests) + " requests");
      }
      out.flush();
      if (!out) throw StoreError("cannot write " + tmp.string());
    }
    failpoint::hit("crawl.before_titles_rename");
    fs::rename(tmp, titles);
    fs::remove_all(spill);
  }

  std::size_t n = 0;
  for_each_title(titles, [&](std::size_t, const PageRef&) {
    ++n;
    return true;
  });
  const auto [begin, end] = chunk_bounds(n, cfg_.chunk_count, cfg_.chunk_index);
  chunk_begin_ = begin;
  chunk_end_ = end;
  for_each_title(titles, [&](std::size_t i, const PageRef& ref) {
    if (i == begin) first_id_ = ref.page_id;
    if (i + 1 == end) last_id_ = ref.page_id;
    return i + 1 < end;
  });

  log_ = std::make_unique<CheckpointLog>(store_->checkpoint_path(), header, cfg_.durable);

  // Tables of chunk pages without a checkpoint record come from an
  // interrupted run; the page will be processed again from scratch.
  const auto completed = log_->completed();
  std::unordered_set<std::int64_t> stale;
  for (const auto& id : store_->list_tables())
    if (id.page_id >= first_id_ && id.page_id <= last_id_ && !completed.contains(id.page_id))
      stale.insert(id.page_id);
  for (const auto page_id : stale) store_->clear_page(page_id);

  std::lock_guard lock(mutex_);
  state_.pages_total = end - begin;
  for (const auto& r : previous.records) {
    if (r.page_id < first_id_ || r.page_id > last_id_) continue;
    ++state_.pages_done;
    state_.tables_written += static_cast<std::size_t>(r.table_count);
    if (r.status == PageStatus::missing) ++state_.pages_missing;
    if (r.status == PageStatus::parse_error) ++state_.pages_unparsable;
  }
  state_.updated_at = Clock::now();
}

bool CrawlJob::push(WorkItem item) {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] {
    return stop_requested_ || failed_ || queue_.size() < queue_capacity_;
  });
  if (stop_requested_ || failed_) return false;
  queue_.push_back(std::move(item));
  cv_.notify_all();
  return true;
}

void CrawlJob::produce() {
  if (chunk_end_ == chunk_begin_) return;
  if (!cfg_.source.use_dump()) {
    bool open = true;
    for_each_title(store_->titles_path(), [&](std::size_t i, const PageRef& ref) {
      if (i < chunk_begin_) return true;
      if (i >= chunk_end_) return false;
      if (!log_->contains(ref.page_id)) open = push(WorkItem{ref, std::nullopt});
      return open;
    });
    return;
  }
  DumpReader reader(*cfg_.source.dump_path);
  std::unordered_set<std::int64_t> queued;
  while (auto page = reader.next()) {
    const std::int64_t id = page->ref.page_id;
    if (id < first_id_ || id > last_id_ || log_->contains(id)) continue;
    if (!queued.insert(id).second) continue;
    PageRef ref = page->ref;
    if (!push(WorkItem{std::move(ref), std::move(page)})) return;
  }
}

void CrawlJob::work() {
  while (true) {
    WorkItem item;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] {
        return stop_requested_ || failed_ || (!pause_requested_ && !queue_.empty()) ||
               (producer_done_ && queue_.empty());
      });
      if (stop_requested_ || failed_ || queue_.empty()) return;
      item = std::move(queue_.front());
      queue_.pop_front();
      ++in_flight_;
      state_.peak_in_flight = std::max(state_.peak_in_flight, in_flight_);
      cv_.notify_all();
    }
    if (hooks_.page_started) hooks_.page_started(item.ref.page_id);
    bool ok = true;
    try {
      process(item);
    } catch (const std::exception& e) {
      ok = false;
      fail("page " + std::to_string(item.ref.page_id) + ": " + e.what());
    }
    if (hooks_.page_finished) hooks_.page_finished(item.ref.page_id);
    std::lock_guard lock(mutex_);
    --in_flight_;
    if (ok) {
      ++state_.pages_done;
      tracker_.page_done();
    }
    state_.updated_at = Clock::now();
    if (pause_requested_ && in_flight_ == 0 && state_.phase == JobPhase::crawling)
      state_.phase = JobPhase::paused;
    cv_.notify_all();
  }
}

void CrawlJob::process(WorkItem& item) {
  const std::int64_t page_id = item.ref.page_id;
  CheckpointRecord record{page_id, 0, PageStatus::done};
  std::optional<RawPage> page = std::move(item.page);
  if (!page) {
    try {
      page = client_->fetch_page(item.ref);
      if (!page) record.status = PageStatus::missing;
    } catch (const ApiFormatError& e) {
      log("page " + std::to_string(page_id) + ": " + e.what());
      record.status = PageStatus::parse_error;
    }
  }
  failpoint::hit("crawl.after_fetch");

  std::size_t written = 0;
  if (page) {
    ExtractOptions options;
    options.article_base_url = cfg_.source.resolved_article_base();
    std::optional<ExtractResult> result;
    try {
      result = extract_tables(*page, options);
    } catch (const HtmlError& e) {
      log("page " + std::to_string(page_id) + ": " + e.what());
      record.status = PageStatus::parse_error;
    }
    if (result) {
      for (const auto& w : result->warnings)
        log("page " + std::to_string(page_id) + " table " + std::to_string(w.offset) + ": " +
            w.message);
      const auto now = Clock::now();
      for (const auto& table : result->tables) {
        const auto kept = apply_filters(table, cfg_.filters);
        if (!kept) continue;
        store_->write_table(*kept, make_metadata(*kept, now, cfg_.snapshot_date));
        ++written;
        failpoint::hit("crawl.after_table_write");
      }
    }
  }
  record.table_count = static_cast<int>(written);
  failpoint::hit("crawl.before_checkpoint");
  log_->append(record);
  failpoint::hit("crawl.after_checkpoint");

  std::lock_guard lock(mutex_);
  state_.tables_written += written;
  if (record.status == PageStatus::missing) ++state_.pages_missing;
  if (record.status == PageStatus::parse_error) ++state_.pages_unparsable;
}

void CrawlJob::run() {
  try {
    prepare();
  } catch (const std::exception& e) {
    fail(e.what());
    std::lock_guard lock(mutex_);
    state_.phase = JobPhase::failed;
    state_.updated_at = Clock::now();
    cv_.notify_all();
    return;
  }
  {
    std::lock_guard lock(mutex_);
    producer_done_ = false;
    state_.phase = pause_requested_ ? JobPhase::paused : JobPhase::crawling;
    tracker_.start();
    cv_.notify_all();
  }
  for (int i = 0; i < cfg_.worker_count; ++i) workers_.emplace_back([this] { work(); });

  std::string producer_error;
  try {
    produce();
  } catch (const std::exception& e) {
    producer_error = e.what();
  }
  {
    std::lock_guard lock(mutex_);
    producer_done_ = true;
    cv_.notify_all();
  }
  for (auto& w : workers_) w.join();
  workers_.clear();

  std::lock_guard lock(mutex_);
  if (!failed_ && !producer_error.empty()) {
    failed_ = true;
    state_.error = producer_error;
  }
  if (failed_) {
    state_.phase = JobPhase::failed;
  } else if (state_.pages_total && state_.pages_done >= *state_.pages_total) {
    state_.phase = JobPhase::finished;
  } else {
    state_.phase = JobPhase::paused;
  }
  queue_.clear();
  state_.updated_at = Clock::now();
  cv_.notify_all();
}

JobState run_job(const JobConfig& cfg, JobHooks hooks) {
  CrawlJob job(cfg, std::move(hooks));
  job.start();
  return job.wait();
}

RefilterResult refilter_corpus(const fs::path& source, const fs::path& dest,
                               const FilterConfig& filters, bool durable) {
  filters.validate();
  const CorpusStore from(source, false);
  CorpusManifest manifest = from.read_manifest();
  const CorpusStore to(dest, durable);
  if (to.has_manifest() || fs::exists(to.tables_dir()))
    throw CorpusError("refilter destination " + dest.string() + " already holds a corpus");
  const CheckpointContents checkpoint = read_checkpoint(from.checkpoint_path(), std::nullopt);

  manifest.filters = filters;
  manifest.created_at = Clock::now();
  to.ensure_manifest(manifest);
  if (fs::exists(from.titles_path())) fs::copy_file(from.titles_path(), to.titles_path());

  RefilterResult result;
  std::map<std::int64_t, int> kept_per_page;
  for (const auto& id : from.list_tables()) {
    const TableMetadata meta = from.read_metadata(id);
    const ExtractedTable table = load_table(from, id);
    ++result.tables_read;
    const auto kept = apply_filters(table, filters);
    if (!kept) continue;
    to.write_table(*kept, make_metadata(*kept, meta.extracted_at, meta.snapshot_date));
    ++kept_per_page[id.page_id];
    ++result.tables_written;
  }

  const CheckpointHeader header =
      checkpoint.header.value_or(CheckpointHeader{manifest.snapshot_date, 1});
  CheckpointLog log(to.checkpoint_path(), header, durable);
  for (CheckpointRecord record : checkpoint.records) {
    const auto it = kept_per_page.find(record.page_id);
    record.table_count = it == kept_per_page.end() ? 0 : it->second;
    log.append(record);
  }
  return result;
}

}  // namespace wikitables
