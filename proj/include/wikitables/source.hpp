#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <string>
#include <vector>

#include "wikitables/types.hpp"

namespace wikitables {

/// Where pages come from: a live MediaWiki Action API, or an HTML dump.
struct SourceConfig {
  std::string api_base_url;
  int max_concurrent_requests = 2;
  std::chrono::milliseconds min_request_interval{100};
  int max_retries = 5;
  std::chrono::milliseconds backoff_base{500};
  std::optional<std::filesystem::path> dump_path;
  std::string user_agent = "wikitables/1.0 (web table corpus builder)";
  /// Prefix of article URLs; derived from api_base_url when empty.
  std::string article_base_url;
  std::chrono::seconds request_timeout{30};
  int list_batch_size = 500;

  bool use_dump() const { return dump_path.has_value(); }
  /// Throws ValidationError listing every bad field; exactly one of
  /// api_base_url and dump_path must be set.
  void validate() const;
  std::string resolved_article_base() const;
};

/// Process-wide politeness gate shared by every fetch of a job: at most
/// `max_concurrent` requests in flight and request starts spaced by at least
/// `min_interval`.
class RateLimiter {
 public:
  RateLimiter(int max_concurrent, std::chrono::milliseconds min_interval);

  class Permit {
   public:
    explicit Permit(RateLimiter* owner) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (owner_ != nullptr) owner_->release();
    }

   private:
    RateLimiter* owner_;
  };

  Permit acquire();
  int peak_in_flight() const;

 private:
  void release();

  const int max_concurrent_;
  const std::chrono::milliseconds min_interval_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
  std::chrono::steady_clock::time_point next_start_{};
};

/// delay(attempt) = base * 2^attempt, scaled by a uniform jitter in [0.8, 1.2].
class Backoff {
 public:
  Backoff(std::chrono::milliseconds base, std::uint64_t seed = std::random_device{}());
  std::chrono::milliseconds delay(int attempt);

 private:
  std::chrono::milliseconds base_;
  std::mutex mutex_;
  std::mt19937_64 rng_;
};

struct TitleBatch {
  std::vector<PageRef> refs;
  /// Token for the next batch; empty when the listing is exhausted.
  std::string next;
};

/// MediaWiki Action API client with retries and rate limiting. Safe to share
/// between worker threads.
class WikiClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit WikiClient(SourceConfig cfg);
  ~WikiClient();
  WikiClient(const WikiClient&) = delete;
  WikiClient& operator=(const WikiClient&) = delete;

  const SourceConfig& config() const { return cfg_; }

  /// One list=allpages request (content namespace, redirects excluded).
  /// Throws SourceUnavailable carrying `continuation` when retries run out
  /// and ApiFormatError for a payload that is not an allpages answer.
  TitleBatch list_batch(const std::string& continuation);

  /// Rendered HTML of the page's current revision; nullopt when the wiki
  /// reports the page missing.
  std::optional<RawPage> fetch_page(const PageRef& ref);

  /// Replaces the sleep used between retries (tests observe delays with it).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  std::size_t requests() const { return requests_.load(); }
  std::size_t backoffs() const { return backoffs_.load(); }
  const RateLimiter& limiter() const { return limiter_; }

 private:
  struct Response {
    int status = 0;
    std::string body;
  };
  class Connections;

  Response get(const std::string& query, const std::string& continuation);

  SourceConfig cfg_;
  std::string host_;
  std::string path_;
  RateLimiter limiter_;
  Backoff backoff_;
  Sleeper sleeper_;
  std::unique_ptr<Connections> connections_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> backoffs_{0};
};

/// Tab-separated "<page_id>\t<title>" form used for the persisted title
/// listing and for sort spill files.
std::string format_title_line(const PageRef& ref);
std::optional<PageRef> parse_title_line(std::string_view line);

/// External sort of PageRefs by page_id with bounded memory: at most
/// `max_buffered` refs are held before a sorted run is spilled to disk.
/// Duplicate page ids are emitted once.
class TitleSorter {
 public:
  TitleSorter(std::filesystem::path spill_dir, std::size_t max_buffered);
  ~TitleSorter();
  TitleSorter(const TitleSorter&) = delete;
  TitleSorter& operator=(const TitleSorter&) = delete;

  void add(PageRef ref);
  std::size_t finish(const std::function<void(const PageRef&)>& sink);

  std::size_t spilled_runs() const { return runs_.size(); }
  std::size_t peak_buffered() const { return peak_; }

 private:
  void spill();

  std::filesystem::path dir_;
  std::size_t max_buffered_;
  std::vector<PageRef> buffer_;
  std::vector<std::filesystem::path> runs_;
  std::size_t peak_ = 0;
};

struct ListOptions {
  std::filesystem::path spill_dir = std::filesystem::temp_directory_path();
  std::size_t max_buffered_refs = 100'000;
  /// Resume a listing from a token carried by SourceUnavailable.
  std::string resume_from;
};

struct ListResult {
  std::size_t total = 0;
  std::size_t requests = 0;
  std::size_t spilled_runs = 0;
  std::size_t peak_buffered = 0;
};

/// Every content page once, ascending by page_id, following continuation
/// tokens until the listing is exhausted.
ListResult list_page_titles(WikiClient& client, const ListOptions& options,
                            const std::function<void(const PageRef&)>& sink);

/// Convenience wrapper around WikiClient::fetch_page.
std::optional<RawPage> fetch_page(const PageRef& ref, WikiClient& client);

/// Streaming reader for HTML dumps.
///
/// A dump is a directory, or an uncompressed tar archive, holding
/// manifest.tsv ("<page_id>\t<title>\t<relative path>\n" per page) and one
/// HTML file per page. In a tar the manifest must be the first member and the
/// page files must follow in manifest order. XML (wikitext) dumps are
/// rejected with UnsupportedDump.
class DumpReader {
 public:
  explicit DumpReader(const std::filesystem::path& path);
  ~DumpReader();
  DumpReader(DumpReader&&) noexcept;
  DumpReader& operator=(DumpReader&&) noexcept;

  /// Next page in file order, nullopt at the end. Throws DumpError with the
  /// byte offset of the problem; `truncated()` is set when the dump simply
  /// stops early, after every complete page has been returned.
  std::optional<RawPage> next();

 private:
  friend std::size_t list_dump_titles(const std::filesystem::path&,
                                      const std::function<void(const PageRef&)>&);
  class Impl;
  std::unique_ptr<Impl> impl_;
};

/// Streams every page of cfg.dump_path to `sink`.
void read_dump(const SourceConfig& cfg, const std::function<void(RawPage&&)>& sink);

/// Manifest entries of a dump (no page bodies), in file order.
std::size_t list_dump_titles(const std::filesystem::path& path,
                             const std::function<void(const PageRef&)>& sink);

}  // namespace wikitables
