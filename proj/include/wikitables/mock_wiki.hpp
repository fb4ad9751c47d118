#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "wikitables/types.hpp"

namespace httplib {
class Server;
}

namespace wikitables {

struct MockPage {
  PageRef ref;
  std::string html;
  bool redirect = false;
};

struct MockWikiOptions {
  /// Largest aplimit honoured, like the real API's 500 for anonymous users.
  int page_limit = 500;
  /// Artificial delay added to every response.
  std::chrono::milliseconds latency{0};
};

/// In-process stand-in for the MediaWiki Action API, serving list=allpages
/// and action=parse on 127.0.0.1. Supports fault injection for tests and
/// offline demos.
class MockWiki {
 public:
  explicit MockWiki(std::vector<MockPage> pages, MockWikiOptions options = {});
  ~MockWiki();
  MockWiki(const MockWiki&) = delete;
  MockWiki& operator=(const MockWiki&) = delete;

  /// Pages of an HTML dump directory or tar.
  static std::vector<MockPage> pages_from_dump(const std::filesystem::path& dump);

  /// Binds an ephemeral loopback port and serves on a background thread.
  void start();
  void stop();

  int port() const { return port_; }
  std::string api_url() const;

  /// The `index`-th (0-based) listing batch answers 503 `times` times.
  void fail_listing_batch(std::size_t index, int times);
  /// Parse requests for the page answer 503 `times` times; -1 means always.
  void fail_page(std::int64_t page_id, int times);
  /// The page disappears from the wiki: parse reports it missing.
  void delete_page(std::int64_t page_id);
  void set_latency(std::chrono::milliseconds latency);

  std::size_t listing_requests() const;
  std::size_t parse_requests() const;
  std::size_t failed_requests() const;
  std::vector<std::chrono::steady_clock::time_point> request_times() const;

 private:
  std::string handle(const std::multimap<std::string, std::string>& params, int& status);
  std::string handle_listing(const std::multimap<std::string, std::string>& params,
                             int& status);
  std::string handle_parse(const std::multimap<std::string, std::string>& params,
                           int& status);

  MockWikiOptions options_;
  std::vector<MockPage> by_title_;
  std::map<std::int64_t, std::size_t> by_id_;
  std::map<std::size_t, int> listing_faults_;
  std::map<std::int64_t, int> page_faults_;
  std::map<std::int64_t, bool> deleted_;
  std::size_t listing_requests_ = 0;
  std::size_t parse_requests_ = 0;
  std::size_t failed_requests_ = 0;
  std::vector<std::chrono::steady_clock::time_point> request_times_;
  mutable std::mutex mutex_;

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace wikitables
