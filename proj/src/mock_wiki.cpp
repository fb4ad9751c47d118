#include "wikitables/mock_wiki.hpp"

#include <algorithm>
#include <charconv>

#include "httplib.h"
#include "json.hpp"

#include "wikitables/error.hpp"
#include "wikitables/source.hpp"

namespace wikitables {

namespace {

std::string param(const std::multimap<std::string, std::string>& params, const std::string& key) {
  const auto it = params.find(key);
  return it == params.end() ? std::string{} : it->second;
}

std::string api_error(const std::string& code, const std::string& info) {
  nlohmann::json doc;
  doc["error"] = {{"code", code}, {"info", info}};
  return doc.dump();
}

}  // namespace

MockWiki::MockWiki(std::vector<MockPage> pages, MockWikiOptions options)
    : options_(options), by_title_(std::move(pages)) {
  std::stable_sort(by_title_.begin(), by_title_.end(),
                   [](const MockPage& a, const MockPage& b) { return a.ref.title < b.ref.title; });
  for (std::size_t i = 0; i < by_title_.size(); ++i) by_id_[by_title_[i].ref.page_id] = i;
}

MockWiki::~MockWiki() { stop(); }

std::vector<MockPage> MockWiki::pages_from_dump(const std::filesystem::path& dump) {
  std::vector<MockPage> pages;
  DumpReader reader(dump);
  while (auto page = reader.next()) pages.push_back(MockPage{page->ref, std::move(page->html)});
  return pages;
}

void MockWiki::start() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  server_->Get("/w/api.php", [this](const httplib::Request& req, httplib::Response& res) {
    std::chrono::milliseconds latency;
    {
      std::lock_guard lock(mutex_);
      latency = options_.latency;
      request_times_.push_back(std::chrono::steady_clock::now());
    }
    if (latency.count() > 0) std::this_thread::sleep_for(latency);
    int status = 200;
    std::string body = handle(req.params, status);
    res.status = status;
    res.set_content(body, "application/json; charset=utf-8");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) {
    server_.reset();
    throw Error("mock wiki could not bind a loopback port");
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockWiki::stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string MockWiki::api_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/w/api.php";
}

void MockWiki::fail_listing_batch(std::size_t index, int times) {
  std::lock_guard lock(mutex_);
  listing_faults_[index] = times;
}

void MockWiki::fail_page(std::int64_t page_id, int times) {
  std::lock_guard lock(mutex_);
  page_faults_[page_id] = times;
}

void MockWiki::delete_page(std::int64_t page_id) {
  std::lock_guard lock(mutex_);
  deleted_[page_id] = true;
}

void MockWiki::set_latency(std::chrono::milliseconds latency) {
  std::lock_guard lock(mutex_);
  options_.latency = latency;
}

std::size_t MockWiki::listing_requests() const {
  std::lock_guard lock(mutex_);
  return listing_requests_;
}

std::size_t MockWiki::parse_requests() const {
  std::lock_guard lock(mutex_);
  return parse_requests_;
}

std::size_t MockWiki::failed_requests() const {
  std::lock_guard lock(mutex_);
  return failed_requests_;
}

std::vector<std::chrono::steady_clock::time_point> MockWiki::request_times() const {
  std::lock_guard lock(mutex_);
  return request_times_;
}

std::string MockWiki::handle(const std::multimap<std::string, std::string>& params,
                             int& status) {
  std::lock_guard lock(mutex_);
  if (param(params, "format") != "json") {
    status = 400;
    return api_error("badformat", "only format=json is served");
  }
  const std::string action = param(params, "action");
  if (action == "query" && param(params, "list") == "allpages")
    return handle_listing(params, status);
  if (action == "parse") return handle_parse(params, status);
  return api_error("badvalue", "unsupported action");
}

std::string MockWiki::handle_listing(const std::multimap<std::string, std::string>& params,
                                     int& status) {
  ++listing_requests_;
  int limit = options_.page_limit;
  if (const std::string raw = param(params, "aplimit"); !raw.empty() && raw != "max") {
    int value = 0;
    std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (value > 0) limit = std::min(limit, value);
  }
  const std::string from = param(params, "apcontinue");
  const bool content_only = param(params, "apnamespace").empty() ||
                            param(params, "apnamespace") == "0";
  const bool skip_redirects = param(params, "apfilterredir") == "nonredirects";

  // Visible listing: live pages in title order.
  std::vector<const MockPage*> visible;
  for (const auto& page : by_title_) {
    if (content_only && page.ref.ns != 0) continue;
    if (skip_redirects && page.redirect) continue;
    if (deleted_.count(page.ref.page_id)) continue;
    visible.push_back(&page);
  }
  const auto start_it = std::lower_bound(
      visible.begin(), visible.end(), from,
      [](const MockPage* p, const std::string& t) { return p->ref.title < t; });
  const auto start = static_cast<std::size_t>(start_it - visible.begin());

  const std::size_t batch = start / static_cast<std::size_t>(limit);
  if (auto it = listing_faults_.find(batch); it != listing_faults_.end() && it->second != 0) {
    if (it->second > 0) --it->second;
    ++failed_requests_;
    status = 503;
    return api_error("unavailable", "injected listing failure");
  }

  nlohmann::json pages = nlohmann::json::array();
  const std::size_t end = std::min(visible.size(), start + static_cast<std::size_t>(limit));
  for (std::size_t i = start; i < end; ++i)
    pages.push_back({{"pageid", visible[i]->ref.page_id},
                     {"ns", visible[i]->ref.ns},
                     {"title", visible[i]->ref.title}});
  nlohmann::json doc;
  doc["batchcomplete"] = true;
  if (end < visible.size()) doc["continue"] = {{"apcontinue", visible[end]->ref.title},
                                               {"continue", "-||"}};
  doc["query"]["allpages"] = std::move(pages);
  return doc.dump();
}

std::string MockWiki::handle_parse(const std::multimap<std::string, std::string>& params,
                                   int& status) {
  ++parse_requests_;
  const std::string raw = param(params, "pageid");
  std::int64_t id = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), id);
  if (raw.empty() || ec != std::errc{} || ptr != raw.data() + raw.size())
    return api_error("nosuchpageid", "There is no page with ID " + raw + ".");

  if (auto it = page_faults_.find(id); it != page_faults_.end() && it->second != 0) {
    if (it->second > 0) --it->second;
    ++failed_requests_;
    status = 503;
    return api_error("unavailable", "injected page failure");
  }
  const auto found = by_id_.find(id);
  if (found == by_id_.end() || deleted_.count(id))
    return api_error("nosuchpageid", "There is no page with ID " + raw + ".");
  const MockPage& page = by_title_[found->second];
  nlohmann::json doc;
  doc["parse"] = {{"title", page.ref.title}, {"pageid", id}, {"text", page.html}};
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace wikitables
