#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "wikitables/error.hpp"
#include "wikitables/source.hpp"

namespace wikitables {

namespace {

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (const char raw : s) {
    const auto c = static_cast<unsigned char>(raw);
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
        c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

struct SplitUrl {
  std::string host;  // scheme://host[:port]
  std::string path;
};

std::optional<SplitUrl> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.host = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.host.size() <= scheme_end + 3) return std::nullopt;
  return out;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retriable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void SourceConfig::validate() const {
  std::vector<std::string> bad;
  const bool has_api = !api_base_url.empty();
  if (has_api == use_dump()) {
    bad.emplace_back(has_api ? "dump_path" : "api_base_url");
  } else if (has_api && !split_url(api_base_url)) {
    bad.emplace_back("api_base_url");
  }
  if (max_concurrent_requests < 1) bad.emplace_back("max_concurrent_requests");
  if (min_request_interval.count() < 0) bad.emplace_back("min_request_interval");
  if (max_retries < 0) bad.emplace_back("max_retries");
  if (backoff_base.count() < 0) bad.emplace_back("backoff_base");
  if (list_batch_size < 1 || list_batch_size > 5000) bad.emplace_back("list_batch_size");
  if (!bad.empty()) {
    std::string what = "invalid source config:";
    for (const auto& f : bad) what += " " + f;
    if (has_api == use_dump())
      what += " (set exactly one of api_base_url and dump_path)";
    throw ValidationError(what, bad);
  }
}

std::string SourceConfig::resolved_article_base() const {
  if (!article_base_url.empty()) return article_base_url;
  if (const auto url = split_url(api_base_url)) return url->host + "/wiki/";
  return "https://ru.wikipedia.org/wiki/";
}

// Pool of keep-alive connections; one client is used by one thread at a time.
class WikiClient::Connections {
 public:
  Connections(std::string host, const SourceConfig& cfg) : host_(std::move(host)), cfg_(cfg) {}

  std::unique_ptr<httplib::Client> take() {
    {
      std::lock_guard lock(mutex_);
      if (!idle_.empty()) {
        auto c = std::move(idle_.back());
        idle_.pop_back();
        return c;
      }
    }
    auto client = std::make_unique<httplib::Client>(host_);
    client->set_connection_timeout(cfg_.request_timeout);
    client->set_read_timeout(cfg_.request_timeout);
    client->set_keep_alive(true);
    client->set_follow_location(true);
    client->set_default_headers({{"User-Agent", cfg_.user_agent}});
    return client;
  }

  void give_back(std::unique_ptr<httplib::Client> client) {
    std::lock_guard lock(mutex_);
    idle_.push_back(std::move(client));
  }

 private:
  std::string host_;
  const SourceConfig& cfg_;
  std::mutex mutex_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

WikiClient::WikiClient(SourceConfig cfg)
    : cfg_(std::move(cfg)),
      limiter_(cfg_.max_concurrent_requests, cfg_.min_request_interval),
      backoff_(cfg_.backoff_base),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  const auto url = split_url(cfg_.api_base_url);
  if (!url) throw ConfigError("api_base_url is not an http(s) URL: " + cfg_.api_base_url);
  host_ = url->host;
  path_ = url->path;
  connections_ = std::make_unique<Connections>(host_, cfg_);
}

WikiClient::~WikiClient() = default;

WikiClient::Response WikiClient::get(const std::string& query,
                                     const std::string& continuation) {
  const std::string target = path_ + "?" + query;
  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    {
      const auto permit = limiter_.acquire();
      ++requests_;
      auto client = connections_->take();
      const auto result = client->Get(target);
      if (result && !retriable_status(result->status)) {
        connections_->give_back(std::move(client));
        return Response{result->status, result->body};
      }
      last_error = result ? "HTTP " + std::to_string(result->status)
                          : httplib::to_string(result.error());
      if (result) connections_->give_back(std::move(client));
    }
    if (attempt >= cfg_.max_retries)
      throw SourceUnavailable(host_ + target + " failed after " +
                                  std::to_string(attempt + 1) + " attempts: " + last_error,
                              continuation);
    ++backoffs_;
    sleeper_(backoff_.delay(attempt));
  }
}

TitleBatch WikiClient::list_batch(const std::string& continuation) {
  std::string query =
      "action=query&format=json&formatversion=2&list=allpages&apnamespace=0"
      "&apfilterredir=nonredirects&aplimit=" +
      std::to_string(cfg_.list_batch_size);
  if (!continuation.empty()) query += "&apcontinue=" + url_encode(continuation);
  const Response response = get(query, continuation);
  if (response.status != 200)
    throw ApiFormatError("title listing answered HTTP " + std::to_string(response.status),
                         excerpt(response.body));

  TitleBatch batch;
  try {
    const auto doc = nlohmann::json::parse(response.body);
    if (doc.contains("error"))
      throw ApiFormatError("title listing returned an API error", excerpt(response.body));
    for (const auto& page : doc.at("query").at("allpages")) {
      PageRef ref;
      ref.page_id = page.at("pageid").get<std::int64_t>();
      ref.title = page.at("title").get<std::string>();
      ref.ns = page.value("ns", 0);
      if (ref.page_id <= 0 || ref.title.empty())
        throw ApiFormatError("title listing returned an invalid page", excerpt(page.dump()));
      batch.refs.push_back(std::move(ref));
    }
    if (const auto it = doc.find("continue"); it != doc.end())
      batch.next = it->at("apcontinue").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ApiFormatError("malformed title listing response", excerpt(response.body));
  }
  return batch;
}

std::optional<RawPage> WikiClient::fetch_page(const PageRef& ref) {
  const std::string query =
      "action=parse&format=json&formatversion=2&prop=text&disableeditsection=1"
      "&disablelimitreport=1&disabletoc=1&pageid=" +
      std::to_string(ref.page_id);
  const Response response = get(query, {});
  if (response.status == 404) return std::nullopt;
  if (response.status != 200)
    throw ApiFormatError("page " + std::to_string(ref.page_id) + " answered HTTP " +
                             std::to_string(response.status),
                         excerpt(response.body));
  try {
    const auto doc = nlohmann::json::parse(response.body);
    if (const auto err = doc.find("error"); err != doc.end()) {
      const std::string code = err->value("code", "");
      if (code == "missingtitle" || code == "nosuchpageid" || code == "missingpage")
        return std::nullopt;
      throw ApiFormatError("page " + std::to_string(ref.page_id) + " returned API error",
                           excerpt(response.body));
    }
    RawPage page;
    page.ref = ref;
    page.html = doc.at("parse").at("text").get<std::string>();
    page.fetched_at = Clock::now();
    page.source = PageSource::api;
    return page;
  } catch (const nlohmann::json::exception&) {
    throw ApiFormatError("malformed parse response for page " + std::to_string(ref.page_id),
                         excerpt(response.body));
  }
}

ListResult list_page_titles(WikiClient& client, const ListOptions& options,
                            const std::function<void(const PageRef&)>& sink) {
  TitleSorter sorter(options.spill_dir, options.max_buffered_refs);
  ListResult result;
  std::string token = options.resume_from;
  do {
    TitleBatch batch = client.list_batch(token);
    ++result.requests;
    for (auto& ref : batch.refs)
      if (ref.ns == 0) sorter.add(std::move(ref));
    token = std::move(batch.next);
  } while (!token.empty());
  result.total = sorter.finish(sink);
  result.spilled_runs = sorter.spilled_runs();
  result.peak_buffered = sorter.peak_buffered();
  return result;
}

std::optional<RawPage> fetch_page(const PageRef& ref, WikiClient& client) {
  return client.fetch_page(ref);
}

}  // namespace wikitables
