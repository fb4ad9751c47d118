#include "wikitables/service.hpp"

#include <charconv>
#include <fstream>

#include "httplib.h"

#include "wikitables/error.hpp"
#include "wikitables/search.hpp"
#include "wikitables/stats.hpp"
#include "wikitables/store.hpp"
#include "wikitables/version.hpp"

namespace fs = std::filesystem;

namespace wikitables {

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message, const std::vector<std::string>& fields = {}) {
  Json body;
  body["code"] = code;
  body["message"] = message;
  body["fields"] = fields;
  send(res, status, body);
}

std::string canonical_key(const fs::path& p) {
  std::error_code ec;
  const fs::path c = fs::weakly_canonical(fs::absolute(p), ec);
  return (ec ? p : c).lexically_normal().string();
}

bool active(JobPhase phase) { return phase != JobPhase::finished && phase != JobPhase::failed; }

std::optional<std::int64_t> parse_long(const std::string& text) {
  std::int64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace

void apply_bind_address(ServiceOptions& options, const std::string& bind) {
  if (bind.empty()) return;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    options.host = bind;
    return;
  }
  if (colon > 0) options.host = bind.substr(0, colon);
  const auto port = parse_long(bind.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535)
    throw ConfigError("bad bind address " + bind + " (expected host:port)");
  options.port = static_cast<int>(*port);
}

ApiServer::ApiServer(ServiceOptions options) : options_(std::move(options)) {}

ApiServer::~ApiServer() { stop(); }

std::string ApiServer::base_url() const {
  return "http://" + options_.host + ":" + std::to_string(port_);
}

void ApiServer::restore() {
  const fs::path dir = options_.state_dir / "jobs";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("state directory " + dir.string() + " is not writable: " + ec.message());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    auto entry = std::make_unique<JobEntry>();
    JobState state;
    try {
      std::ifstream in(path, std::ios::binary);
      const Json doc = Json::parse(in);
      entry->id = doc.at("job_id").get<std::string>();
      entry->config = job_config_from_json(doc.at("config"));
      state = job_state_from_json(doc.at("state"));
    } catch (const std::exception& e) {
      throw Error("corrupted service state in " + path.string() + ": " + e.what() +
                  "; move the file away to start without that job");
    }
    if (entry->id + ".json" != path.filename().string())
      throw Error("corrupted service state in " + path.string() + ": job id " + entry->id +
                  " does not match the file name");
    if (active(state.phase)) {
      entry->job = std::make_unique<CrawlJob>(entry->config);
      entry->job->start(/*paused=*/true);
    }
    entry->last_saved = state;
    entry->saved = true;
    if (const auto dash = entry->id.rfind('-'); dash != std::string::npos)
      if (const auto n = parse_long(entry->id.substr(dash + 1)); n && *n >= 0)
        next_id_ = std::max<std::uint64_t>(next_id_, static_cast<std::uint64_t>(*n) + 1);
    const std::string id = entry->id;
    jobs_[id] = std::move(entry);
  }
}

JobState ApiServer::state_of(const JobEntry& entry) const {
  return entry.job ? entry.job->progress() : entry.last_saved;
}

Json ApiServer::resource(const JobEntry& entry, const JobState& state) const {
  Json j;
  j["job_id"] = entry.id;
  j["config"] = to_json(entry.config);
  j["state"] = to_json(state);
  return j;
}

void ApiServer::save(JobEntry& entry, const JobState& state) {
  const fs::path dir = options_.state_dir / "jobs";
  const fs::path tmp = dir / ("." + entry.id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << dump_document(resource(entry, state));
    if (!out) return;
  }
  std::error_code ec;
  fs::rename(tmp, dir / (entry.id + ".json"), ec);
  entry.last_saved = state;
  entry.saved = true;
}

ApiServer::JobEntry* ApiServer::find(const std::string& id) {
  const auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : it->second.get();
}

void ApiServer::monitor() {
  std::unique_lock lock(mutex_);
  while (!stopping_) {
    cv_.wait_for(lock, std::chrono::milliseconds(250));
    for (auto& [id, entry] : jobs_) {
      if (!entry->job) continue;
      const JobState s = entry->job->progress();
      if (!entry->saved || s.phase != entry->last_saved.phase ||
          s.pages_done != entry->last_saved.pages_done)
        save(*entry, s);
    }
  }
}

fs::path ApiServer::corpus_for(const httplib::Request& req) {
  if (req.has_param("job")) {
    const std::string id = req.get_param_value("job");
    std::lock_guard lock(mutex_);
    if (const JobEntry* entry = find(id)) return entry->config.corpus_root;
    throw ValidationError("unknown job " + id, {"job"});
  }
  if (req.has_param("corpus_root")) return req.get_param_value("corpus_root");
  if (options_.corpus_root) return *options_.corpus_root;
  throw ValidationError("name a corpus with ?job= or ?corpus_root=", {"corpus_root"});
}

void ApiServer::routes() {
  httplib::Server& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                             std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const ValidationError& e) {
      send_error(res, 400, "validation_error", e.what(), e.fields());
    } catch (const CorpusError& e) {
      send_error(res, 404, "corpus_not_found", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal_error", e.what());
    }
  });
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) send_error(res, 404, "not_found", "no route for " + req.path);
  });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, 200, Json{{"status", "ok"}, {"version", kToolkitVersion}});
  });

  s.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      return send_error(res, 400, "bad_request", std::string("body is not JSON: ") + e.what());
    }
    JobConfig cfg = job_config_from_json(body);
    cfg.validate();
    std::lock_guard lock(mutex_);
    const std::string key = canonical_key(cfg.corpus_root);
    for (const auto& [id, entry] : jobs_)
      if (canonical_key(entry->config.corpus_root) == key && active(state_of(*entry).phase))
        return send_error(res, 409, "conflict",
                          "job " + id + " is already working on " + cfg.corpus_root.string(),
                          {"corpus_root"});
    auto entry = std::make_unique<JobEntry>();
    entry->id = "job-" + std::to_string(next_id_++);
    entry->config = cfg;
    JobHooks hooks;
    if (options_.log) {
      const std::string id = entry->id;
      hooks.log = [log = options_.log, id](const std::string& m) { log(id + ": " + m); };
    }
    entry->job = std::make_unique<CrawlJob>(cfg, hooks);
    entry->job->start();
    const JobState state = entry->job->progress();
    save(*entry, state);
    send(res, 201, resource(*entry, state));
    const std::string id = entry->id;
    jobs_[id] = std::move(entry);
  });

  s.Get("/jobs", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    Json list = Json::array();
    for (const auto& [id, entry] : jobs_) list.push_back(resource(*entry, state_of(*entry)));
    send(res, 200, Json{{"jobs", std::move(list)}});
  });

  s.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    const JobEntry* entry = find(req.matches[1]);
    if (!entry) return send_error(res, 404, "not_found", "no job " + req.matches[1].str());
    send(res, 200, resource(*entry, state_of(*entry)));
  });

  s.Get(R"(/jobs/([^/]+)/progress)", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    const JobEntry* entry = find(req.matches[1]);
    if (!entry) return send_error(res, 404, "not_found", "no job " + req.matches[1].str());
    send(res, 200, to_json(state_of(*entry)));
  });

  s.Post(R"(/jobs/([^/]+)/(pause|resume))",
         [this](const httplib::Request& req, httplib::Response& res) {
           std::lock_guard lock(mutex_);
           JobEntry* entry = find(req.matches[1]);
           if (!entry) return send_error(res, 404, "not_found", "no job " + req.matches[1].str());
           JobState state = state_of(*entry);
           if (entry->job)
             state = req.matches[2] == "pause" ? entry->job->pause() : entry->job->resume();
           save(*entry, state);
           send(res, 200, resource(*entry, state));
         });

  s.Get("/corpus/stats", [this](const httplib::Request& req, httplib::Response& res) {
    const fs::path root = corpus_for(req);
    {
      std::lock_guard lock(mutex_);
      const std::string key = canonical_key(root);
      for (const auto& [id, entry] : jobs_) {
        if (canonical_key(entry->config.corpus_root) != key) continue;
        const JobPhase phase = state_of(*entry).phase;
        if (phase == JobPhase::listing || phase == JobPhase::crawling)
          return send_error(res, 409, "conflict",
                            "job " + id + " is still writing this corpus; pause it first");
      }
    }
    send(res, 200, to_json(compute_stats(root)));
  });

  s.Get("/corpus/search", [this](const httplib::Request& req, httplib::Response& res) {
    const fs::path root = corpus_for(req);
    std::map<std::string, std::string> params;
    for (const auto& [key, value] : req.params)
      if (key != "job" && key != "corpus_root") params[key] = value;
    send(res, 200, to_json(search(root, query_spec_from_params(params))));
  });

  const auto table_route = [this](const httplib::Request& req, httplib::Response& res,
                                  bool raw) {
    const fs::path root = corpus_for(req);
    const auto page_id = parse_long(req.matches[1]);
    const auto offset = parse_long(req.matches[2]);
    if (!page_id || !offset || *offset > INT32_MAX)
      return send_error(res, 400, "validation_error", "bad table id", {"page_id", "offset"});
    const CorpusStore store(root, false);
    const TableId id{*page_id, static_cast<std::int32_t>(*offset)};
    if (!fs::exists(store.json_path(id)) || !fs::exists(store.csv_path(id)))
      return send_error(res, 404, "not_found", "no table " + id.stem() + " in " + root.string());
    if (raw) {
      res.status = 200;
      res.set_header("Content-Disposition", "attachment; filename=\"" + id.stem() + ".csv\"");
      res.set_content(store.read_csv_text(id), "text/csv; charset=utf-8");
      return;
    }
    Json body;
    body["metadata"] = to_json(store.read_metadata(id));
    body["cells"] = store.read_cells(id);
    send(res, 200, body);
  };
  s.Get(R"(/corpus/tables/(-?\d+)/(-?\d+))",
        [table_route](const httplib::Request& req, httplib::Response& res) {
          table_route(req, res, false);
        });
  s.Get(R"(/corpus/tables/(-?\d+)/(-?\d+)/csv)",
        [table_route](const httplib::Request& req, httplib::Response& res) {
          table_route(req, res, true);
        });

  if (options_.static_dir) s.set_mount_point("/ui", options_.static_dir->string());
}

void ApiServer::start() {
  if (server_) return;
  restore();
  server_ = std::make_unique<httplib::Server>();
  // No SO_REUSEPORT: a second server on a busy port must fail, not share it.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ <= 0) {
    server_.reset();
    for (auto& [id, entry] : jobs_)
      if (entry->job) entry->job->shutdown();
    jobs_.clear();
    throw Error("cannot listen on " + options_.host + ":" + std::to_string(options_.port) +
                " (address in use or not permitted)");
  }
  stopping_ = false;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  monitor_ = std::thread([this] { monitor(); });
  server_->wait_until_ready();
}

void ApiServer::wait() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return stopping_ || !server_; });
}

void ApiServer::stop() {
  if (!server_) return;
  {
    std::lock_guard lock(mutex_);
    if (stopping_ && !thread_.joinable()) return;
    stopping_ = true;
    cv_.notify_all();
  }
  server_->stop();
  if (thread_.joinable()) thread_.join();
  if (monitor_.joinable()) monitor_.join();
  std::lock_guard lock(mutex_);
  for (auto& [id, entry] : jobs_) {
    if (!entry->job) continue;
    entry->job->shutdown();
    save(*entry, entry->job->progress());
  }
  jobs_.clear();
  server_.reset();
  cv_.notify_all();
}

}  // namespace wikitables
