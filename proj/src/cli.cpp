#include "wikitables/cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "wikitables/error.hpp"
#include "wikitables/mock_wiki.hpp"
#include "wikitables/search.hpp"
#include "wikitables/service.hpp"
#include "wikitables/stats.hpp"
#include "wikitables/store.hpp"
#include "wikitables/version.hpp"

namespace fs = std::filesystem;

namespace wikitables {

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_interrupt(int) { g_interrupted = 1; }

struct SignalGuard {
  SignalGuard() {
    g_interrupted = 0;
    previous_int_ = std::signal(SIGINT, on_interrupt);
    previous_term_ = std::signal(SIGTERM, on_interrupt);
  }
  ~SignalGuard() {
    std::signal(SIGINT, previous_int_);
    std::signal(SIGTERM, previous_term_);
  }
  void (*previous_int_)(int);
  void (*previous_term_)(int);
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string format_duration(double seconds) {
  auto total = static_cast<long long>(seconds + 0.5);
  const long long h = total / 3600;
  const long long m = total % 3600 / 60;
  const long long s = total % 60;
  char buf[48];
  if (h > 0) {
    std::snprintf(buf, sizeof buf, "%lldh%02lldm", h, m);
  } else if (m > 0) {
    std::snprintf(buf, sizeof buf, "%lldm%02llds", m, s);
  } else {
    std::snprintf(buf, sizeof buf, "%llds", s);
  }
  return buf;
}

// Filter flags shared by crawl, stats and refilter; only flags that were
// given override the base configuration.
struct FilterFlags {
  std::optional<double> min_cyrillic_ratio;
  bool drop_latin = false;
  bool drop_numeric = false;
  bool drop_null_rows = false;
  bool drop_null_columns = false;
  std::optional<double> null_threshold;
  std::optional<int> min_rows;
  std::optional<int> min_cols;

  void add(CLI::App& app) {
    app.add_option("--min-cyrillic-ratio", min_cyrillic_ratio,
                   "Drop tables whose Cyrillic letter share is below this");
    app.add_flag("--drop-latin-only-columns", drop_latin);
    app.add_flag("--drop-numeric-only-columns", drop_numeric);
    app.add_flag("--drop-mostly-null-rows", drop_null_rows);
    app.add_flag("--drop-mostly-null-columns", drop_null_columns);
    app.add_option("--null-threshold", null_threshold,
                   "Share of empty cells above which a row or column is mostly NULL");
    app.add_option("--min-rows", min_rows, "Drop tables with fewer rows");
    app.add_option("--min-cols", min_cols, "Drop tables with fewer columns");
  }

  bool any() const {
    return min_cyrillic_ratio || drop_latin || drop_numeric || drop_null_rows ||
           drop_null_columns || null_threshold || min_rows || min_cols;
  }

  void apply(FilterConfig& cfg) const {
    if (min_cyrillic_ratio) cfg.min_cyrillic_ratio = *min_cyrillic_ratio;
    if (drop_latin) cfg.drop_latin_only_columns = true;
    if (drop_numeric) cfg.drop_numeric_only_columns = true;
    if (drop_null_rows) cfg.drop_mostly_null_rows = true;
    if (drop_null_columns) cfg.drop_mostly_null_columns = true;
    if (null_threshold) cfg.null_threshold = *null_threshold;
    if (min_rows) cfg.min_rows = *min_rows;
    if (min_cols) cfg.min_cols = *min_cols;
  }
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

std::string today() { return format_timestamp(Clock::now()).substr(0, 10); }

struct CrawlFlags {
  std::optional<std::string> config;
  std::optional<std::string> snapshot_date;
  std::string source = "api";
  std::optional<std::string> api_url;
  std::optional<std::string> dump;
  std::optional<std::string> corpus;
  std::optional<int> chunks;
  std::optional<int> chunk_index;
  std::optional<int> workers;
  std::optional<int> max_concurrent;
  std::optional<long> min_interval_ms;
  std::optional<int> max_retries;
  std::optional<long> backoff_ms;
  std::optional<std::string> user_agent;
  std::optional<std::string> article_base_url;
  std::optional<int> list_batch_size;
  bool no_fsync = false;
  bool quiet = false;
  bool verbose = false;
  FilterFlags filters;
};

JobConfig build_job_config(const CrawlFlags& f) {
  JobConfig cfg;
  if (f.config) cfg = job_config_from_json(read_json_file(*f.config));
  if (f.snapshot_date) cfg.snapshot_date = *f.snapshot_date;
  if (cfg.snapshot_date.empty()) cfg.snapshot_date = today();
  if (f.corpus) cfg.corpus_root = *f.corpus;
  if (f.chunks) cfg.chunk_count = *f.chunks;
  if (f.chunk_index) cfg.chunk_index = *f.chunk_index;
  if (f.workers) cfg.worker_count = *f.workers;
  SourceConfig& src = cfg.source;
  if (f.api_url) src.api_base_url = *f.api_url;
  if (f.dump) src.dump_path = *f.dump;
  if (f.max_concurrent) src.max_concurrent_requests = *f.max_concurrent;
  if (f.min_interval_ms) src.min_request_interval = std::chrono::milliseconds(*f.min_interval_ms);
  if (f.max_retries) src.max_retries = *f.max_retries;
  if (f.backoff_ms) src.backoff_base = std::chrono::milliseconds(*f.backoff_ms);
  if (f.user_agent) src.user_agent = *f.user_agent;
  if (f.article_base_url) src.article_base_url = *f.article_base_url;
  if (f.list_batch_size) src.list_batch_size = *f.list_batch_size;
  if (f.no_fsync) cfg.durable = false;
  if (f.source == "api") {
    if (f.api_url) src.dump_path.reset();
    if (src.api_base_url.empty() && !src.dump_path)
      src.api_base_url = "https://ru.wikipedia.org/w/api.php";
  } else if (f.source == "dump") {
    if (f.dump || src.dump_path) src.api_base_url.clear();
  }
  f.filters.apply(cfg.filters);
  return cfg;
}

int run_crawl(const CrawlFlags& flags, std::ostream& out, std::ostream& err) {
  JobConfig cfg = build_job_config(flags);
  std::unique_ptr<MockWiki> mock;
  if (flags.source == "mock") {
    if (!cfg.source.dump_path)
      throw ValidationError("--source mock serves an HTML dump; pass --dump", {"dump"});
    mock = std::make_unique<MockWiki>(MockWiki::pages_from_dump(*cfg.source.dump_path));
    mock->start();
    cfg.source.dump_path.reset();
    cfg.source.api_base_url = mock->api_url();
    // Keep article URLs independent of the ephemeral port.
    if (cfg.source.article_base_url.empty())
      cfg.source.article_base_url = "https://ru.wikipedia.org/wiki/";
  }
  cfg.validate();

  JobHooks hooks;
  if (flags.verbose) hooks.log = [&err](const std::string& m) { err << m << "\n"; };
  SignalGuard signals;
  CrawlJob job(cfg, hooks);
  job.start();
  const bool tty = !flags.quiet;
  JobState state = job.progress();
  while (true) {
    if (job.wait_for({JobPhase::finished, JobPhase::failed}, std::chrono::milliseconds(200))) {
      state = job.progress();
      break;
    }
    if (g_interrupted) {
      err << (tty ? "\n" : "") << "interrupted: letting in-flight pages finish\n";
      job.shutdown();
      state = job.progress();
      break;
    }
    state = job.progress();
    if (tty) err << "\r" << render_progress(state) << std::flush;
  }
  if (tty) err << "\r" << render_progress(state) << "\n";

  switch (state.phase) {
    case JobPhase::finished:
      out << "finished: " << state.pages_done << " pages, " << state.tables_written
          << " tables in " << cfg.corpus_root.string() << "\n";
      return kExitOk;
    case JobPhase::failed:
      err << "crawl failed: " << state.error << "\n"
          << "completed pages are checkpointed; rerun the same command to resume\n";
      return kExitFailure;
    default:
      err << "paused after " << state.pages_done << " pages; rerun the same command to resume\n";
      return kExitFailure;
  }
}

void print_stats(const CorpusScan& scan, std::size_t top, std::ostream& out) {
  const CorpusStats& s = scan.stats();
  const auto pct = [](double v) { return fixed(v, 0) + "%"; };
  out << "Total number of pages                 " << s.pages_total << "\n"
      << "Total number of tables                " << s.tables_total << "\n"
      << "Total number of rows                  " << s.rows_total << "\n"
      << "Total number of columns               " << s.columns_total << "\n"
      << "Total number of cells                 " << s.cells_total << "\n"
      << "Avg cells per table                   " << fixed(s.avg_cells_per_table, 2) << "\n"
      << "Avg tables per page                   " << fixed(s.avg_tables_per_page, 2) << "\n"
      << "Avg cells per row                     " << fixed(s.avg_cells_per_row, 2) << "\n"
      << "Avg cells per column                  " << fixed(s.avg_cells_per_column, 2) << "\n"
      << "Avg characters per cell               " << fixed(s.avg_chars_per_cell, 2) << "\n"
      << "Avg Cyrillic characters per cell      " << fixed(s.avg_cyrillic_per_cell, 2) << "\n"
      << "Avg Latin characters per cell         " << fixed(s.avg_latin_per_cell, 2) << "\n"
      << "Cells with non-string data            " << pct(s.pct_nonstring_cells) << "\n"
      << "Rows that are mostly NULL             " << pct(s.pct_mostly_null_rows) << "\n"
      << "Columns that are mostly NULL          " << pct(s.pct_mostly_null_columns) << "\n"
      << "Columns with only Cyrillic characters " << pct(s.pct_cyrillic_only_columns) << "\n"
      << "Columns with only Latin characters    " << pct(s.pct_latin_only_columns) << "\n"
      << "Columns with only numeric data        " << pct(s.pct_numeric_only_columns) << "\n";
  if (s.empty) out << "(corpus holds no tables)\n";
  if (s.errors > 0) out << "Unreadable tables (excluded)          " << s.errors << "\n";

  out << "\nMost frequent table sizes (columns x rows)\n";
  for (const auto& size : scan.size_histogram(top))
    out << "  " << std::left << std::setw(10) << size.key() << size.count << "\n";
  out << "\nMost common headers (digits excluded)\n";
  for (const auto& h : scan.header_frequency(top, true)) out << "  " << h.count << "  " << h.text << "\n";
  out << "\nMost table-rich pages (rows >= 3, columns >= 5)\n";
  for (const auto& p : scan.table_rich_pages(top, 3, 5)) out << "  " << p.count << "  " << p.page_title << "\n";
  const Superlatives& sup = scan.superlatives();
  out << "\nRecord tables\n";
  for (const auto& [label, entry] :
       {std::pair{"widest (columns)", &sup.widest}, std::pair{"longest (rows)", &sup.longest},
        std::pair{"most characters", &sup.most_characters},
        std::pair{"most cells", &sup.most_cells}}) {
    if (!*entry) continue;
    const Superlative& v = **entry;
    out << "  " << label << ": " << v.value << "  " << v.page_title << " / " << v.table_title
        << " [" << v.table_id.stem() << "]\n";
  }
}

}  // namespace

std::string render_progress(const JobState& state, int width) {
  std::ostringstream line;
  const std::string phase(to_string(state.phase));
  if (!state.pages_total) {
    line << phase << ": listing titles...";
    return line.str();
  }
  const std::size_t total = *state.pages_total;
  const double fraction =
      total == 0 ? 1.0 : static_cast<double>(state.pages_done) / static_cast<double>(total);
  const int filled = static_cast<int>(fraction * width);
  line << "[" << std::string(static_cast<std::size_t>(filled), '#')
       << std::string(static_cast<std::size_t>(width - filled), '.') << "] " << state.pages_done
       << "/" << total << " pages, " << *state.pages_left() << " left, "
       << fixed(state.avg_page_seconds, 2) << " s/page";
  if (state.eta_seconds) line << ", ETA " << format_duration(*state.eta_seconds);
  if (state.phase == JobPhase::paused) line << " (paused)";
  return line.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build, query and serve corpora of Wikipedia tables", "wikitables"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);

  CrawlFlags crawl;
  CLI::App* crawl_cmd = app.add_subcommand("crawl", "Run a corpus-construction job in the foreground");
  crawl_cmd->add_option("--config", crawl.config, "JSON job config; flags override it");
  crawl_cmd->add_option("--snapshot-date", crawl.snapshot_date, "Snapshot date YYYY-MM-DD (default today)");
  crawl_cmd->add_option("--source", crawl.source, "api, dump, or mock (serves --dump over a local API)")
      ->check(CLI::IsMember({"api", "dump", "mock"}));
  crawl_cmd->add_option("--api-url", crawl.api_url, "MediaWiki api.php URL");
  crawl_cmd->add_option("--dump", crawl.dump, "HTML dump directory or tar");
  crawl_cmd->add_option("-o,--corpus", crawl.corpus, "Corpus directory");
  crawl_cmd->add_option("--chunks", crawl.chunks, "Number of chunks the listing is split into");
  crawl_cmd->add_option("--chunk-index", crawl.chunk_index, "Chunk to process (0-based)");
  crawl_cmd->add_option("--workers", crawl.workers, "Pages processed in parallel");
  crawl_cmd->add_option("--max-concurrent", crawl.max_concurrent, "Concurrent HTTP requests");
  crawl_cmd->add_option("--min-interval-ms", crawl.min_interval_ms, "Minimum spacing of request starts");
  crawl_cmd->add_option("--max-retries", crawl.max_retries);
  crawl_cmd->add_option("--backoff-ms", crawl.backoff_ms, "Base retry delay");
  crawl_cmd->add_option("--user-agent", crawl.user_agent);
  crawl_cmd->add_option("--article-base-url", crawl.article_base_url, "Prefix of table URLs");
  crawl_cmd->add_option("--list-batch-size", crawl.list_batch_size);
  crawl_cmd->add_flag("--no-fsync", crawl.no_fsync, "Skip fsync (faster, not crash safe)");
  crawl_cmd->add_flag("-q,--quiet", crawl.quiet, "No progress bar");
  crawl_cmd->add_flag("-v,--verbose", crawl.verbose, "Log warnings");
  crawl.filters.add(*crawl_cmd);

  std::string stats_corpus;
  std::size_t stats_top = 10;
  bool stats_json = false;
  bool stats_no_reports = false;
  FilterFlags stats_filters;
  CLI::App* stats_cmd = app.add_subcommand("stats", "Corpus statistics and rankings");
  stats_cmd->add_option("corpus", stats_corpus, "Corpus directory")->required();
  stats_cmd->add_option("--top", stats_top, "Entries per ranking");
  stats_cmd->add_flag("--json", stats_json, "Print the statistics as JSON");
  stats_cmd->add_flag("--no-reports", stats_no_reports, "Do not write <corpus>/reports");
  stats_filters.add(*stats_cmd);

  std::string search_corpus;
  std::optional<std::string> title, caption, has_numeric;
  std::optional<int> q_min_rows, q_max_rows, q_min_cols, q_max_cols, q_limit, q_offset;
  bool search_json = false;
  CLI::App* search_cmd = app.add_subcommand("search", "Search table metadata (offline)");
  search_cmd->add_option("corpus", search_corpus, "Corpus directory")->required();
  search_cmd->add_option("--title", title, "Page title contains (case-insensitive)");
  search_cmd->add_option("--caption", caption, "Caption contains (case-insensitive)");
  search_cmd->add_option("--min-rows", q_min_rows);
  search_cmd->add_option("--max-rows", q_max_rows);
  search_cmd->add_option("--min-cols", q_min_cols);
  search_cmd->add_option("--max-cols", q_max_cols);
  search_cmd->add_option("--has-numeric-column", has_numeric, "true or false");
  search_cmd->add_option("--limit", q_limit);
  search_cmd->add_option("--offset", q_offset);
  search_cmd->add_flag("--json", search_json);

  std::string refilter_source, refilter_dest;
  std::optional<std::string> refilter_config;
  bool refilter_no_fsync = false;
  FilterFlags refilter_filters;
  CLI::App* refilter_cmd =
      app.add_subcommand("refilter", "Write a filtered copy of an existing corpus");
  refilter_cmd->add_option("source", refilter_source, "Corpus to read")->required();
  refilter_cmd->add_option("dest", refilter_dest, "New corpus directory")->required();
  refilter_cmd->add_option("--filters", refilter_config, "JSON file with filter settings");
  refilter_cmd->add_flag("--no-fsync", refilter_no_fsync);
  refilter_filters.add(*refilter_cmd);

  std::optional<std::string> bind, state_dir, serve_corpus, ui_dir;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--bind", bind, "host:port (env WIKITABLES_BIND, default 127.0.0.1:8080)");
  serve_cmd->add_option("--state-dir", state_dir, "Job state directory (env WIKITABLES_STATE_DIR)");
  serve_cmd->add_option("--corpus", serve_corpus, "Default corpus for /corpus requests");
  serve_cmd->add_option("--ui", ui_dir, "Static web UI files served under /ui/");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const CLI::App* sub : app.get_subcommands())
      if (sub != nullptr) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (*crawl_cmd) return run_crawl(crawl, out, err);

    if (*stats_cmd) {
      std::optional<FilterConfig> filters;
      if (stats_filters.any()) {
        filters.emplace();
        stats_filters.apply(*filters);
        filters->validate();
      }
      const CorpusScan scan = CorpusScan::run(stats_corpus, filters);
      if (!stats_no_reports) scan.write_reports(CorpusStore(stats_corpus).reports_dir(), stats_top);
      if (stats_json) {
        out << dump_document(to_json(scan.stats()));
      } else {
        print_stats(scan, stats_top, out);
      }
      return kExitOk;
    }

    if (*search_cmd) {
      QuerySpec q;
      q.title_substring = title;
      q.caption_substring = caption;
      q.min_rows = q_min_rows;
      q.max_rows = q_max_rows;
      q.min_cols = q_min_cols;
      q.max_cols = q_max_cols;
      if (has_numeric) {
        if (*has_numeric == "true" || *has_numeric == "1") {
          q.has_numeric_column = true;
        } else if (*has_numeric == "false" || *has_numeric == "0") {
          q.has_numeric_column = false;
        } else {
          throw ValidationError("--has-numeric-column takes true or false",
                                {"has_numeric_column"});
        }
      }
      if (q_limit) q.limit = *q_limit;
      if (q_offset) q.offset = *q_offset;
      q.validate();
      const SearchPage page = search(search_corpus, q);
      if (search_json) {
        out << dump_document(to_json(page));
        return kExitOk;
      }
      for (const auto& meta : page.items)
        out << meta.table_id.page_id << "\t" << meta.table_id.offset << "\t" << meta.n_cols
            << "x" << meta.n_rows << "\t" << meta.page_title << "\t"
            << meta.caption.value_or("") << "\n";
      err << page.items.size() << " of " << page.total << " matching tables\n";
      return kExitOk;
    }

    if (*refilter_cmd) {
      FilterConfig filters;
      if (refilter_config) filters = filter_config_from_json(read_json_file(*refilter_config));
      refilter_filters.apply(filters);
      const RefilterResult r =
          refilter_corpus(refilter_source, refilter_dest, filters, !refilter_no_fsync);
      out << "kept " << r.tables_written << " of " << r.tables_read << " tables in "
          << refilter_dest << "\n";
      return kExitOk;
    }

    if (*serve_cmd) {
      ServiceOptions options;
      if (const char* env = std::getenv("WIKITABLES_STATE_DIR"); env && *env)
        options.state_dir = env;
      if (const char* env = std::getenv("WIKITABLES_BIND"); env && *env)
        apply_bind_address(options, env);
      if (bind) apply_bind_address(options, *bind);
      if (state_dir) options.state_dir = *state_dir;
      if (serve_corpus) options.corpus_root = fs::path(*serve_corpus);
      if (ui_dir) options.static_dir = fs::path(*ui_dir);
      options.log = [&err](const std::string& m) { err << m << "\n"; };
      SignalGuard signals;
      ApiServer server(options);
      server.start();
      err << "serving on " << server.base_url() << " (state in " << options.state_dir.string()
          << ")\n";
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      err << "shutting down; running jobs are paused\n";
      server.stop();
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace wikitables
