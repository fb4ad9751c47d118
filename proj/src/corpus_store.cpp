#include "wikitables/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wikitables/error.hpp"
#include "wikitables/failpoint.hpp"
#include "wikitables/json_io.hpp"

namespace fs = std::filesystem;

namespace wikitables {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// Writes the whole buffer to a fresh file; removes it and throws on failure.
void write_new_file(const fs::path& path, const std::string& data, bool sync) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0)
    throw StoreError("cannot create " + path.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  int error = 0;
  while (written < data.size()) {
    const auto n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      error = errno;
      break;
    }
    written += static_cast<std::size_t>(n);
  }
  if (error == 0 && sync && ::fsync(fd) != 0) error = errno;
  if (::close(fd) != 0 && error == 0) error = errno;
  if (error != 0) {
    ::unlink(path.c_str());
    throw StoreError("write to " + path.string() + " failed: " + std::strerror(error));
  }
}

std::optional<TableId> parse_stem(const std::string& stem) {
  const auto underscore = stem.find('_');
  if (underscore == std::string::npos) return std::nullopt;
  TableId id;
  const char* begin = stem.data();
  const char* mid = begin + underscore;
  const char* end = begin + stem.size();
  auto r1 = std::from_chars(begin, mid, id.page_id);
  auto r2 = std::from_chars(mid + 1, end, id.offset);
  if (r1.ec != std::errc{} || r1.ptr != mid || r2.ec != std::errc{} || r2.ptr != end)
    return std::nullopt;
  return id;
}

csv::Rows to_rows(const CellGrid& grid) {
  csv::Rows rows;
  rows.reserve(grid.n_rows());
  for (const auto& row : grid.rows) {
    auto& out = rows.emplace_back();
    out.reserve(row.size());
    for (const auto& cell : row) out.push_back(cell.text);
  }
  return rows;
}

}  // namespace

std::string format_timestamp(Clock::time_point t) {
  const std::time_t secs = Clock::to_time_t(t);
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Clock::time_point parse_timestamp(const std::string& text) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  if (in.fail()) throw CorpusError("malformed timestamp: " + text);
  return Clock::from_time_t(::timegm(&tm));
}

bool valid_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (const std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (text[i] < '0' || text[i] > '9') return false;
  const int month = std::stoi(text.substr(5, 2));
  const int day = std::stoi(text.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

TableMetadata make_metadata(const ExtractedTable& table, Clock::time_point extracted_at,
                            std::string snapshot_date) {
  TableMetadata meta;
  meta.table_id = table.table_id;
  meta.url = table.url;
  meta.page_title = table.page_title;
  meta.caption = table.caption;
  meta.context_before = table.context_before;
  meta.context_after = table.context_after;
  meta.n_rows = static_cast<int>(table.grid.n_rows());
  meta.n_cols = static_cast<int>(table.grid.n_cols());
  meta.column_numeric = table.column_numeric;
  meta.header_rows = table.header_rows;
  meta.extracted_at = std::chrono::time_point_cast<std::chrono::seconds>(extracted_at);
  meta.snapshot_date = std::move(snapshot_date);
  return meta;
}

CorpusStore::CorpusStore(fs::path root, bool sync) : root_(std::move(root)), sync_(sync) {}

std::string CorpusStore::shard_name(std::int64_t page_id) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%03d", static_cast<int>(((page_id % 1000) + 1000) % 1000));
  return buf;
}

fs::path CorpusStore::csv_path(const TableId& id) const {
  return tables_dir() / shard_name(id.page_id) / (id.stem() + ".csv");
}

fs::path CorpusStore::json_path(const TableId& id) const {
  return tables_dir() / shard_name(id.page_id) / (id.stem() + ".json");
}

bool CorpusStore::has_manifest() const { return fs::exists(manifest_path()); }

CorpusManifest CorpusStore::read_manifest() const {
  if (!has_manifest())
    throw CorpusError("no corpus at " + root_.string() + " (manifest.json missing)");
  try {
    return corpus_manifest_from_json(Json::parse(read_file(manifest_path())));
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError("unreadable manifest " + manifest_path().string() + ": " + e.what());
  }
}

void CorpusStore::ensure_manifest(const CorpusManifest& manifest) const {
  if (has_manifest()) {
    const CorpusManifest existing = read_manifest();
    if (existing.snapshot_date != manifest.snapshot_date)
      throw CheckpointMismatch("corpus " + root_.string() + " holds snapshot " +
                               existing.snapshot_date + ", job asks for " +
                               manifest.snapshot_date);
    if (!(existing.filters == manifest.filters))
      throw CheckpointMismatch("corpus " + root_.string() +
                               " was built with different filters");
    return;
  }
  fs::create_directories(root_);
  const fs::path tmp = root_ / ".manifest.json.tmp";
  write_new_file(tmp, dump_document(to_json(manifest)), sync_);
  fs::rename(tmp, manifest_path());
}

CorpusStore::StoredPaths CorpusStore::write_table(const ExtractedTable& table,
                                                  const TableMetadata& meta) const {
  const TableId& id = table.table_id;
  StoredPaths paths{csv_path(id), json_path(id)};
  if (fs::exists(paths.csv) || fs::exists(paths.json))
    throw DuplicateTable("table " + id.stem() + " already stored in " + root_.string());

  const fs::path dir = paths.csv.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StoreError("cannot create " + dir.string() + ": " + ec.message());

  const fs::path csv_tmp = dir / ("." + id.stem() + ".csv.tmp");
  const fs::path json_tmp = dir / ("." + id.stem() + ".json.tmp");
  write_new_file(csv_tmp, csv::write(to_rows(table.grid)), sync_);
  try {
    write_new_file(json_tmp, dump_document(to_json(meta)), sync_);
  } catch (...) {
    fs::remove(csv_tmp, ec);
    throw;
  }
  fs::rename(csv_tmp, paths.csv);
  failpoint::hit("store.between_renames");
  fs::rename(json_tmp, paths.json);
  return paths;
}

void CorpusStore::clear_page(std::int64_t page_id) const {
  const fs::path dir = tables_dir() / shard_name(page_id);
  std::error_code ec;
  if (!fs::exists(dir, ec)) return;
  const std::string prefix = std::to_string(page_id) + "_";
  const std::string tmp_prefix = "." + prefix;
  std::vector<fs::path> doomed;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const bool ours = name.starts_with(prefix) || name.starts_with(tmp_prefix);
    if (!ours) continue;
    const std::string stem = entry.path().stem().string();
    if (name.starts_with(prefix) && !parse_stem(stem)) continue;
    doomed.push_back(entry.path());
  }
  // JSON first so no pair is ever visible half-deleted.
  std::sort(doomed.begin(), doomed.end(), [](const fs::path& a, const fs::path& b) {
    return (a.extension() == ".json") > (b.extension() == ".json");
  });
  for (const auto& p : doomed) fs::remove(p);
}

std::size_t CorpusStore::recover() const {
  std::size_t removed = 0;
  std::error_code ec;
  if (!fs::exists(tables_dir(), ec)) return 0;
  for (const auto& shard : fs::directory_iterator(tables_dir())) {
    if (!shard.is_directory()) continue;
    std::vector<fs::path> doomed;
    for (const auto& entry : fs::directory_iterator(shard.path())) {
      const fs::path& p = entry.path();
      const std::string name = p.filename().string();
      if (name.starts_with(".") && name.ends_with(".tmp")) {
        doomed.push_back(p);
      } else if (p.extension() == ".csv") {
        if (!fs::exists(fs::path(p).replace_extension(".json"))) doomed.push_back(p);
      } else if (p.extension() == ".json") {
        if (!fs::exists(fs::path(p).replace_extension(".csv"))) doomed.push_back(p);
      }
    }
    for (const auto& p : doomed) removed += fs::remove(p) ? 1 : 0;
  }
  if (fs::exists(root_ / ".manifest.json.tmp")) fs::remove(root_ / ".manifest.json.tmp");
  return removed;
}

std::vector<TableId> CorpusStore::list_tables() const {
  std::vector<TableId> ids;
  std::error_code ec;
  if (!fs::exists(tables_dir(), ec)) return ids;
  for (const auto& shard : fs::directory_iterator(tables_dir())) {
    if (!shard.is_directory()) continue;
    for (const auto& entry : fs::directory_iterator(shard.path())) {
      const fs::path& p = entry.path();
      if (p.extension() != ".json") continue;
      const auto id = parse_stem(p.stem().string());
      if (!id) continue;
      if (!fs::exists(fs::path(p).replace_extension(".csv"))) continue;
      ids.push_back(*id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

TableMetadata CorpusStore::read_metadata(const TableId& id) const {
  const fs::path path = json_path(id);
  try {
    return table_metadata_from_json(Json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError("unreadable metadata " + path.string() + ": " + e.what());
  }
}

csv::Rows CorpusStore::read_cells(const TableId& id) const {
  try {
    return csv::read(read_file(csv_path(id)));
  } catch (const CorpusError&) {
    throw;
  } catch (const Error& e) {
    throw CorpusError("unreadable table " + csv_path(id).string() + ": " + e.what());
  }
}

std::string CorpusStore::read_csv_text(const TableId& id) const {
  return read_file(csv_path(id));
}

ExtractedTable load_table(const CorpusStore& store, const TableId& id) {
  const TableMetadata meta = store.read_metadata(id);
  const csv::Rows rows = store.read_cells(id);
  const auto n_cols = static_cast<std::size_t>(meta.n_cols);
  if (rows.size() != static_cast<std::size_t>(meta.n_rows))
    throw CorpusError("table " + id.stem() + ": CSV has " + std::to_string(rows.size()) +
                      " rows, metadata says " + std::to_string(meta.n_rows));
  ExtractedTable table;
  table.table_id = meta.table_id;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n_cols)
      throw CorpusError("table " + id.stem() + ": row " + std::to_string(r) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(n_cols));
    auto& row = table.grid.rows.emplace_back();
    for (const auto& text : rows[r])
      row.push_back(Cell{text, r < static_cast<std::size_t>(meta.header_rows),
                         CellOrigin::real});
  }
  table.header_rows = meta.header_rows;
  table.caption = meta.caption;
  table.context_before = meta.context_before;
  table.context_after = meta.context_after;
  table.page_title = meta.page_title;
  table.url = meta.url;
  table.column_numeric = meta.column_numeric;
  return table;
}

}  // namespace wikitables
