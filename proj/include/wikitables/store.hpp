#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wikitables/csv.hpp"
#include "wikitables/filter.hpp"
#include "wikitables/types.hpp"

namespace wikitables {

/// Per-table metadata document stored next to each CSV.
struct TableMetadata {
  TableId table_id;
  std::string url;
  std::string page_title;
  std::optional<std::string> caption;
  std::vector<std::string> context_before;
  std::vector<std::string> context_after;
  int n_rows = 0;
  int n_cols = 0;
  std::vector<bool> column_numeric;
  int header_rows = 0;
  Clock::time_point extracted_at{};
  std::string snapshot_date;

  bool operator==(const TableMetadata&) const = default;
};

TableMetadata make_metadata(const ExtractedTable& table, Clock::time_point extracted_at,
                            std::string snapshot_date);

/// Corpus-level manifest.json.
struct CorpusManifest {
  int format_version = 0;
  std::string toolkit_version;
  std::string snapshot_date;
  FilterConfig filters;
  Clock::time_point created_at{};
};

/// On-disk corpus:
///
///   <root>/manifest.json
///   <root>/checkpoint.log
///   <root>/titles.tsv                     sorted "<page_id>\t<title>" listing
///   <root>/tables/<NNN>/<page_id>_<offset>.csv|.json   NNN = page_id mod 1000
///   <root>/reports/
///
/// A table is committed when its .json exists: the CSV is renamed into place
/// first, the JSON second, and recover() removes whichever half of a pair a
/// crash left behind. Readers only ever see committed pairs.
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path root, bool sync = true);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }
  std::filesystem::path checkpoint_path() const { return root_ / "checkpoint.log"; }
  std::filesystem::path titles_path() const { return root_ / "titles.tsv"; }
  std::filesystem::path tables_dir() const { return root_ / "tables"; }
  std::filesystem::path reports_dir() const { return root_ / "reports"; }

  static std::string shard_name(std::int64_t page_id);
  std::filesystem::path csv_path(const TableId& id) const;
  std::filesystem::path json_path(const TableId& id) const;

  bool has_manifest() const;
  /// Throws CorpusError when the manifest is missing or unreadable.
  CorpusManifest read_manifest() const;
  /// Writes the manifest if absent; otherwise verifies snapshot date and
  /// filters agree and throws CheckpointMismatch if they do not.
  void ensure_manifest(const CorpusManifest& manifest) const;

  struct StoredPaths {
    std::filesystem::path csv;
    std::filesystem::path json;
  };
  /// Throws DuplicateTable if the id is already stored and StoreError on I/O
  /// failure, after removing any partial files.
  StoredPaths write_table(const ExtractedTable& table, const TableMetadata& meta) const;

  /// Removes every stored table of a page (used before re-processing it).
  void clear_page(std::int64_t page_id) const;

  /// Deletes temp files and half-committed pairs left by a crash.
  std::size_t recover() const;

  /// Committed table ids in ascending order.
  std::vector<TableId> list_tables() const;
  TableMetadata read_metadata(const TableId& id) const;
  csv::Rows read_cells(const TableId& id) const;
  std::string read_csv_text(const TableId& id) const;

 private:
  std::filesystem::path root_;
  bool sync_;
};

/// Grid plus header flags rebuilt from a stored table.
ExtractedTable load_table(const CorpusStore& store, const TableId& id);

std::string format_timestamp(Clock::time_point t);
Clock::time_point parse_timestamp(const std::string& text);
bool valid_date(const std::string& text);

}  // namespace wikitables
