#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wikitables/filter.hpp"
#include "wikitables/json_io.hpp"
#include "wikitables/types.hpp"

namespace wikitables {

/// Corpus-wide statistics. Averages are ratios of the integer totals;
/// percentages are in [0, 100].
struct CorpusStats {
  std::size_t pages_total = 0;
  std::size_t tables_total = 0;
  std::size_t rows_total = 0;
  std::size_t columns_total = 0;
  std::size_t cells_total = 0;

  std::size_t chars_total = 0;
  std::size_t cyrillic_total = 0;
  std::size_t latin_total = 0;
  std::size_t nonstring_cells = 0;
  std::size_t mostly_null_rows = 0;
  std::size_t mostly_null_columns = 0;
  std::size_t cyrillic_only_columns = 0;
  std::size_t latin_only_columns = 0;
  std::size_t numeric_only_columns = 0;

  double avg_cells_per_table = 0;
  double avg_tables_per_page = 0;
  double avg_cells_per_row = 0;
  double avg_cells_per_column = 0;
  double avg_chars_per_cell = 0;
  double avg_cyrillic_per_cell = 0;
  double avg_latin_per_cell = 0;
  double pct_nonstring_cells = 0;
  double pct_mostly_null_rows = 0;
  double pct_mostly_null_columns = 0;
  double pct_cyrillic_only_columns = 0;
  double pct_latin_only_columns = 0;
  double pct_numeric_only_columns = 0;

  /// No tables were counted.
  bool empty = true;
  /// Tables that could not be read; excluded from every figure above.
  std::size_t errors = 0;
  std::vector<std::string> error_tables;

  /// Recomputes the averages and percentages from the totals.
  void finalize();
};

Json to_json(const CorpusStats& stats);

struct SizeCount {
  int cols = 0;
  int rows = 0;
  std::size_t count = 0;

  /// "<cols>x<rows>".
  std::string key() const { return std::to_string(cols) + "x" + std::to_string(rows); }
  bool operator==(const SizeCount&) const = default;
};

struct HeaderCount {
  std::string text;
  std::size_t count = 0;
  bool operator==(const HeaderCount&) const = default;
};

struct PageTableCount {
  std::int64_t page_id = 0;
  std::string page_title;
  std::size_t count = 0;
  bool operator==(const PageTableCount&) const = default;
};

struct Superlative {
  TableId table_id;
  std::string page_title;
  /// Caption, else the first header row joined, else "(untitled)".
  std::string table_title;
  std::uint64_t value = 0;
  bool operator==(const Superlative&) const = default;
};

/// Record tables; ties go to the smallest table id. `longest` measures rows.
struct Superlatives {
  std::optional<Superlative> widest;
  std::optional<Superlative> longest;
  std::optional<Superlative> most_characters;
  std::optional<Superlative> most_cells;
};

Json to_json(const Superlatives& s);

/// Pure digit strings such as "1" or "2021".
bool is_trivial_header(std::string_view text);

/// Title used when a table is listed in rankings.
std::string table_title(const ExtractedTable& table);

/// One pass over a stored corpus that collects every statistic and ranking.
/// Tables are read on `threads` threads (0: hardware concurrency) and the
/// per-thread tallies are merged, so the result does not depend on the
/// thread count.
class CorpusScan {
 public:
  /// Throws CorpusError when the corpus has no manifest. With `filters`,
  /// each table is filtered first and dropped tables are not counted.
  static CorpusScan run(const std::filesystem::path& root,
                        const std::optional<FilterConfig>& filters = std::nullopt,
                        unsigned threads = 0);

  const CorpusStats& stats() const { return stats_; }

  /// Most frequent sizes, ties by ascending (cols, rows).
  std::vector<SizeCount> size_histogram(std::size_t top_n) const;
  const std::map<int, std::size_t>& row_distribution() const { return rows_dist_; }
  const std::map<int, std::size_t>& column_distribution() const { return cols_dist_; }

  /// Header cell texts by frequency, ties in byte order. Empty header cells
  /// are not counted.
  std::vector<HeaderCount> header_frequency(std::size_t top_n, bool filter_trivial) const;

  /// Pages by number of tables with at least min_rows rows and min_cols
  /// columns; ties by title, then page id.
  std::vector<PageTableCount> table_rich_pages(std::size_t top_n, int min_rows,
                                               int min_cols) const;

  const Superlatives& superlatives() const { return superlatives_; }

  /// Writes stats.json, sizes.tsv, rows.tsv, columns.tsv, headers.tsv,
  /// headers_nontrivial.tsv, rich_pages.tsv, rich_pages_3x5.tsv and
  /// superlatives.json to `dir`.
  void write_reports(const std::filesystem::path& dir, std::size_t top_n = 10) const;

  struct TableDims {
    std::int64_t page_id = 0;
    int rows = 0;
    int cols = 0;
  };

 private:
  friend struct ScanAccumulator;

  CorpusStats stats_;
  std::map<std::pair<int, int>, std::size_t> sizes_;
  std::map<int, std::size_t> rows_dist_;
  std::map<int, std::size_t> cols_dist_;
  std::map<std::string, std::size_t> headers_;
  std::vector<TableDims> dims_;
  std::map<std::int64_t, std::string> page_titles_;
  Superlatives superlatives_;
};

CorpusStats compute_stats(const std::filesystem::path& root,
                          const std::optional<FilterConfig>& filters = std::nullopt);
std::vector<SizeCount> size_histogram(const std::filesystem::path& root, std::size_t top_n);
std::vector<HeaderCount> header_frequency(const std::filesystem::path& root, std::size_t top_n,
                                          bool filter_trivial);
std::vector<PageTableCount> table_rich_pages(const std::filesystem::path& root,
                                             std::size_t top_n, int min_rows, int min_cols);
Superlatives superlatives(const std::filesystem::path& root);

}  // namespace wikitables
