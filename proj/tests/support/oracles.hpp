#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wikitables/grid.hpp"
#include "wikitables/types.hpp"

namespace wikitables::testing {

// Reference implementations written without the library's helpers, used to
// cross-check it on random inputs.

/// Occupancy-matrix span expansion over a fixed-size board.
CellGrid oracle_expand(const SourceTable& table);

SourceTable random_source_table(std::mt19937_64& rng);

/// Plain table as the statistics oracle sees it.
struct PlainTable {
  std::int64_t page_id = 0;
  std::int32_t offset = 0;
  std::string page_title;
  int header_rows = 0;
  std::vector<std::vector<std::string>> cells;
};

struct NaiveStats {
  std::uint64_t pages = 0, tables = 0, rows = 0, cols = 0, cells = 0;
  std::uint64_t chars = 0, cyrillic = 0, latin = 0;
  std::uint64_t nonstring = 0, null_rows = 0, null_cols = 0;
  std::uint64_t cyr_cols = 0, lat_cols = 0, num_cols = 0;

  double avg_cells_per_table() const;
  double avg_tables_per_page() const;
  double avg_cells_per_row() const;
  double avg_cells_per_column() const;
  double avg_chars_per_cell() const;
  double avg_cyrillic_per_cell() const;
  double avg_latin_per_cell() const;
  double pct_nonstring() const;
  double pct_null_rows() const;
  double pct_null_cols() const;
  double pct_cyr_cols() const;
  double pct_lat_cols() const;
  double pct_num_cols() const;
};

NaiveStats naive_stats(const std::vector<PlainTable>& tables, std::uint64_t pages);

// Cell-level reference predicates.
bool naive_is_null(const std::string& text);
bool naive_is_numeric(const std::string& text);

/// Random cell text drawn from Cyrillic, Latin, numeric, placeholder and
/// mixed samples.
std::string random_cell(std::mt19937_64& rng);

/// Random table of up to max_rows x max_cols cells.
PlainTable random_plain_table(std::mt19937_64& rng, int max_rows = 10, int max_cols = 7);

ExtractedTable to_extracted(const PlainTable& t);

}  // namespace wikitables::testing
