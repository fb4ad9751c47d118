#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wikitables {

using Clock = std::chrono::system_clock;

/// Identity of one wiki page. page_id is stable across snapshots, title is not.
struct PageRef {
  std::int64_t page_id = 0;
  std::string title;
  int ns = 0;

  bool operator==(const PageRef&) const = default;
};

enum class PageSource { api, dump };

struct RawPage {
  PageRef ref;
  std::string html;
  Clock::time_point fetched_at{};
  PageSource source = PageSource::api;
};

/// Surrogate table identity: page id plus 0-based document-order position.
struct TableId {
  std::int64_t page_id = 0;
  std::int32_t offset = 0;

  auto operator<=>(const TableId&) const = default;
  bool operator==(const TableId&) const = default;

  /// "<page_id>_<offset>", the file stem used in the corpus.
  std::string stem() const {
    return std::to_string(page_id) + "_" + std::to_string(offset);
  }
};

enum class CellOrigin { real, span_copy, pad };

struct Cell {
  std::string text;
  bool is_header = false;
  CellOrigin origin = CellOrigin::real;

  bool operator==(const Cell&) const = default;
};

/// Rectangular grid of cells; every row holds exactly n_cols() cells.
struct CellGrid {
  std::vector<std::vector<Cell>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return rows.empty() ? 0 : rows.front().size(); }
  bool rectangular() const {
    for (const auto& row : rows)
      if (row.size() != n_cols()) return false;
    return true;
  }
  const Cell& at(std::size_t r, std::size_t c) const { return rows[r][c]; }

  bool operator==(const CellGrid&) const = default;
};

struct ExtractedTable {
  TableId table_id;
  CellGrid grid;
  int header_rows = 0;
  std::optional<std::string> caption;
  std::vector<std::string> context_before;
  std::vector<std::string> context_after;
  std::string page_title;
  std::string url;
  std::vector<bool> column_numeric;

  bool operator==(const ExtractedTable&) const = default;
};

}  // namespace wikitables
