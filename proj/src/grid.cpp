#include "wikitables/grid.hpp"

#include <algorithm>
#include <optional>

namespace wikitables {

long parse_span(const std::string* attribute) {
  if (attribute == nullptr) return 1;
  std::size_t i = 0;
  const std::string& s = *attribute;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n')) ++i;
  bool negative = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) negative = s[i++] == '-';
  if (i >= s.size() || s[i] < '0' || s[i] > '9') return 1;
  long value = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    value = std::min(value * 10 + (s[i] - '0'), 1'000'000'000L);
    ++i;
  }
  return negative ? -value : value;
}

GridResult normalize_grid(const SourceTable& table) {
  GridResult result;
  const std::size_t n_rows = table.rows.size();
  std::vector<std::vector<std::optional<Cell>>> slots(n_rows);

  const auto clamp = [&](long span, const char* what, std::size_t r) {
    if (span >= 1 && span <= kMaxSpan) return static_cast<std::size_t>(span);
    result.warnings.push_back(std::string(what) + " " + std::to_string(span) +
                              " in row " + std::to_string(r) + " clamped to 1");
    return std::size_t{1};
  };

  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t col = 0;
    for (const auto& src : table.rows[r]) {
      auto& row = slots[r];
      while (col < row.size() && row[col].has_value()) ++col;
      const std::size_t rowspan = clamp(src.rowspan, "rowspan", r);
      const std::size_t colspan = clamp(src.colspan, "colspan", r);
      const std::size_t last_row = std::min(n_rows, r + rowspan);
      for (std::size_t rr = r; rr < last_row; ++rr) {
        auto& target = slots[rr];
        if (target.size() < col + colspan) target.resize(col + colspan);
        for (std::size_t cc = col; cc < col + colspan; ++cc) {
          if (target[cc].has_value()) continue;
          const bool origin = rr == r && cc == col;
          target[cc] = Cell{src.text, src.is_header,
                            origin ? CellOrigin::real : CellOrigin::span_copy};
        }
      }
      col += colspan;
    }
  }

  std::size_t n_cols = 0;
  for (const auto& row : slots) n_cols = std::max(n_cols, row.size());

  result.grid.rows.reserve(n_rows);
  for (auto& row : slots) {
    auto& out = result.grid.rows.emplace_back();
    out.reserve(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c < row.size() && row[c].has_value())
        out.push_back(std::move(*row[c]));
      else
        out.push_back(Cell{"", false, CellOrigin::pad});
    }
  }
  return result;
}

int detect_header(const CellGrid& grid) {
  int header_rows = 0;
  for (const auto& row : grid.rows) {
    bool any = false;
    bool all = true;
    for (const auto& cell : row) {
      if (cell.origin == CellOrigin::pad) continue;
      any = true;
      all = all && cell.is_header;
    }
    if (!any || !all) break;
    ++header_rows;
  }
  return header_rows;
}

}  // namespace wikitables
