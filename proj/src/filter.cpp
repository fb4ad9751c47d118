#include "wikitables/filter.hpp"

#include <algorithm>

#include "wikitables/error.hpp"
#include "wikitables/unicode.hpp"

namespace wikitables {

namespace {

bool is_group_separator(char32_t cp) {
  return cp == U' ' || cp == 0x00A0 || cp == 0x2009 || cp == 0x202F;
}

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

std::u32string decode(std::string_view text) {
  std::u32string out;
  std::size_t pos = 0;
  while (pos < text.size()) out.push_back(unicode::next_code_point(text, pos));
  return out;
}

std::u32string_view trim(std::u32string_view s) {
  while (!s.empty() && unicode::is_whitespace(s.front())) s.remove_prefix(1);
  while (!s.empty() && unicode::is_whitespace(s.back())) s.remove_suffix(1);
  return s;
}

template <typename Pred>
bool column_all_non_null(const CellGrid& grid, std::size_t col,
                         std::size_t header_rows, Pred pred) {
  bool any = false;
  for (std::size_t r = header_rows; r < grid.n_rows(); ++r) {
    const auto& text = grid.at(r, col).text;
    if (is_null_cell(text)) continue;
    if (!pred(text)) return false;
    any = true;
  }
  return any;
}

CellGrid select(const CellGrid& grid, const std::vector<std::size_t>& rows,
                const std::vector<std::size_t>& cols) {
  CellGrid out;
  out.rows.reserve(rows.size());
  for (auto r : rows) {
    auto& row = out.rows.emplace_back();
    row.reserve(cols.size());
    for (auto c : cols) row.push_back(grid.at(r, c));
  }
  return out;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

template <typename Drop>
CellGrid drop_columns(const CellGrid& grid, Drop drop) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < grid.n_cols(); ++c)
    if (!drop(c)) keep.push_back(c);
  if (keep.size() == grid.n_cols()) return grid;
  if (keep.empty()) return CellGrid{};
  return select(grid, iota(grid.n_rows()), keep);
}

}  // namespace

CharClassProfile& CharClassProfile::operator+=(const CharClassProfile& o) {
  total += o.total;
  cyrillic += o.cyrillic;
  latin += o.latin;
  digits += o.digits;
  alphabetic_other += o.alphabetic_other;
  non_alpha_non_ws += o.non_alpha_non_ws;
  whitespace += o.whitespace;
  return *this;
}

CharClassProfile classify_chars(std::string_view text) {
  CharClassProfile p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = unicode::next_code_point(text, pos);
    ++p.total;
    if (cp >= 0x0400 && cp <= 0x052F) {
      ++p.cyrillic;
    } else if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) {
      ++p.latin;
    } else if (is_ascii_digit(cp)) {
      ++p.digits;
    } else if (unicode::is_whitespace(cp)) {
      ++p.whitespace;
    } else if (unicode::is_letter(cp)) {
      ++p.alphabetic_other;
    } else {
      ++p.non_alpha_non_ws;
    }
  }
  return p;
}

bool is_numeric_cell(std::string_view text) {
  const std::u32string decoded = decode(text);
  const std::u32string_view s = trim(decoded);
  std::size_t i = 0;
  const auto digits_from = [&](std::size_t at) {
    std::size_t n = 0;
    while (at + n < s.size() && is_ascii_digit(s[at + n])) ++n;
    return n;
  };

  if (i < s.size() && (s[i] == U'+' || s[i] == U'-' || s[i] == 0x2212)) ++i;
  const std::size_t lead = digits_from(i);
  if (lead == 0) return false;
  i += lead;
  while (i < s.size() && is_group_separator(s[i])) {
    if (digits_from(i + 1) != 3) return false;
    i += 4;
  }
  if (i < s.size() && (s[i] == U'.' || s[i] == U',')) {
    const std::size_t frac = digits_from(i + 1);
    if (frac == 0) return false;
    i += 1 + frac;
  }
  if (i < s.size() && s[i] == U'%') ++i;
  return i == s.size();
}

bool is_null_cell(std::string_view text) {
  const std::u32string decoded = decode(text);
  const std::u32string_view s = trim(decoded);
  if (s.empty()) return true;
  if (s.size() == 1) return s[0] == U'-' || s[0] == 0x2013 || s[0] == 0x2014;
  if (s.size() == 3) {
    const auto lower = [](char32_t c) {
      return (c >= U'A' && c <= U'Z') ? c + 32 : c;
    };
    return lower(s[0]) == U'n' && s[1] == U'/' && lower(s[2]) == U'a';
  }
  return false;
}

bool is_nonstring_cell(const CharClassProfile& p) {
  return p.non_alpha_non_ws >= 1 || p.digits >= 1;
}

bool is_latin_only_cell(const CharClassProfile& p) {
  return p.latin > 0 && p.cyrillic == 0 && p.alphabetic_other == 0;
}

bool is_cyrillic_only_cell(const CharClassProfile& p) {
  return p.cyrillic > 0 && p.latin == 0 && p.alphabetic_other == 0;
}

bool row_is_mostly_null(std::span<const Cell> row, double threshold) {
  if (row.empty()) return false;
  const auto nulls = std::count_if(row.begin(), row.end(), [](const Cell& c) {
    return is_null_cell(c.text);
  });
  return static_cast<double>(nulls) / static_cast<double>(row.size()) > threshold;
}

bool column_is_mostly_null(const CellGrid& grid, std::size_t col,
                           std::size_t header_rows, double threshold) {
  if (grid.n_rows() <= header_rows) return false;
  std::size_t nulls = 0;
  for (std::size_t r = header_rows; r < grid.n_rows(); ++r)
    if (is_null_cell(grid.at(r, col).text)) ++nulls;
  const auto data_rows = grid.n_rows() - header_rows;
  return static_cast<double>(nulls) / static_cast<double>(data_rows) > threshold;
}

bool column_is_latin_only(const CellGrid& grid, std::size_t col,
                          std::size_t header_rows) {
  return column_all_non_null(grid, col, header_rows, [](const std::string& t) {
    return is_latin_only_cell(classify_chars(t));
  });
}

bool column_is_cyrillic_only(const CellGrid& grid, std::size_t col,
                             std::size_t header_rows) {
  return column_all_non_null(grid, col, header_rows, [](const std::string& t) {
    return is_cyrillic_only_cell(classify_chars(t));
  });
}

bool column_is_numeric_only(const CellGrid& grid, std::size_t col,
                            std::size_t header_rows) {
  return column_all_non_null(grid, col, header_rows,
                             [](const std::string& t) { return is_numeric_cell(t); });
}

std::vector<bool> numeric_columns(const CellGrid& grid, std::size_t header_rows) {
  std::vector<bool> out(grid.n_cols());
  for (std::size_t c = 0; c < grid.n_cols(); ++c)
    out[c] = column_is_numeric_only(grid, c, header_rows);
  return out;
}

double cyrillic_ratio(const CellGrid& grid) {
  CharClassProfile sum;
  for (const auto& row : grid.rows)
    for (const auto& cell : row) sum += classify_chars(cell.text);
  const auto denom = sum.cyrillic + sum.latin + sum.digits + sum.alphabetic_other;
  if (denom == 0) return 0.0;
  return static_cast<double>(sum.cyrillic) / static_cast<double>(denom);
}

void FilterConfig::validate() const {
  std::vector<std::string> bad;
  if (!(min_cyrillic_ratio >= 0.0 && min_cyrillic_ratio <= 1.0))
    bad.emplace_back("min_cyrillic_ratio");
  if (!(null_threshold > 0.0 && null_threshold <= 1.0))
    bad.emplace_back("null_threshold");
  if (min_rows < 0) bad.emplace_back("min_rows");
  if (min_cols < 0) bad.emplace_back("min_cols");
  if (!bad.empty()) {
    std::string what = "invalid filter config:";
    for (const auto& f : bad) what += " " + f;
    throw ValidationError(what, bad);
  }
}

std::optional<ExtractedTable> apply_filters(const ExtractedTable& table,
                                            const FilterConfig& cfg) {
  const auto header_rows = static_cast<std::size_t>(table.header_rows);
  CellGrid grid = table.grid;

  if (cfg.drop_mostly_null_rows) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < grid.n_rows(); ++r)
      if (r < header_rows || !row_is_mostly_null(grid.rows[r], cfg.null_threshold))
        keep.push_back(r);
    if (keep.size() != grid.n_rows()) grid = select(grid, keep, iota(grid.n_cols()));
  }
  if (cfg.drop_mostly_null_columns) {
    grid = drop_columns(grid, [&](std::size_t c) {
      return column_is_mostly_null(grid, c, header_rows, cfg.null_threshold);
    });
  }
  if (cfg.drop_latin_only_columns) {
    grid = drop_columns(grid, [&](std::size_t c) {
      return column_is_latin_only(grid, c, header_rows);
    });
  }
  if (cfg.drop_numeric_only_columns) {
    grid = drop_columns(grid, [&](std::size_t c) {
      return column_is_numeric_only(grid, c, header_rows);
    });
  }

  if (grid.n_rows() == 0 || grid.n_cols() == 0) return std::nullopt;
  if (cyrillic_ratio(grid) < cfg.min_cyrillic_ratio) return std::nullopt;
  if (grid.n_rows() < static_cast<std::size_t>(cfg.min_rows) ||
      grid.n_cols() < static_cast<std::size_t>(cfg.min_cols))
    return std::nullopt;

  ExtractedTable out = table;
  out.grid = std::move(grid);
  out.header_rows = static_cast<int>(std::min(header_rows, out.grid.n_rows()));
  out.column_numeric = numeric_columns(out.grid, static_cast<std::size_t>(out.header_rows));
  return out;
}

}  // namespace wikitables
