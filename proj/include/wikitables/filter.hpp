#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wikitables/types.hpp"

namespace wikitables {

/// Per-class code point counts of one string.
///
/// Classes: cyrillic is U+0400..U+052F, latin is ASCII A-Z/a-z, digits are
/// ASCII 0-9, alphabetic_other is any other Unicode letter, whitespace is the
/// Unicode White_Space property, and everything else is non_alpha_non_ws.
struct CharClassProfile {
  std::size_t total = 0;
  std::size_t cyrillic = 0;
  std::size_t latin = 0;
  std::size_t digits = 0;
  std::size_t alphabetic_other = 0;
  std::size_t non_alpha_non_ws = 0;
  std::size_t whitespace = 0;

  CharClassProfile& operator+=(const CharClassProfile& other);
  bool operator==(const CharClassProfile&) const = default;
};

CharClassProfile classify_chars(std::string_view text);

/// Optional sign, digits (thousands groups separated by a single space, NBSP,
/// thin or narrow no-break space), optional '.'/',' fraction, optional '%'.
bool is_numeric_cell(std::string_view text);

/// Empty, or one of the placeholders "-", "–", "—", "n/a".
bool is_null_cell(std::string_view text);

/// At least one digit or one non-letter, non-whitespace character.
bool is_nonstring_cell(const CharClassProfile& profile);

/// Letters present and all of them Latin / all of them Cyrillic.
bool is_latin_only_cell(const CharClassProfile& profile);
bool is_cyrillic_only_cell(const CharClassProfile& profile);

// Grid predicates shared by the filter and the corpus statistics. Column
// predicates look at data cells only (rows at index >= header_rows).

bool row_is_mostly_null(std::span<const Cell> row, double threshold);
bool column_is_mostly_null(const CellGrid& grid, std::size_t col,
                           std::size_t header_rows, double threshold);
bool column_is_latin_only(const CellGrid& grid, std::size_t col,
                          std::size_t header_rows);
bool column_is_cyrillic_only(const CellGrid& grid, std::size_t col,
                             std::size_t header_rows);
bool column_is_numeric_only(const CellGrid& grid, std::size_t col,
                            std::size_t header_rows);

std::vector<bool> numeric_columns(const CellGrid& grid, std::size_t header_rows);

/// cyrillic / (cyrillic + latin + digits + alphabetic_other) over every cell;
/// 0 when the denominator is 0.
double cyrillic_ratio(const CellGrid& grid);

struct FilterConfig {
  double min_cyrillic_ratio = 0.0;
  bool drop_latin_only_columns = false;
  bool drop_numeric_only_columns = false;
  bool drop_mostly_null_rows = false;
  bool drop_mostly_null_columns = false;
  double null_threshold = 0.7;
  int min_rows = 0;
  int min_cols = 0;

  bool operator==(const FilterConfig&) const = default;

  bool is_identity() const { return *this == FilterConfig{}; }

  /// Throws ValidationError naming every out-of-range field.
  void validate() const;
};

/// Row, column and table filtering in a fixed order:
///   1. mostly-NULL data rows, 2. mostly-NULL columns, 3. Latin-only columns,
///   4. numeric-only columns, 5. table-level Cyrillic ratio and minimum size.
/// Header rows are never dropped on their own. Returns nullopt when the table
/// is dropped or nothing is left of it.
std::optional<ExtractedTable> apply_filters(const ExtractedTable& table,
                                            const FilterConfig& cfg);

}  // namespace wikitables
