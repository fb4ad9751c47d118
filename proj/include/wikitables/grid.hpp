#pragma once

#include <string>
#include <vector>

#include "wikitables/types.hpp"

namespace wikitables {

/// One td/th as written in the markup, before span expansion.
struct SourceCell {
  std::string text;
  bool is_header = false;
  long rowspan = 1;
  long colspan = 1;
};

/// A table as a list of markup rows (tr elements) in document order.
struct SourceTable {
  std::vector<std::vector<SourceCell>> rows;
};

struct GridResult {
  CellGrid grid;
  std::vector<std::string> warnings;
};

inline constexpr long kMaxSpan = 1000;

/// Parses a rowspan/colspan attribute the way browsers do: leading digits,
/// anything else ignored; missing or non-numeric values give 1.
long parse_span(const std::string* attribute);

/// Expands spans into a rectangular grid.
///
/// Each source cell is placed at the first free column of its row and copied
/// (origin span_copy) into every other position it covers. Positions already
/// claimed by an earlier cell keep their occupant. Row spans are clipped at
/// the last markup row. Spans <= 0 or > kMaxSpan are treated as 1 with a
/// warning. Short rows are right-padded with empty pad cells.
GridResult normalize_grid(const SourceTable& table);

/// Number of leading rows whose non-pad cells are all header cells (and
/// which contain at least one non-pad cell).
int detect_header(const CellGrid& grid);

}  // namespace wikitables
