#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wikitables::csv {

using Rows = std::vector<std::vector<std::string>>;

/// RFC 4180: CRLF after every record, fields quoted when they contain a
/// comma, quote, CR or LF; embedded quotes doubled.
std::string write(const Rows& rows);

/// Inverse of write(). Accepts LF or CRLF record ends. Throws Error on an
/// unterminated quoted field or stray characters after a closing quote.
Rows read(std::string_view text);

}  // namespace wikitables::csv
