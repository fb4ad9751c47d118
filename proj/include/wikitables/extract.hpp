#pragma once

#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "wikitables/grid.hpp"
#include "wikitables/html.hpp"
#include "wikitables/types.hpp"

namespace wikitables {

inline constexpr std::size_t kContextWords = 200;

struct ExtractOptions {
  /// Prefix joined with the encoded page title to form the table URL.
  std::string article_base_url = "https://ru.wikipedia.org/wiki/";
  /// Tables whose class attribute matches are not emitted. They still
  /// consume an offset.
  std::optional<std::regex> exclude_class;
};

struct ExtractWarning {
  std::int32_t offset = 0;
  std::string message;
};

struct ExtractResult {
  std::vector<ExtractedTable> tables;
  std::vector<ExtractWarning> warnings;
  /// Number of table elements in the page, emitted or not.
  std::int32_t tables_seen = 0;
};

/// Throws HtmlError when the page cannot be parsed at all.
ExtractResult extract_tables(const RawPage& page, const ExtractOptions& options = {});

/// Visible cell text: markup already stripped by the caller; collapses
/// whitespace, drops control characters and "[n]" footnote markers.
std::string normalize_cell_text(std::string_view text);

/// "<base><Title_with_underscores>" with the title percent-encoded like
/// MediaWiki does.
std::string article_url(std::string_view base, std::string_view title);

struct ContextWindow {
  std::vector<std::string> before;
  std::vector<std::string> after;
};

/// Word flow of a parsed page, split into sections at h1-h6 headings, with
/// the flow position of every table. Text inside tables is not part of the
/// flow; a nested table sits at the position of its outermost table.
class PageContext {
 public:
  explicit PageContext(const html::Document& doc);

  std::size_t table_count() const { return markers_.size(); }
  /// Table element node indices in document order of their opening tags.
  const std::vector<std::size_t>& table_nodes() const { return table_nodes_; }

  /// Up to `limit` words on either side of table `offset`, never crossing a
  /// section heading.
  ContextWindow around(std::size_t offset, std::size_t limit = kContextWords) const;

 private:
  struct Marker {
    std::size_t section = 0;
    std::size_t word = 0;
  };

  void walk(const html::Document& doc, std::size_t index);
  void flush();

  std::vector<std::vector<std::string>> sections_;
  std::vector<Marker> markers_;
  std::vector<std::size_t> table_nodes_;
  std::string pending_;
  int table_depth_ = 0;
  int heading_depth_ = 0;
  Marker outer_marker_;
};

/// Rows and cells of one table element, excluding nested tables.
SourceTable read_source_table(const html::Document& doc, std::size_t table_node);

}  // namespace wikitables
