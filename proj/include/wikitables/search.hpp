#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wikitables/json_io.hpp"
#include "wikitables/store.hpp"

namespace wikitables {

/// Conjunctive metadata query. Unset fields do not constrain.
struct QuerySpec {
  std::optional<std::string> title_substring;
  std::optional<std::string> caption_substring;
  std::optional<int> min_rows;
  std::optional<int> max_rows;
  std::optional<int> min_cols;
  std::optional<int> max_cols;
  std::optional<bool> has_numeric_column;
  int limit = 50;
  int offset = 0;

  /// Throws ValidationError naming every offending field.
  void validate() const;
  bool matches(const TableMetadata& meta) const;
};

/// Builds a query from string parameters (HTTP query string, CLI); bad
/// numbers and unknown keys are reported as validation errors.
QuerySpec query_spec_from_params(const std::map<std::string, std::string>& params);
Json to_json(const QuerySpec& q);

struct SearchPage {
  std::vector<TableMetadata> items;
  /// Matches before paging.
  std::size_t total = 0;
  int limit = 0;
  int offset = 0;
};

Json to_json(const SearchPage& page);

/// Reads metadata documents only, in table id order. Substring tests are
/// case-insensitive on NFKC case-folded text.
SearchPage search(const std::filesystem::path& root, const QuerySpec& q);

}  // namespace wikitables
