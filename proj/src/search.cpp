#include "wikitables/search.hpp"

#include <algorithm>
#include <charconv>

#include "wikitables/error.hpp"
#include "wikitables/unicode.hpp"

namespace wikitables {

namespace {

bool contains_folded(const std::string& haystack, const std::string& folded_needle) {
  return unicode::fold_case(haystack).find(folded_needle) != std::string::npos;
}

}  // namespace

void QuerySpec::validate() const {
  std::vector<std::string> bad;
  if (limit < 1) bad.emplace_back("limit");
  if (offset < 0) bad.emplace_back("offset");
  for (const auto& [name, value] : {std::pair{"min_rows", &min_rows}, std::pair{"max_rows", &max_rows},
                                    std::pair{"min_cols", &min_cols}, std::pair{"max_cols", &max_cols}})
    if (*value && **value < 0) bad.emplace_back(name);
  if (min_rows && max_rows && *min_rows > *max_rows) {
    bad.emplace_back("min_rows");
    bad.emplace_back("max_rows");
  }
  if (min_cols && max_cols && *min_cols > *max_cols) {
    bad.emplace_back("min_cols");
    bad.emplace_back("max_cols");
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    std::string what = "invalid query:";
    for (const auto& f : bad) what += " " + f;
    throw ValidationError(what, bad);
  }
}

bool QuerySpec::matches(const TableMetadata& meta) const {
  if (min_rows && meta.n_rows < *min_rows) return false;
  if (max_rows && meta.n_rows > *max_rows) return false;
  if (min_cols && meta.n_cols < *min_cols) return false;
  if (max_cols && meta.n_cols > *max_cols) return false;
  if (has_numeric_column) {
    const bool any = std::find(meta.column_numeric.begin(), meta.column_numeric.end(), true) !=
                     meta.column_numeric.end();
    if (any != *has_numeric_column) return false;
  }
  if (title_substring &&
      !contains_folded(meta.page_title, unicode::fold_case(*title_substring)))
    return false;
  if (caption_substring &&
      !(meta.caption && contains_folded(*meta.caption, unicode::fold_case(*caption_substring))))
    return false;
  return true;
}

QuerySpec query_spec_from_params(const std::map<std::string, std::string>& params) {
  QuerySpec q;
  std::vector<std::string> bad;
  const auto integer = [&](const std::string& key, const std::string& text) -> std::optional<int> {
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
      bad.push_back(key);
      return std::nullopt;
    }
    return value;
  };
  for (const auto& [key, value] : params) {
    if (key == "title" || key == "title_substring") {
      q.title_substring = value;
    } else if (key == "caption" || key == "caption_substring") {
      q.caption_substring = value;
    } else if (key == "min_rows") {
      q.min_rows = integer(key, value);
    } else if (key == "max_rows") {
      q.max_rows = integer(key, value);
    } else if (key == "min_cols") {
      q.min_cols = integer(key, value);
    } else if (key == "max_cols") {
      q.max_cols = integer(key, value);
    } else if (key == "has_numeric_column") {
      if (value == "true" || value == "1") {
        q.has_numeric_column = true;
      } else if (value == "false" || value == "0") {
        q.has_numeric_column = false;
      } else {
        bad.push_back(key);
      }
    } else if (key == "limit") {
      if (const auto v = integer(key, value)) q.limit = *v;
    } else if (key == "offset") {
      if (const auto v = integer(key, value)) q.offset = *v;
    } else {
      bad.push_back(key);
    }
  }
  // Range problems are reported together with the unparsable fields.
  try {
    q.validate();
  } catch (const ValidationError& e) {
    bad.insert(bad.end(), e.fields().begin(), e.fields().end());
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    std::string what = "invalid query:";
    for (const auto& f : bad) what += " " + f;
    throw ValidationError(what, bad);
  }
  return q;
}

Json to_json(const QuerySpec& q) {
  const auto opt = [](const auto& v) { return v ? Json(*v) : Json(); };
  Json j;
  j["title_substring"] = opt(q.title_substring);
  j["caption_substring"] = opt(q.caption_substring);
  j["min_rows"] = opt(q.min_rows);
  j["max_rows"] = opt(q.max_rows);
  j["min_cols"] = opt(q.min_cols);
  j["max_cols"] = opt(q.max_cols);
  j["has_numeric_column"] = opt(q.has_numeric_column);
  j["limit"] = q.limit;
  j["offset"] = q.offset;
  return j;
}

Json to_json(const SearchPage& page) {
  Json j;
  j["total"] = page.total;
  j["limit"] = page.limit;
  j["offset"] = page.offset;
  Json items = Json::array();
  for (const auto& meta : page.items) items.push_back(to_json(meta));
  j["items"] = std::move(items);
  return j;
}

SearchPage search(const std::filesystem::path& root, const QuerySpec& q) {
  q.validate();
  const CorpusStore store(root, false);
  if (!store.has_manifest())
    throw CorpusError("no corpus at " + root.string() + " (manifest.json is missing)");
  SearchPage page;
  page.limit = q.limit;
  page.offset = q.offset;
  const auto first = static_cast<std::size_t>(q.offset);
  const auto last = first + static_cast<std::size_t>(q.limit);
  for (const auto& id : store.list_tables()) {
    const TableMetadata meta = store.read_metadata(id);
    if (!q.matches(meta)) continue;
    if (page.total >= first && page.total < last) page.items.push_back(meta);
    ++page.total;
  }
  return page;
}

}  // namespace wikitables
