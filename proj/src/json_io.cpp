#include "wikitables/json_io.hpp"

#include <set>

#include "wikitables/error.hpp"

namespace wikitables {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known,
                    const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + " must be a JSON object", {what});
  std::vector<std::string> unknown;
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) unknown.push_back(key);
  if (!unknown.empty()) {
    std::string msg = "unknown " + what + " field(s):";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg, unknown);
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out, std::vector<std::string>& bad) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    bad.emplace_back(key);
  }
}

}  // namespace

Json to_json(const FilterConfig& cfg) {
  return Json{{"min_cyrillic_ratio", cfg.min_cyrillic_ratio},
              {"drop_latin_only_columns", cfg.drop_latin_only_columns},
              {"drop_numeric_only_columns", cfg.drop_numeric_only_columns},
              {"drop_mostly_null_rows", cfg.drop_mostly_null_rows},
              {"drop_mostly_null_columns", cfg.drop_mostly_null_columns},
              {"null_threshold", cfg.null_threshold},
              {"min_rows", cfg.min_rows},
              {"min_cols", cfg.min_cols}};
}

FilterConfig filter_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"min_cyrillic_ratio", "drop_latin_only_columns",
                  "drop_numeric_only_columns", "drop_mostly_null_rows",
                  "drop_mostly_null_columns", "null_threshold", "min_rows", "min_cols"},
                 "filters");
  FilterConfig cfg;
  std::vector<std::string> bad;
  read_field(j, "min_cyrillic_ratio", cfg.min_cyrillic_ratio, bad);
  read_field(j, "drop_latin_only_columns", cfg.drop_latin_only_columns, bad);
  read_field(j, "drop_numeric_only_columns", cfg.drop_numeric_only_columns, bad);
  read_field(j, "drop_mostly_null_rows", cfg.drop_mostly_null_rows, bad);
  read_field(j, "drop_mostly_null_columns", cfg.drop_mostly_null_columns, bad);
  read_field(j, "null_threshold", cfg.null_threshold, bad);
  read_field(j, "min_rows", cfg.min_rows, bad);
  read_field(j, "min_cols", cfg.min_cols, bad);
  if (!bad.empty()) throw ValidationError("filters: wrongly typed field(s)", bad);
  cfg.validate();
  return cfg;
}

Json to_json(const TableMetadata& meta) {
  Json column_numeric = Json::array();
  for (const bool b : meta.column_numeric) column_numeric.push_back(b);
  return Json{{"table_id", {{"page_id", meta.table_id.page_id},
                            {"offset", meta.table_id.offset}}},
              {"url", meta.url},
              {"page_title", meta.page_title},
              {"caption", meta.caption ? Json(*meta.caption) : Json(nullptr)},
              {"context_before", meta.context_before},
              {"context_after", meta.context_after},
              {"n_rows", meta.n_rows},
              {"n_cols", meta.n_cols},
              {"column_numeric", column_numeric},
              {"header_rows", meta.header_rows},
              {"extracted_at", format_timestamp(meta.extracted_at)},
              {"snapshot_date", meta.snapshot_date}};
}

TableMetadata table_metadata_from_json(const Json& j) {
  try {
    TableMetadata meta;
    meta.table_id.page_id = j.at("table_id").at("page_id").get<std::int64_t>();
    meta.table_id.offset = j.at("table_id").at("offset").get<std::int32_t>();
    meta.url = j.at("url").get<std::string>();
    meta.page_title = j.at("page_title").get<std::string>();
    if (!j.at("caption").is_null()) meta.caption = j.at("caption").get<std::string>();
    meta.context_before = j.at("context_before").get<std::vector<std::string>>();
    meta.context_after = j.at("context_after").get<std::vector<std::string>>();
    meta.n_rows = j.at("n_rows").get<int>();
    meta.n_cols = j.at("n_cols").get<int>();
    for (const auto& b : j.at("column_numeric")) meta.column_numeric.push_back(b.get<bool>());
    meta.header_rows = j.at("header_rows").get<int>();
    meta.extracted_at = parse_timestamp(j.at("extracted_at").get<std::string>());
    meta.snapshot_date = j.at("snapshot_date").get<std::string>();
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("malformed table metadata: ") + e.what());
  }
}

Json to_json(const CorpusManifest& m) {
  return Json{{"format_version", m.format_version},
              {"toolkit_version", m.toolkit_version},
              {"snapshot_date", m.snapshot_date},
              {"filters", to_json(m.filters)},
              {"created_at", format_timestamp(m.created_at)}};
}

CorpusManifest corpus_manifest_from_json(const Json& j) {
  try {
    CorpusManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
    m.snapshot_date = j.at("snapshot_date").get<std::string>();
    m.filters = filter_config_from_json(j.at("filters"));
    m.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("malformed manifest: ") + e.what());
  }
}

std::string dump_document(const Json& j) {
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

}  // namespace wikitables
