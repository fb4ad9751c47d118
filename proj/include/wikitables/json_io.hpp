#pragma once

#include "json.hpp"

#include "wikitables/filter.hpp"
#include "wikitables/store.hpp"

namespace wikitables {

using Json = nlohmann::ordered_json;

Json to_json(const FilterConfig& cfg);
/// Missing fields keep their defaults; unknown fields are rejected.
FilterConfig filter_config_from_json(const Json& j);

Json to_json(const TableMetadata& meta);
TableMetadata table_metadata_from_json(const Json& j);

Json to_json(const CorpusManifest& manifest);
CorpusManifest corpus_manifest_from_json(const Json& j);

/// Stable pretty-printed form with a trailing newline; non-ASCII kept as UTF-8.
std::string dump_document(const Json& j);

}  // namespace wikitables
