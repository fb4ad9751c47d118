#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "wikitables/types.hpp"

namespace wikitables::testing {

/// Writes plain tables as a stored corpus (manifest, titles.tsv listing
/// `pages` pages, one committed pair per table) without fsync.
void write_corpus(const std::filesystem::path& root, const std::vector<PlainTable>& tables,
                  std::uint64_t pages, const std::string& snapshot_date = "2021-09-01");

/// Random mini-corpus: `pages` pages, about `tables` tables spread over them.
std::vector<PlainTable> random_corpus(std::mt19937_64& rng, int tables, std::uint64_t& pages);

/// Differences between two corpora, empty when they are equivalent.
///
/// Table CSVs and titles.tsv are compared byte for byte, metadata and the
/// manifest as JSON minus their timestamps, checkpoint logs as record sets
/// with the same snapshot date. reports/ is ignored. Leftover temp files
/// (".*" or "*.tmp") in either corpus count as differences.
std::vector<std::string> compare_corpora(const std::filesystem::path& a,
                                         const std::filesystem::path& b);

/// Merges chunk corpora by copying their folders into `dest` and
/// concatenating their checkpoint logs.
void merge_chunks(const std::vector<std::filesystem::path>& chunks,
                  const std::filesystem::path& dest);

/// Uncompressed ustar archive of (name, content) members, in order.
std::string make_tar(const std::vector<std::pair<std::string, std::string>>& members);

struct FixtureWiki {
  std::vector<std::pair<PageRef, std::string>> pages;
  std::size_t planted_tables = 0;
  std::map<std::int64_t, int> tables_per_page;
  /// Pages whose title contains "Чемпионат".
  std::size_t planted_title_pages = 0;
};

/// Deterministic 100-page wiki holding exactly 31 extractable tables.
FixtureWiki fixture_wiki();

/// Writes a wiki as a dump directory (manifest.tsv plus pages/<id>.html).
void write_dump_dir(const std::filesystem::path& dir,
                    const std::vector<std::pair<PageRef, std::string>>& pages);

/// Same content as one tar file.
void write_dump_tar(const std::filesystem::path& file,
                    const std::vector<std::pair<PageRef, std::string>>& pages);

}  // namespace wikitables::testing
