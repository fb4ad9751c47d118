#include <gtest/gtest.h>

#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <random>

#include "files.hpp"
#include "oracles.hpp"
#include "wikitables/checkpoint.hpp"
#include "wikitables/error.hpp"
#include "wikitables/json_io.hpp"
#include "wikitables/store.hpp"

using namespace wikitables;
using namespace wikitables::testing;
namespace fs = std::filesystem;

namespace {

ExtractedTable sample_table(std::int64_t page, int offset) {
  PlainTable t;
  t.page_id = page;
  t.offset = offset;
  t.page_title = "Страница";
  t.header_rows = 1;
  t.cells = {{"Город", "Население"}, {"Москва", "13 010 112"}, {"Омск, \"центр\"", "1 125 695"}};
  auto e = to_extracted(t);
  e.caption = "Города";
  e.context_before = {"до"};
  e.context_after = {"после", "таблицы"};
  return e;
}

CorpusManifest manifest(const std::string& date = "2021-09-01") {
  CorpusManifest m;
  m.format_version = 1;
  m.toolkit_version = "test";
  m.snapshot_date = date;
  m.created_at = Clock::now();
  return m;
}

}  // namespace

TEST(Store, WritesCommittedPairAndReadsItBack) {
  TempDir dir("store");
  CorpusStore store(dir.path(), false);
  store.ensure_manifest(manifest());
  const auto t = sample_table(1234567, 2);
  const auto paths = store.write_table(t, make_metadata(t, Clock::now(), "2021-09-01"));
  EXPECT_EQ(paths.csv, dir.path() / "tables" / "567" / "1234567_2.csv");
  EXPECT_TRUE(fs::exists(paths.json));
  EXPECT_EQ(store.list_tables(), std::vector<TableId>{t.table_id});
  const auto back = load_table(store, t.table_id);
  EXPECT_EQ(back.grid, t.grid);
  EXPECT_EQ(back.caption, t.caption);
  EXPECT_EQ(back.context_after, t.context_after);
  EXPECT_EQ(back.column_numeric, (std::vector<bool>{false, true}));
  const auto meta = store.read_metadata(t.table_id);
  EXPECT_EQ(meta.n_rows, 3);
  EXPECT_EQ(meta.n_cols, 2);
  EXPECT_EQ(meta.snapshot_date, "2021-09-01");
  EXPECT_EQ(read_file(paths.csv),
            "Город,Население\r\nМосква,13 010 112\r\n\"Омск, \"\"центр\"\"\",1 125 695\r\n");
}

TEST(Store, MetadataJsonRoundTrips) {
  const auto t = sample_table(5, 0);
  const auto meta = make_metadata(t, parse_timestamp("2021-09-13T10:00:00Z"), "2021-09-01");
  const Json j = to_json(meta);
  EXPECT_EQ(j["extracted_at"], "2021-09-13T10:00:00Z");
  EXPECT_EQ(table_metadata_from_json(j), meta);
}

TEST(Store, RejectsDuplicates) {
  TempDir dir("store");
  CorpusStore store(dir.path(), false);
  const auto t = sample_table(7, 0);
  store.write_table(t, make_metadata(t, Clock::now(), "d"));
  EXPECT_THROW(store.write_table(t, make_metadata(t, Clock::now(), "d")), DuplicateTable);
}

TEST(Store, ManifestMismatchIsRefused) {
  TempDir dir("store");
  CorpusStore store(dir.path(), false);
  store.ensure_manifest(manifest());
  EXPECT_NO_THROW(store.ensure_manifest(manifest()));
  EXPECT_THROW(store.ensure_manifest(manifest("2022-01-01")), CheckpointMismatch);
  auto other = manifest();
  other.filters.min_rows = 3;
  EXPECT_THROW(store.ensure_manifest(other), CheckpointMismatch);
  EXPECT_THROW(CorpusStore(dir / "none").read_manifest(), CorpusError);
}

TEST(Store, RecoverRemovesHalfWrittenPairs) {
  TempDir dir("store");
  CorpusStore store(dir.path(), false);
  const auto a = sample_table(1, 0), b = sample_table(1, 1), c = sample_table(2, 0);
  for (const auto* t : {&a, &b, &c}) store.write_table(*t, make_metadata(*t, Clock::now(), "d"));
  fs::remove(store.json_path(b.table_id));  // crash between the renames
  write_file(store.csv_path(c.table_id).parent_path() / ".2_1.csv.tmp", "x");
  EXPECT_EQ(store.list_tables(), (std::vector<TableId>{a.table_id, c.table_id}));
  EXPECT_EQ(store.recover(), 2u);
  EXPECT_FALSE(fs::exists(store.csv_path(b.table_id)));
  EXPECT_EQ(store.list_tables(), (std::vector<TableId>{a.table_id, c.table_id}));
}

TEST(Store, ClearPageOnlyTouchesThatPage) {
  TempDir dir("store");
  CorpusStore store(dir.path(), false);
  const auto a = sample_table(1001, 0), b = sample_table(1001, 1), c = sample_table(10011, 0),
             d = sample_table(2001, 0);
  for (const auto* t : {&a, &b, &c, &d}) store.write_table(*t, make_metadata(*t, Clock::now(), "d"));
  store.clear_page(1001);
  EXPECT_EQ(store.list_tables(), (std::vector<TableId>{d.table_id, c.table_id}));
}

TEST(Store, ShardNamesAndDates) {
  EXPECT_EQ(CorpusStore::shard_name(5), "005");
  EXPECT_EQ(CorpusStore::shard_name(123456), "456");
  EXPECT_TRUE(valid_date("2021-09-01"));
  EXPECT_FALSE(valid_date("2021-13-01"));
  EXPECT_FALSE(valid_date("2021-9-1"));
  EXPECT_EQ(format_timestamp(parse_timestamp("2021-09-13T01:02:03Z")), "2021-09-13T01:02:03Z");
}

TEST(Store, DiskFullLeavesNoPartialFiles) {
  TempDir dir("store");
  const auto t = sample_table(9, 0);
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    // Files may not grow past 16 bytes: the CSV write fails with EFBIG.
    signal(SIGXFSZ, SIG_IGN);
    rlimit lim{16, 16};
    setrlimit(RLIMIT_FSIZE, &lim);
    CorpusStore store(dir.path(), false);
    try {
      store.write_table(t, make_metadata(t, Clock::now(), "d"));
    } catch (const StoreError&) {
      _exit(0);
    } catch (...) {
      _exit(2);
    }
    _exit(1);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  CorpusStore store(dir.path(), false);
  EXPECT_TRUE(store.list_tables().empty());
  const fs::path shard = store.csv_path(t.table_id).parent_path();
  if (fs::exists(shard)) EXPECT_TRUE(fs::is_empty(shard));
}

TEST(Checkpoint, AppendsAndReloads) {
  TempDir dir("ckpt");
  const fs::path path = dir / "checkpoint.log";
  const CheckpointHeader h{"2021-09-01", 2};
  {
    CheckpointLog log(path, h, false);
    log.append({10, 3, PageStatus::done});
    log.append({11, 0, PageStatus::missing});
    log.append({10, 9, PageStatus::done});  // ignored
    log.append({12, 0, PageStatus::parse_error});
    EXPECT_EQ(log.size(), 3u);
  }
  const auto c = read_checkpoint(path, h);
  ASSERT_EQ(c.records.size(), 3u);
  EXPECT_EQ(c.records[0], (CheckpointRecord{10, 3, PageStatus::done}));
  EXPECT_EQ(c.records[2].status, PageStatus::parse_error);
  EXPECT_EQ(c.header, h);
  EXPECT_FALSE(c.torn_tail);
  EXPECT_EQ(c.valid_bytes, fs::file_size(path));
  CheckpointLog again(path, h, false);
  EXPECT_TRUE(again.contains(11));
  EXPECT_FALSE(again.contains(13));
}

TEST(Checkpoint, EveryTruncationLosesOnlyTheTornRecord) {
  TempDir dir("ckpt");
  const fs::path path = dir / "full.log";
  const CheckpointHeader h{"2021-09-01", 1};
  {
    CheckpointLog log(path, h, false);
    for (int i = 0; i < 6; ++i) log.append({100 + i, i, PageStatus::done});
  }
  const std::string full = read_file(path);
  std::vector<std::size_t> line_ends;
  for (std::size_t i = 0; i < full.size(); ++i)
    if (full[i] == '\n') line_ends.push_back(i + 1);
  for (std::size_t cut = 0; cut <= full.size(); ++cut) {
    const fs::path p = dir / "cut.log";
    write_file(p, full.substr(0, cut));
    const auto c = read_checkpoint(p, h);
    std::size_t whole = 0;
    for (auto e : line_ends) whole += e <= cut;
    const std::size_t records = whole == 0 ? 0 : whole - 1;
    ASSERT_EQ(c.records.size(), records) << "cut at " << cut;
    EXPECT_EQ(c.torn_tail, whole == 0 ? cut > 0 : cut != line_ends[whole - 1]);
    // Reopening drops the torn tail, and appends land on a clean line.
    {
      CheckpointLog log(p, h, false);
      log.append({999, 1, PageStatus::done});
    }
    const auto after = read_checkpoint(p, h);
    EXPECT_EQ(after.records.size(), records + 1);
    EXPECT_FALSE(after.torn_tail);
  }
}

TEST(Checkpoint, BadChecksumIsFatal) {
  TempDir dir("ckpt");
  const fs::path path = dir / "checkpoint.log";
  {
    CheckpointLog log(path, {"2021-09-01", 1}, false);
    log.append({1, 1, PageStatus::done});
  }
  std::string data = read_file(path);
  data[data.rfind("page\t1") + 5] = '7';
  write_file(path, data);
  EXPECT_THROW(read_checkpoint(path, std::nullopt), CheckpointError);
  EXPECT_THROW(CheckpointLog(path, {"2021-09-01", 1}, false), CheckpointError);
}

TEST(Checkpoint, MismatchedHeaderIsRefused) {
  TempDir dir("ckpt");
  const fs::path path = dir / "checkpoint.log";
  { CheckpointLog log(path, {"2021-09-01", 4}, false); }
  EXPECT_THROW(read_checkpoint(path, CheckpointHeader{"2021-09-02", 4}), CheckpointMismatch);
  EXPECT_THROW(read_checkpoint(path, CheckpointHeader{"2021-09-01", 1}), CheckpointMismatch);
  EXPECT_NO_THROW(read_checkpoint(path, std::nullopt));
  EXPECT_TRUE(read_checkpoint(dir / "missing.log", CheckpointHeader{"x", 1}).records.empty());
}

TEST(Checkpoint, ConcatenatedChunkLogsReadAsOne) {
  TempDir dir("ckpt");
  const CheckpointHeader h{"2021-09-01", 2};
  {
    CheckpointLog a(dir / "a.log", h, false);
    a.append({1, 1, PageStatus::done});
    CheckpointLog b(dir / "b.log", h, false);
    b.append({2, 0, PageStatus::missing});
  }
  write_file(dir / "all.log", read_file(dir / "a.log") + read_file(dir / "b.log"));
  const auto c = read_checkpoint(dir / "all.log", h);
  EXPECT_EQ(c.completed, (std::unordered_set<std::int64_t>{1, 2}));
}
