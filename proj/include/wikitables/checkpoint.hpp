#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wikitables {

enum class PageStatus { done, missing, parse_error };

std::string_view to_string(PageStatus status);
std::optional<PageStatus> parse_page_status(std::string_view text);

struct CheckpointRecord {
  std::int64_t page_id = 0;
  int table_count = 0;
  PageStatus status = PageStatus::done;

  bool operator==(const CheckpointRecord&) const = default;
};

/// Identifies the job a log belongs to. Logs of different chunks of one job
/// share a header and may be concatenated.
struct CheckpointHeader {
  std::string snapshot_date;
  int chunk_count = 1;

  bool operator==(const CheckpointHeader&) const = default;
};

struct CheckpointContents {
  /// First header of the log, if any.
  std::optional<CheckpointHeader> header;
  std::vector<CheckpointRecord> records;
  std::unordered_set<std::int64_t> completed;
  /// Length of the prefix made of whole, checksummed lines.
  std::uint64_t valid_bytes = 0;
  bool torn_tail = false;
};

/// Reads a checkpoint log. Every line is "<payload>\t<crc32>\n"; a final line
/// without its newline is a torn append and is ignored. A missing file reads
/// as empty. Throws CheckpointMismatch when a header differs from `expect`
/// and CheckpointError when a complete line fails its checksum.
CheckpointContents read_checkpoint(const std::filesystem::path& path,
                                   const std::optional<CheckpointHeader>& expect);

/// Page ids with a durable record of any status.
std::unordered_set<std::int64_t> load_checkpoint(
    const std::filesystem::path& path, const std::optional<CheckpointHeader>& expect);

/// Single-writer append handle. Opening cuts off a torn tail and writes the
/// header to an empty log; append() returns only after the record is on disk.
class CheckpointLog {
 public:
  CheckpointLog(const std::filesystem::path& path, CheckpointHeader header,
                bool sync = true);
  ~CheckpointLog();
  CheckpointLog(const CheckpointLog&) = delete;
  CheckpointLog& operator=(const CheckpointLog&) = delete;

  bool contains(std::int64_t page_id) const;
  std::size_t size() const;
  std::unordered_set<std::int64_t> completed() const;

  /// No-op for a page that already has a record.
  void append(const CheckpointRecord& record);

 private:
  void write_line(const std::string& payload);

  std::filesystem::path path_;
  CheckpointHeader header_;
  bool sync_;
  int fd_ = -1;
  mutable std::mutex mutex_;
  std::unordered_set<std::int64_t> completed_;
};

}  // namespace wikitables
