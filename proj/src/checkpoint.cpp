#include "wikitables/checkpoint.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>

#include "wikitables/error.hpp"
#include "wikitables/failpoint.hpp"

namespace wikitables {

namespace {

constexpr std::string_view kHeaderTag = "checkpoint";
constexpr std::string_view kRecordTag = "page";
constexpr std::string_view kVersion = "v1";

std::string checksum(std::string_view payload) {
  const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                           static_cast<uInt>(payload.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto tab = s.find('\t', start);
    parts.push_back(s.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return parts;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && end == s.data() + s.size();
}

std::string header_payload(const CheckpointHeader& h) {
  return std::string(kHeaderTag) + "\t" + std::string(kVersion) + "\t" + h.snapshot_date +
         "\t" + std::to_string(h.chunk_count);
}

std::string record_payload(const CheckpointRecord& r) {
  return std::string(kRecordTag) + "\t" + std::to_string(r.page_id) + "\t" +
         std::to_string(r.table_count) + "\t" + std::string(to_string(r.status));
}

[[noreturn]] void corrupt(const std::filesystem::path& path, std::uint64_t offset,
                          const std::string& why) {
  throw CheckpointError("checkpoint log " + path.string() + " is unreadable at byte " +
                        std::to_string(offset) + " (" + why +
                        "); re-verify the corpus before resuming");
}

}  // namespace

std::string_view to_string(PageStatus status) {
  switch (status) {
    case PageStatus::done: return "done";
    case PageStatus::missing: return "missing";
    case PageStatus::parse_error: return "parse_error";
  }
  return "done";
}

std::optional<PageStatus> parse_page_status(std::string_view text) {
  if (text == "done") return PageStatus::done;
  if (text == "missing") return PageStatus::missing;
  if (text == "parse_error") return PageStatus::parse_error;
  return std::nullopt;
}

CheckpointContents read_checkpoint(const std::filesystem::path& path,
                                   const std::optional<CheckpointHeader>& expect) {
  CheckpointContents out;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) return out;
    throw CheckpointError("cannot open checkpoint log " + path.string() +
                          "; re-verify the corpus before resuming");
  }
  const std::string data((std::istreambuf_iterator<char>(in)), {});

  std::uint64_t offset = 0;
  bool seen_header = false;
  while (offset < data.size()) {
    const auto newline = data.find('\n', offset);
    if (newline == std::string::npos) {
      out.torn_tail = true;
      break;
    }
    const std::string_view line(data.data() + offset, newline - offset);
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) corrupt(path, offset, "missing checksum");
    const std::string_view payload = line.substr(0, tab);
    if (checksum(payload) != line.substr(tab + 1)) corrupt(path, offset, "bad checksum");

    const auto fields = split_tabs(payload);
    if (fields[0] == kHeaderTag) {
      CheckpointHeader header;
      if (fields.size() != 4 || fields[1] != kVersion ||
          !parse_int(fields[3], header.chunk_count))
        corrupt(path, offset, "malformed header");
      header.snapshot_date = std::string(fields[2]);
      if (expect && header.snapshot_date != expect->snapshot_date)
        throw CheckpointMismatch("checkpoint log belongs to snapshot " +
                                 header.snapshot_date + ", job expects " +
                                 expect->snapshot_date);
      if (expect && header.chunk_count != expect->chunk_count)
        throw CheckpointMismatch("checkpoint log was written with " +
                                 std::to_string(header.chunk_count) +
                                 " chunks, job uses " +
                                 std::to_string(expect->chunk_count));
      if (!out.header) out.header = header;
      seen_header = true;
    } else if (fields[0] == kRecordTag) {
      if (!seen_header) corrupt(path, offset, "record before header");
      CheckpointRecord record;
      std::optional<PageStatus> status;
      if (fields.size() != 4 || !parse_int(fields[1], record.page_id) ||
          !parse_int(fields[2], record.table_count) ||
          !(status = parse_page_status(fields[3])))
        corrupt(path, offset, "malformed record");
      record.status = *status;
      if (out.completed.insert(record.page_id).second) out.records.push_back(record);
    } else {
      corrupt(path, offset, "unknown record type");
    }
    offset = newline + 1;
    out.valid_bytes = offset;
  }
  return out;
}

std::unordered_set<std::int64_t> load_checkpoint(
    const std::filesystem::path& path, const std::optional<CheckpointHeader>& expect) {
  return read_checkpoint(path, expect).completed;
}

CheckpointLog::CheckpointLog(const std::filesystem::path& path, CheckpointHeader header,
                             bool sync)
    : path_(path), header_(std::move(header)), sync_(sync) {
  auto contents = read_checkpoint(path_, header_);
  completed_ = std::move(contents.completed);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0)
    throw CheckpointError("cannot open checkpoint log " + path_.string() + ": " +
                          std::strerror(errno));
  if (contents.torn_tail &&
      ::ftruncate(fd_, static_cast<off_t>(contents.valid_bytes)) != 0) {
    ::close(fd_);
    throw CheckpointError("cannot discard torn checkpoint tail: " +
                          std::string(std::strerror(errno)));
  }
  if (contents.valid_bytes == 0) write_line(header_payload(header_));
}

CheckpointLog::~CheckpointLog() {
  if (fd_ >= 0) ::close(fd_);
}

bool CheckpointLog::contains(std::int64_t page_id) const {
  std::lock_guard lock(mutex_);
  return completed_.contains(page_id);
}

std::size_t CheckpointLog::size() const {
  std::lock_guard lock(mutex_);
  return completed_.size();
}

std::unordered_set<std::int64_t> CheckpointLog::completed() const {
  std::lock_guard lock(mutex_);
  return completed_;
}

void CheckpointLog::append(const CheckpointRecord& record) {
  std::lock_guard lock(mutex_);
  if (completed_.contains(record.page_id)) return;
  write_line(record_payload(record));
  completed_.insert(record.page_id);
}

void CheckpointLog::write_line(const std::string& payload) {
  const std::string line = payload + "\t" + checksum(payload) + "\n";
  std::size_t length = line.size();
  if (failpoint::triggered("checkpoint.torn_append")) length /= 2;
  std::size_t written = 0;
  while (written < length) {
    const auto n = ::write(fd_, line.data() + written, length - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw CheckpointError("checkpoint append failed: " +
                            std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (length != line.size()) failpoint::kill_self();
  if (sync_ && ::fdatasync(fd_) != 0)
    throw CheckpointError("checkpoint fsync failed: " + std::string(std::strerror(errno)));
}

}  // namespace wikitables
