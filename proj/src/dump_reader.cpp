#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>

#include "wikitables/error.hpp"
#include "wikitables/source.hpp"

namespace fs = std::filesystem;

namespace wikitables {

namespace {

constexpr std::size_t kBlock = 512;
constexpr std::uint64_t kUnbounded = ~std::uint64_t{0};

// '\n'-terminated lines from [start, limit) of a file, tracking offsets.
class LineReader {
 public:
  enum class Status { line, end, torn };

  LineReader(const fs::path& path, std::uint64_t start, std::uint64_t limit)
      : in_(path, std::ios::binary), pos_(start), limit_(limit) {
    if (!in_) throw DumpError("cannot open " + path.string(), 0, false);
    in_.seekg(static_cast<std::streamoff>(start));
  }

  // On `line`, `out` holds the line without '\n' and `line_start` its offset.
  Status next(std::string& out, std::uint64_t& line_start) {
    out.clear();
    line_start = pos_;
    while (true) {
      if (cursor_ == filled_ && !refill()) return out.empty() ? Status::end : Status::torn;
      const char* begin = buffer_.data() + cursor_;
      const char* stop = buffer_.data() + filled_;
      const char* nl = std::find(begin, stop, '\n');
      out.append(begin, nl);
      const auto consumed = static_cast<std::size_t>(nl - begin);
      cursor_ += consumed;
      pos_ += consumed;
      if (nl != stop) {
        ++cursor_;
        ++pos_;
        return Status::line;
      }
    }
  }

  // True when the range ended because the file ended, not at the limit.
  bool hit_physical_end() const { return physical_end_; }

 private:
  bool refill() {
    if (limit_ != kUnbounded && pos_ >= limit_) return false;
    std::size_t want = buffer_.size();
    if (limit_ != kUnbounded) want = static_cast<std::size_t>(std::min<std::uint64_t>(want, limit_ - pos_));
    in_.read(buffer_.data(), static_cast<std::streamsize>(want));
    filled_ = static_cast<std::size_t>(in_.gcount());
    cursor_ = 0;
    if (filled_ < want) physical_end_ = true;
    return filled_ > 0;
  }

  std::ifstream in_;
  std::uint64_t pos_;
  std::uint64_t limit_;
  std::array<char, 64 * 1024> buffer_{};
  std::size_t cursor_ = 0;
  std::size_t filled_ = 0;
  bool physical_end_ = false;
};

struct ManifestEntry {
  PageRef ref;
  std::string path;
  std::uint64_t offset = 0;
};

// Reads manifest records; throws DumpError on torn or malformed lines.
class Manifest {
 public:
  Manifest(const fs::path& path, std::uint64_t start, std::uint64_t limit)
      : lines_(path, start, limit), limit_(limit) {}

  std::optional<ManifestEntry> next() {
    std::string line;
    std::uint64_t offset = 0;
    while (true) {
      const auto status = lines_.next(line, offset);
      if (status == LineReader::Status::end) {
        if (limit_ != kUnbounded && lines_.hit_physical_end())
          throw DumpError("dump ends inside its manifest", offset, true);
        return std::nullopt;
      }
      if (status == LineReader::Status::torn)
        throw DumpError("manifest record is truncated", offset, true);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      return parse(line, offset);
    }
  }

 private:
  static ManifestEntry parse(const std::string& line, std::uint64_t offset) {
    const auto first = line.find('\t');
    const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
    if (second == std::string::npos)
      throw DumpError("manifest record needs page_id, title and path", offset, false);
    ManifestEntry entry;
    entry.offset = offset;
    const auto [end, ec] =
        std::from_chars(line.data(), line.data() + first, entry.ref.page_id);
    if (ec != std::errc{} || end != line.data() + first || entry.ref.page_id <= 0)
      throw DumpError("manifest record has a bad page_id", offset, false);
    entry.ref.title = line.substr(first + 1, second - first - 1);
    entry.path = line.substr(second + 1);
    if (entry.ref.title.empty() || entry.path.empty() || entry.path.front() == '/' ||
        entry.path.find("..") != std::string::npos)
      throw DumpError("manifest record has an empty title or unsafe path", offset, false);
    return entry;
  }

  LineReader lines_;
  std::uint64_t limit_;
};

std::uint64_t parse_octal(const char* field, std::size_t width) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < width; ++i) {
    const char c = field[i];
    if (c == '\0' || c == ' ') {
      if (value != 0) break;
      continue;
    }
    if (c < '0' || c > '7') return ~std::uint64_t{0};
    value = value * 8 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

std::string field_string(const char* field, std::size_t width) {
  return std::string(field, strnlen(field, width));
}

std::string strip_dot_slash(std::string name) {
  while (name.starts_with("./")) name.erase(0, 2);
  return name;
}

struct TarHeader {
  std::string name;
  std::uint64_t size = 0;
  char type = '0';
  std::uint64_t data_offset = 0;
};

enum class TarRead { header, end, eof };

// Reads one header at `offset`; follows GNU long-name records.
TarRead read_tar_header(std::ifstream& in, std::uint64_t& offset, TarHeader& out) {
  std::string long_name;
  while (true) {
    std::array<char, kBlock> block{};
    in.seekg(static_cast<std::streamoff>(offset));
    in.read(block.data(), kBlock);
    if (static_cast<std::size_t>(in.gcount()) < kBlock) {
      in.clear();
      return TarRead::eof;
    }
    if (std::all_of(block.begin(), block.end(), [](char c) { return c == '\0'; }))
      return TarRead::end;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i)
      sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(block[i]);
    if (parse_octal(block.data() + 148, 8) != sum)
      throw DumpError("tar header checksum mismatch", offset, false);

    TarHeader h;
    h.size = parse_octal(block.data() + 124, 12);
    if (h.size == ~std::uint64_t{0}) throw DumpError("tar header has a bad size", offset, false);
    h.type = block[156] == '\0' ? '0' : block[156];
    h.name = field_string(block.data(), 100);
    if (std::memcmp(block.data() + 257, "ustar", 5) == 0) {
      const std::string prefix = field_string(block.data() + 345, 155);
      if (!prefix.empty()) h.name = prefix + "/" + h.name;
    }
    h.data_offset = offset + kBlock;
    const std::uint64_t padded = (h.size + kBlock - 1) / kBlock * kBlock;
    offset = h.data_offset + padded;

    if (h.type == 'L') {
      long_name.resize(static_cast<std::size_t>(h.size));
      in.seekg(static_cast<std::streamoff>(h.data_offset));
      in.read(long_name.data(), static_cast<std::streamsize>(h.size));
      if (static_cast<std::uint64_t>(in.gcount()) < h.size) {
        in.clear();
        return TarRead::eof;
      }
      long_name.resize(strnlen(long_name.c_str(), long_name.size()));
      continue;
    }
    if (!long_name.empty()) h.name = long_name;
    h.name = strip_dot_slash(h.name);
    out = std::move(h);
    return TarRead::header;
  }
}

bool looks_like_xml_dump(const fs::path& path) {
  const std::string name = path.filename().string();
  for (const char* ext : {".xml", ".xml.bz2", ".xml.gz", ".bz2", ".7z", ".gz"})
    if (name.ends_with(ext)) return true;
  std::ifstream in(path, std::ios::binary);
  std::string head(256, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  const auto start = head.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  return start != std::string::npos &&
         (head.compare(start, 10, "<mediawiki") == 0 || head.compare(start, 5, "<?xml") == 0);
}

bool is_tar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, kBlock> block{};
  in.read(block.data(), kBlock);
  return in.gcount() == static_cast<std::streamsize>(kBlock) &&
         std::memcmp(block.data() + 257, "ustar", 5) == 0;
}

}  // namespace

class DumpReader::Impl {
 public:
  explicit Impl(const fs::path& path) : path_(path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
      if (!fs::exists(path / "manifest.tsv"))
        throw UnsupportedDump("dump directory " + path.string() + " has no manifest.tsv");
      manifest_.emplace(path / "manifest.tsv", 0, kUnbounded);
      return;
    }
    if (!fs::exists(path, ec)) throw DumpError("cannot open dump " + path.string(), 0, false);
    if (looks_like_xml_dump(path))
      throw UnsupportedDump("wikitext (XML) dumps are not supported; provide an HTML dump "
                            "(directory or tar with manifest.tsv)");
    if (!is_tar(path))
      throw UnsupportedDump("unrecognized dump format: " + path.string() +
                            " (expected an HTML dump directory or tar archive)");
    tar_.open(path, std::ios::binary);
    TarHeader first;
    std::uint64_t offset = 0;
    if (read_tar_header(tar_, offset, first) != TarRead::header || first.name != "manifest.tsv")
      throw UnsupportedDump("tar dump must start with manifest.tsv");
    tar_offset_ = offset;
    manifest_.emplace(path, first.data_offset, first.data_offset + first.size);
  }

  std::optional<ManifestEntry> next_entry() { return manifest_->next(); }

  std::optional<RawPage> next() {
    auto entry = manifest_->next();
    if (!entry) return std::nullopt;
    RawPage page;
    page.ref = entry->ref;
    page.source = PageSource::dump;
    page.fetched_at = Clock::now();
    page.html = tar_.is_open() ? tar_body(*entry) : file_body(*entry);
    return page;
  }

 private:
  std::string file_body(const ManifestEntry& entry) {
    const fs::path file = path_ / entry.path;
    std::ifstream in(file, std::ios::binary);
    if (!in)
      throw DumpError("page file " + entry.path + " listed in manifest is missing",
                      entry.offset, false);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  }

  std::string tar_body(const ManifestEntry& entry) {
    TarHeader h;
    while (true) {
      const std::uint64_t at = tar_offset_;
      const TarRead r = read_tar_header(tar_, tar_offset_, h);
      if (r != TarRead::header)
        throw DumpError("dump ends before page " + entry.path, at, true);
      if (h.type == '0' || h.type == '7') break;
    }
    if (h.name != entry.path)
      throw DumpError("tar member " + h.name + " does not match manifest entry " + entry.path,
                      h.data_offset - kBlock, false);
    std::string body(static_cast<std::size_t>(h.size), '\0');
    tar_.seekg(static_cast<std::streamoff>(h.data_offset));
    tar_.read(body.data(), static_cast<std::streamsize>(h.size));
    const auto got = static_cast<std::uint64_t>(tar_.gcount());
    if (got < h.size) {
      tar_.clear();
      throw DumpError("dump truncated inside page " + entry.path, h.data_offset + got, true);
    }
    return body;
  }

  fs::path path_;
  std::optional<Manifest> manifest_;
  std::ifstream tar_;
  std::uint64_t tar_offset_ = 0;
};

DumpReader::DumpReader(const fs::path& path) : impl_(std::make_unique<Impl>(path)) {}
DumpReader::~DumpReader() = default;
DumpReader::DumpReader(DumpReader&&) noexcept = default;
DumpReader& DumpReader::operator=(DumpReader&&) noexcept = default;

std::optional<RawPage> DumpReader::next() { return impl_->next(); }

void read_dump(const SourceConfig& cfg, const std::function<void(RawPage&&)>& sink) {
  if (!cfg.dump_path) throw ConfigError("read_dump needs dump_path");
  DumpReader reader(*cfg.dump_path);
  while (auto page = reader.next()) sink(std::move(*page));
}

std::size_t list_dump_titles(const fs::path& path,
                             const std::function<void(const PageRef&)>& sink) {
  DumpReader::Impl impl(path);
  std::size_t count = 0;
  while (auto entry = impl.next_entry()) {
    sink(entry->ref);
    ++count;
  }
  return count;
}

}  // namespace wikitables
