#include <algorithm>
#include <charconv>
#include <fstream>
#include <queue>

#include "wikitables/error.hpp"
#include "wikitables/source.hpp"

namespace fs = std::filesystem;

namespace wikitables {

std::string format_title_line(const PageRef& ref) {
  std::string title = ref.title;
  std::replace_if(title.begin(), title.end(),
                  [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return std::to_string(ref.page_id) + "\t" + title;
}

std::optional<PageRef> parse_title_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) return std::nullopt;
  PageRef ref;
  const auto [end, ec] = std::from_chars(line.data(), line.data() + tab, ref.page_id);
  if (ec != std::errc{} || end != line.data() + tab || ref.page_id <= 0) return std::nullopt;
  ref.title = std::string(line.substr(tab + 1));
  if (ref.title.empty()) return std::nullopt;
  return ref;
}

TitleSorter::TitleSorter(fs::path spill_dir, std::size_t max_buffered)
    : dir_(std::move(spill_dir)), max_buffered_(std::max<std::size_t>(1, max_buffered)) {}

TitleSorter::~TitleSorter() {
  std::error_code ec;
  for (const auto& run : runs_) fs::remove(run, ec);
}

void TitleSorter::add(PageRef ref) {
  buffer_.push_back(std::move(ref));
  peak_ = std::max(peak_, buffer_.size());
  if (buffer_.size() >= max_buffered_) spill();
}

void TitleSorter::spill() {
  if (buffer_.empty()) return;
  std::stable_sort(buffer_.begin(), buffer_.end(),
                   [](const PageRef& a, const PageRef& b) { return a.page_id < b.page_id; });
  fs::create_directories(dir_);
  const fs::path run = dir_ / ("titles-run-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                               "-" + std::to_string(runs_.size()) + ".tsv");
  std::ofstream out(run, std::ios::binary | std::ios::trunc);
  for (const auto& ref : buffer_) out << format_title_line(ref) << '\n';
  out.close();
  if (!out) throw Error("cannot write title sort run " + run.string());
  runs_.push_back(run);
  buffer_.clear();
}

std::size_t TitleSorter::finish(const std::function<void(const PageRef&)>& sink) {
  spill();
  struct Head {
    PageRef ref;
    std::size_t run;
  };
  const auto later = [](const Head& a, const Head& b) {
    return a.ref.page_id != b.ref.page_id ? a.ref.page_id > b.ref.page_id : a.run > b.run;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(later)> heap(later);
  std::vector<std::ifstream> readers;
  readers.reserve(runs_.size());
  const auto advance = [&](std::size_t i) {
    std::string line;
    while (std::getline(readers[i], line)) {
      if (auto ref = parse_title_line(line)) {
        heap.push(Head{std::move(*ref), i});
        return;
      }
    }
  };
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    readers.emplace_back(runs_[i], std::ios::binary);
    advance(i);
  }
  std::size_t emitted = 0;
  std::int64_t last = 0;
  while (!heap.empty()) {
    Head head = heap.top();
    heap.pop();
    if (emitted == 0 || head.ref.page_id != last) {
      sink(head.ref);
      last = head.ref.page_id;
      ++emitted;
    }
    advance(head.run);
  }
  return emitted;
}

}  // namespace wikitables
