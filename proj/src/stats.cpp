#include "wikitables/stats.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "wikitables/checkpoint.hpp"
#include "wikitables/error.hpp"
#include "wikitables/store.hpp"

namespace fs = std::filesystem;

namespace wikitables {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

void consider(std::optional<Superlative>& best, const Superlative& candidate) {
  if (!best || candidate.value > best->value ||
      (candidate.value == best->value && candidate.table_id < best->table_id))
    best = candidate;
}

std::size_t count_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

Json superlative_json(const std::optional<Superlative>& s) {
  if (!s) return Json();
  Json j;
  j["page_id"] = s->table_id.page_id;
  j["offset"] = s->table_id.offset;
  j["page_title"] = s->page_title;
  j["table_title"] = s->table_title;
  j["value"] = s->value;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw StoreError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

void CorpusStats::finalize() {
  empty = tables_total == 0;
  avg_cells_per_table = ratio(cells_total, tables_total);
  avg_tables_per_page = ratio(tables_total, pages_total);
  avg_cells_per_row = ratio(cells_total, rows_total);
  avg_cells_per_column = ratio(cells_total, columns_total);
  avg_chars_per_cell = ratio(chars_total, cells_total);
  avg_cyrillic_per_cell = ratio(cyrillic_total, cells_total);
  avg_latin_per_cell = ratio(latin_total, cells_total);
  pct_nonstring_cells = percent(nonstring_cells, cells_total);
  pct_mostly_null_rows = percent(mostly_null_rows, rows_total);
  pct_mostly_null_columns = percent(mostly_null_columns, columns_total);
  pct_cyrillic_only_columns = percent(cyrillic_only_columns, columns_total);
  pct_latin_only_columns = percent(latin_only_columns, columns_total);
  pct_numeric_only_columns = percent(numeric_only_columns, columns_total);
}

Json to_json(const CorpusStats& s) {
  Json j;
  j["pages_total"] = s.pages_total;
  j["tables_total"] = s.tables_total;
  j["rows_total"] = s.rows_total;
  j["columns_total"] = s.columns_total;
  j["cells_total"] = s.cells_total;
  j["avg_cells_per_table"] = s.avg_cells_per_table;
  j["avg_tables_per_page"] = s.avg_tables_per_page;
  j["avg_cells_per_row"] = s.avg_cells_per_row;
  j["avg_cells_per_column"] = s.avg_cells_per_column;
  j["avg_chars_per_cell"] = s.avg_chars_per_cell;
  j["avg_cyrillic_per_cell"] = s.avg_cyrillic_per_cell;
  j["avg_latin_per_cell"] = s.avg_latin_per_cell;
  j["pct_nonstring_cells"] = s.pct_nonstring_cells;
  j["pct_mostly_null_rows"] = s.pct_mostly_null_rows;
  j["pct_mostly_null_columns"] = s.pct_mostly_null_columns;
  j["pct_cyrillic_only_columns"] = s.pct_cyrillic_only_columns;
  j["pct_latin_only_columns"] = s.pct_latin_only_columns;
  j["pct_numeric_only_columns"] = s.pct_numeric_only_columns;
  j["empty"] = s.empty;
  j["errors"] = s.errors;
  j["error_tables"] = s.error_tables;
  return j;
}

Json to_json(const Superlatives& s) {
  Json j;
  j["widest"] = superlative_json(s.widest);
  j["longest"] = superlative_json(s.longest);
  j["most_characters"] = superlative_json(s.most_characters);
  j["most_cells"] = superlative_json(s.most_cells);
  return j;
}

bool is_trivial_header(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string table_title(const ExtractedTable& table) {
  if (table.caption && !table.caption->empty()) return *table.caption;
  if (table.header_rows > 0 && table.grid.n_rows() > 0) {
    std::string joined;
    for (const auto& cell : table.grid.rows.front()) {
      if (cell.text.empty()) continue;
      if (!joined.empty()) joined += " ";
      joined += cell.text;
    }
    if (!joined.empty()) return joined;
  }
  return "(untitled)";
}

// Tallies of one thread; merged after the scan.
struct ScanAccumulator {
  CorpusScan part;
  double threshold = 0.7;

  void add(const ExtractedTable& t) {
    CorpusStats& s = part.stats_;
    const CellGrid& grid = t.grid;
    const std::size_t rows = grid.n_rows();
    const std::size_t cols = grid.n_cols();
    const auto header_rows = static_cast<std::size_t>(std::max(t.header_rows, 0));
    ++s.tables_total;
    s.rows_total += rows;
    s.columns_total += cols;
    s.cells_total += rows * cols;

    std::size_t chars = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const Cell& cell = grid.at(r, c);
        const CharClassProfile p = classify_chars(cell.text);
        chars += p.total;
        s.cyrillic_total += p.cyrillic;
        s.latin_total += p.latin;
        if (is_nonstring_cell(p)) ++s.nonstring_cells;
        if (r < header_rows && !cell.text.empty()) ++part.headers_[cell.text];
      }
      if (row_is_mostly_null(grid.rows[r], threshold)) ++s.mostly_null_rows;
    }
    s.chars_total += chars;
    for (std::size_t c = 0; c < cols; ++c) {
      if (column_is_mostly_null(grid, c, header_rows, threshold)) ++s.mostly_null_columns;
      if (column_is_cyrillic_only(grid, c, header_rows)) ++s.cyrillic_only_columns;
      if (column_is_latin_only(grid, c, header_rows)) ++s.latin_only_columns;
      if (column_is_numeric_only(grid, c, header_rows)) ++s.numeric_only_columns;
    }

    const int r = static_cast<int>(rows);
    const int c = static_cast<int>(cols);
    ++part.sizes_[{c, r}];
    ++part.rows_dist_[r];
    ++part.cols_dist_[c];
    part.dims_.push_back({t.table_id.page_id, r, c});
    part.page_titles_.emplace(t.table_id.page_id, t.page_title);

    const auto record = [&](std::optional<Superlative>& best, std::uint64_t value) {
      if (best && (value < best->value || (value == best->value && best->table_id < t.table_id)))
        return;
      consider(best, Superlative{t.table_id, t.page_title, table_title(t), value});
    };
    Superlatives& sup = part.superlatives_;
    record(sup.widest, cols);
    record(sup.longest, rows);
    record(sup.most_characters, chars);
    record(sup.most_cells, rows * cols);
  }

  void merge(ScanAccumulator& other) {
    CorpusStats& s = part.stats_;
    const CorpusStats& o = other.part.stats_;
    s.tables_total += o.tables_total;
    s.rows_total += o.rows_total;
    s.columns_total += o.columns_total;
    s.cells_total += o.cells_total;
    s.chars_total += o.chars_total;
    s.cyrillic_total += o.cyrillic_total;
    s.latin_total += o.latin_total;
    s.nonstring_cells += o.nonstring_cells;
    s.mostly_null_rows += o.mostly_null_rows;
    s.mostly_null_columns += o.mostly_null_columns;
    s.cyrillic_only_columns += o.cyrillic_only_columns;
    s.latin_only_columns += o.latin_only_columns;
    s.numeric_only_columns += o.numeric_only_columns;
    s.errors += o.errors;
    s.error_tables.insert(s.error_tables.end(), o.error_tables.begin(), o.error_tables.end());
    for (const auto& [k, v] : other.part.sizes_) part.sizes_[k] += v;
    for (const auto& [k, v] : other.part.rows_dist_) part.rows_dist_[k] += v;
    for (const auto& [k, v] : other.part.cols_dist_) part.cols_dist_[k] += v;
    for (const auto& [k, v] : other.part.headers_) part.headers_[k] += v;
    part.dims_.insert(part.dims_.end(), other.part.dims_.begin(), other.part.dims_.end());
    part.page_titles_.merge(other.part.page_titles_);
    Superlatives& sup = part.superlatives_;
    const Superlatives& os = other.part.superlatives_;
    for (const auto& [mine, theirs] :
         {std::pair{&sup.widest, &os.widest}, std::pair{&sup.longest, &os.longest},
          std::pair{&sup.most_characters, &os.most_characters},
          std::pair{&sup.most_cells, &os.most_cells}})
      if (*theirs) consider(*mine, **theirs);
  }
};

CorpusScan CorpusScan::run(const fs::path& root, const std::optional<FilterConfig>& filters,
                           unsigned threads) {
  const CorpusStore store(root, false);
  if (!store.has_manifest())
    throw CorpusError("no corpus at " + root.string() + " (manifest.json is missing)");
  store.read_manifest();
  if (filters) filters->validate();

  const std::vector<TableId> ids = store.list_tables();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(ids.size(), 1)));

  const double threshold = filters ? filters->null_threshold : FilterConfig{}.null_threshold;
  std::vector<ScanAccumulator> parts(threads);
  std::atomic<std::size_t> next{0};
  const auto scan = [&](ScanAccumulator& acc) {
    acc.threshold = threshold;
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      std::optional<ExtractedTable> table;
      try {
        table = load_table(store, ids[i]);
      } catch (const std::exception&) {
        ++acc.part.stats_.errors;
        acc.part.stats_.error_tables.push_back(ids[i].stem());
        continue;
      }
      if (filters) {
        table = apply_filters(*table, *filters);
        if (!table) continue;
      }
      acc.add(*table);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(scan, std::ref(parts[t]));
  scan(parts[0]);
  for (auto& th : pool) th.join();
  for (unsigned t = 1; t < threads; ++t) parts[0].merge(parts[t]);

  CorpusScan result = std::move(parts[0].part);
  std::sort(result.dims_.begin(), result.dims_.end(),
            [](const TableDims& a, const TableDims& b) {
              return std::tie(a.page_id, a.rows, a.cols) < std::tie(b.page_id, b.rows, b.cols);
            });
  std::sort(result.stats_.error_tables.begin(), result.stats_.error_tables.end());

  CorpusStats& s = result.stats_;
  if (fs::exists(store.titles_path())) {
    s.pages_total = count_lines(store.titles_path());
  } else {
    s.pages_total = read_checkpoint(store.checkpoint_path(), std::nullopt).records.size();
    if (s.pages_total == 0) s.pages_total = result.page_titles_.size();
  }
  s.finalize();
  return result;
}

std::vector<SizeCount> CorpusScan::size_histogram(std::size_t top_n) const {
  std::vector<SizeCount> all;
  for (const auto& [key, count] : sizes_) all.push_back({key.first, key.second, count});
  // sizes_ is ordered by (cols, rows), so a stable sort keeps that for ties.
  std::stable_sort(all.begin(), all.end(),
                   [](const SizeCount& a, const SizeCount& b) { return a.count > b.count; });
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

std::vector<HeaderCount> CorpusScan::header_frequency(std::size_t top_n,
                                                      bool filter_trivial) const {
  std::vector<HeaderCount> all;
  for (const auto& [text, count] : headers_)
    if (!filter_trivial || !is_trivial_header(text)) all.push_back({text, count});
  std::stable_sort(all.begin(), all.end(),
                   [](const HeaderCount& a, const HeaderCount& b) { return a.count > b.count; });
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

std::vector<PageTableCount> CorpusScan::table_rich_pages(std::size_t top_n, int min_rows,
                                                         int min_cols) const {
  std::map<std::int64_t, std::size_t> per_page;
  for (const auto& d : dims_)
    if (d.rows >= min_rows && d.cols >= min_cols) ++per_page[d.page_id];
  std::vector<PageTableCount> all;
  for (const auto& [page_id, count] : per_page)
    all.push_back({page_id, page_titles_.at(page_id), count});
  std::sort(all.begin(), all.end(), [](const PageTableCount& a, const PageTableCount& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.page_title != b.page_title) return a.page_title < b.page_title;
    return a.page_id < b.page_id;
  });
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

void CorpusScan::write_reports(const fs::path& dir, std::size_t top_n) const {
  fs::create_directories(dir);
  write_text(dir / "stats.json", dump_document(to_json(stats_)));
  write_text(dir / "superlatives.json", dump_document(to_json(superlatives_)));

  std::string text = "size\tcolumns\trows\tfrequency\n";
  for (const auto& s : size_histogram(top_n))
    text += s.key() + "\t" + std::to_string(s.cols) + "\t" + std::to_string(s.rows) + "\t" +
            std::to_string(s.count) + "\n";
  write_text(dir / "sizes.tsv", text);

  for (const auto& [name, dist] :
       {std::pair{"rows.tsv", &rows_dist_}, std::pair{"columns.tsv", &cols_dist_}}) {
    text = "# count\ttables\n";
    for (const auto& [n, count] : *dist)
      text += std::to_string(n) + "\t" + std::to_string(count) + "\n";
    write_text(dir / name, text);
  }

  for (const bool trivial : {false, true}) {
    text = "header\tfrequency\n";
    for (const auto& h : header_frequency(top_n, trivial))
      text += h.text + "\t" + std::to_string(h.count) + "\n";
    write_text(dir / (trivial ? "headers_nontrivial.tsv" : "headers.tsv"), text);
  }

  for (const auto& [name, rows, cols] :
       {std::tuple{"rich_pages.tsv", 0, 0}, std::tuple{"rich_pages_3x5.tsv", 3, 5}}) {
    text = "page_id\tpage_title\ttables\n";
    for (const auto& p : table_rich_pages(top_n, rows, cols))
      text += std::to_string(p.page_id) + "\t" + p.page_title + "\t" +
              std::to_string(p.count) + "\n";
    write_text(dir / name, text);
  }
}

CorpusStats compute_stats(const fs::path& root, const std::optional<FilterConfig>& filters) {
  return CorpusScan::run(root, filters).stats();
}

std::vector<SizeCount> size_histogram(const fs::path& root, std::size_t top_n) {
  return CorpusScan::run(root).size_histogram(top_n);
}

std::vector<HeaderCount> header_frequency(const fs::path& root, std::size_t top_n,
                                          bool filter_trivial) {
  return CorpusScan::run(root).header_frequency(top_n, filter_trivial);
}

std::vector<PageTableCount> table_rich_pages(const fs::path& root, std::size_t top_n,
                                             int min_rows, int min_cols) {
  return CorpusScan::run(root).table_rich_pages(top_n, min_rows, min_cols);
}

Superlatives superlatives(const fs::path& root) { return CorpusScan::run(root).superlatives(); }

}  // namespace wikitables
