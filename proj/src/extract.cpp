#include "wikitables/extract.hpp"

#include <algorithm>

#include "wikitables/error.hpp"
#include "wikitables/filter.hpp"
#include "wikitables/unicode.hpp"

namespace wikitables {

namespace {

// Rendered text of a subtree with block boundaries turned into spaces.
// Nested tables and hidden elements are skipped.
void collect_text(const html::Document& doc, std::size_t index, std::string& out) {
  const auto& node = doc.node(index);
  if (node.kind == html::NodeKind::text) {
    out += node.text;
    return;
  }
  if (node.is("table") || html::is_hidden_element(node.name) || html::is_styled_hidden(node))
    return;
  const bool block = html::is_block_element(node.name);
  if (block) out.push_back(' ');
  for (const auto child : node.children) collect_text(doc, child, out);
  if (block) out.push_back(' ');
}

std::string cell_text(const html::Document& doc, std::size_t cell) {
  std::string raw;
  for (const auto child : doc.node(cell).children) collect_text(doc, child, raw);
  return normalize_cell_text(raw);
}

std::string strip_footnote_markers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '[') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
      if (j > i + 1 && j < text.size() && text[j] == ']') {
        i = j + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

}  // namespace

std::string normalize_cell_text(std::string_view text) {
  return unicode::collapse_whitespace(
      strip_footnote_markers(unicode::collapse_whitespace(text)));
}

std::string article_url(std::string_view base, std::string_view title) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out(base);
  for (const char raw : title) {
    const auto c = static_cast<unsigned char>(raw);
    if (c == ' ') {
      out.push_back('_');
    } else if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
               (c >= '0' && c <= '9') ||
               std::string_view("-_.~;:@$!*(),/").find(static_cast<char>(c)) !=
                   std::string_view::npos) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

PageContext::PageContext(const html::Document& doc) {
  sections_.emplace_back();
  walk(doc, doc.root());
  flush();
}

void PageContext::flush() {
  if (pending_.empty()) return;
  for (auto& word : unicode::split_words(pending_))
    sections_.back().push_back(std::move(word));
  pending_.clear();
}

void PageContext::walk(const html::Document& doc, std::size_t index) {
  const auto& node = doc.node(index);
  if (node.kind == html::NodeKind::text) {
    if (table_depth_ == 0 && heading_depth_ == 0) pending_ += node.text;
    return;
  }
  if (node.kind == html::NodeKind::element && html::is_hidden_element(node.name)) return;

  if (node.is("table")) {
    table_nodes_.push_back(index);
    if (table_depth_ == 0) {
      flush();
      outer_marker_ = Marker{sections_.size() - 1, sections_.back().size()};
    }
    markers_.push_back(outer_marker_);
    ++table_depth_;
    for (const auto child : node.children) walk(doc, child);
    --table_depth_;
    return;
  }

  const bool heading = table_depth_ == 0 && html::is_heading(node.name);
  if (heading) {
    flush();
    if (heading_depth_ == 0) sections_.emplace_back();
    ++heading_depth_;
  }
  const bool block = html::is_block_element(node.name);
  if (block) pending_.push_back(' ');
  for (const auto child : node.children) walk(doc, child);
  if (block) pending_.push_back(' ');
  if (heading) --heading_depth_;
}

ContextWindow PageContext::around(std::size_t offset, std::size_t limit) const {
  ContextWindow window;
  const Marker& m = markers_.at(offset);
  const auto& words = sections_[m.section];
  const std::size_t begin = m.word > limit ? m.word - limit : 0;
  window.before.assign(words.begin() + static_cast<std::ptrdiff_t>(begin),
                       words.begin() + static_cast<std::ptrdiff_t>(m.word));
  const std::size_t end = std::min(words.size(), m.word + limit);
  window.after.assign(words.begin() + static_cast<std::ptrdiff_t>(m.word),
                      words.begin() + static_cast<std::ptrdiff_t>(end));
  return window;
}

SourceTable read_source_table(const html::Document& doc, std::size_t table_node) {
  SourceTable table;
  const auto add_row = [&](std::size_t tr) {
    auto& row = table.rows.emplace_back();
    for (const auto child : doc.node(tr).children) {
      const auto& cell = doc.node(child);
      if (!cell.is("td") && !cell.is("th")) continue;
      row.push_back(SourceCell{cell_text(doc, child), cell.is("th"),
                               parse_span(cell.attribute("rowspan")),
                               parse_span(cell.attribute("colspan"))});
    }
  };
  for (const auto child : doc.node(table_node).children) {
    const auto& node = doc.node(child);
    if (node.is("tr")) {
      add_row(child);
    } else if (node.is("thead") || node.is("tbody") || node.is("tfoot")) {
      for (const auto tr : node.children)
        if (doc.node(tr).is("tr")) add_row(tr);
    }
  }
  return table;
}

ExtractResult extract_tables(const RawPage& page, const ExtractOptions& options) {
  const html::Document doc = html::Document::parse(page.html);
  const PageContext context(doc);
  const std::string url = article_url(options.article_base_url, page.ref.title);

  ExtractResult result;
  result.tables_seen = static_cast<std::int32_t>(context.table_count());
  const auto& nodes = context.table_nodes();
  for (std::size_t offset = 0; offset < nodes.size(); ++offset) {
    const auto& element = doc.node(nodes[offset]);
    const auto offset32 = static_cast<std::int32_t>(offset);
    if (options.exclude_class) {
      const std::string* cls = element.attribute("class");
      if (cls != nullptr && std::regex_search(*cls, *options.exclude_class)) continue;
    }

    GridResult grid = normalize_grid(read_source_table(doc, nodes[offset]));
    for (auto& w : grid.warnings) result.warnings.push_back({offset32, std::move(w)});
    if (grid.grid.n_rows() == 0 || grid.grid.n_cols() == 0) {
      result.warnings.push_back({offset32, "table has no cells; skipped"});
      continue;
    }

    ExtractedTable table;
    table.table_id = TableId{page.ref.page_id, offset32};
    table.grid = std::move(grid.grid);
    table.header_rows = detect_header(table.grid);
    for (const auto child : element.children) {
      if (doc.node(child).is("caption")) {
        std::string raw;
        collect_text(doc, child, raw);
        if (auto text = normalize_cell_text(raw); !text.empty())
          table.caption = std::move(text);
        break;
      }
    }
    auto window = context.around(offset);
    table.context_before = std::move(window.before);
    table.context_after = std::move(window.after);
    table.page_title = page.ref.title;
    table.url = url;
    table.column_numeric =
        numeric_columns(table.grid, static_cast<std::size_t>(table.header_rows));
    result.tables.push_back(std::move(table));
  }
  return result;
}

}  // namespace wikitables
