#include <gtest/gtest.h>

#include "wikitables/error.hpp"
#include "wikitables/extract.hpp"
#include "wikitables/html.hpp"

using namespace wikitables;

namespace {

RawPage page(const std::string& html, const std::string& title = "Тест") {
  RawPage p;
  p.ref = {42, title, 0};
  p.html = html;
  return p;
}

std::vector<std::string> texts(const ExtractedTable& t, std::size_t row) {
  std::vector<std::string> out;
  for (const auto& c : t.grid.rows[row]) out.push_back(c.text);
  return out;
}

}  // namespace

TEST(Html, DecodesEntities) {
  EXPECT_EQ(html::decode_entities("a &amp; b &lt;&gt; &#1046; &#x416; &nbsp;"),
            "a & b <> Ж Ж \xC2\xA0");
  EXPECT_EQ(html::decode_entities("&unknown; &amp"), "&unknown; &amp");
}

TEST(Html, ImplicitlyClosesTableParts) {
  const auto doc = html::Document::parse("<table><tr><td>a<td>b<tr><td>c</table>");
  std::size_t rows = 0, cells = 0;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    rows += doc.node(i).is("tr");
    cells += doc.node(i).is("td");
  }
  EXPECT_EQ(rows, 2u);
  EXPECT_EQ(cells, 3u);
}

TEST(Html, IgnoresStrayEndTagsAndComments) {
  EXPECT_NO_THROW(html::Document::parse("</div><p>x<!-- <table> --></span></p>"));
  const auto r = extract_tables(page("</td><!-- <table><tr><td>x</td></tr></table> -->"));
  EXPECT_EQ(r.tables_seen, 0);
}

TEST(Html, RejectsInvalidUtf8AndDeepNesting) {
  EXPECT_THROW(html::Document::parse("<p>\xFF</p>"), HtmlError);
  std::string deep;
  for (int i = 0; i < 2000; ++i) deep += "<div>";
  EXPECT_THROW(html::Document::parse(deep), HtmlError);
}

TEST(Extract, CellTextStripsMarkupAndFootnotes) {
  EXPECT_EQ(normalize_cell_text("  Москва[1]\n [12] "), "Москва");
  EXPECT_EQ(normalize_cell_text("a[b] [x1]"), "a[b] [x1]");
  const auto r = extract_tables(page(
      "<table><tr><td><b>Жирный</b>&nbsp;текст<sup class=\"reference\">[3]</sup></td>"
      "<td>a<br>b</td><td><style>.x{}</style>c</td></tr></table>"));
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(texts(r.tables[0], 0), (std::vector<std::string>{"Жирный текст", "a b", "c"}));
}

TEST(Extract, InlineHiddenSortKeysAreNotCellText) {
  const auto r = extract_tables(page(
      "<table><tr><td><span style=\"display: none\">0001</span>Второй</td>"
      "<td><span style=\"DISPLAY:NONE;\">x</span>y<span style=\"color:red\">z</span></td>"
      "</tr></table>"));
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(texts(r.tables[0], 0), (std::vector<std::string>{"Второй", "yz"}));
}

TEST(Extract, SpansHeadersAndCaption) {
  const auto r = extract_tables(page(
      "<table><caption> Итоги </caption><thead><tr><th>Год</th><th colspan=2>Место</th></tr>"
      "</thead><tbody><tr><td rowspan=2>2001</td><td>1</td><td>2</td></tr>"
      "<tr><td>3</td></tr></tbody></table>"));
  ASSERT_EQ(r.tables.size(), 1u);
  const auto& t = r.tables[0];
  EXPECT_EQ(t.caption, "Итоги");
  EXPECT_EQ(t.header_rows, 1);
  EXPECT_EQ(texts(t, 0), (std::vector<std::string>{"Год", "Место", "Место"}));
  EXPECT_EQ(texts(t, 2), (std::vector<std::string>{"2001", "3", ""}));
  EXPECT_EQ(t.grid.at(2, 0).origin, CellOrigin::span_copy);
  EXPECT_EQ(t.grid.at(2, 2).origin, CellOrigin::pad);
  EXPECT_EQ(t.column_numeric, (std::vector<bool>{true, true, true}));
}

TEST(Extract, NestedTablesGetTheirOwnOffsets) {
  const auto r = extract_tables(page(
      "<table><tr><td>outer<table><tr><td>inner</td></tr></table></td><td>x</td></tr>"
      "</table><table><tr><td>third</td></tr></table>"));
  ASSERT_EQ(r.tables.size(), 3u);
  EXPECT_EQ(texts(r.tables[0], 0), (std::vector<std::string>{"outer", "x"}));
  EXPECT_EQ(r.tables[1].table_id.offset, 1);
  EXPECT_EQ(texts(r.tables[1], 0), std::vector<std::string>{"inner"});
  EXPECT_EQ(r.tables[2].table_id.offset, 2);
}

TEST(Extract, EmptyTablesConsumeOffsets) {
  const auto r = extract_tables(
      page("<table></table><table><tr></tr></table><table><tr><td>x</td></tr></table>"));
  EXPECT_EQ(r.tables_seen, 3);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].table_id.offset, 2);
  EXPECT_EQ(r.tables[0].header_rows, 0);
}

TEST(Extract, ExcludedClassesConsumeOffsets) {
  ExtractOptions opts;
  opts.exclude_class = std::regex("\\bnavbox\\b");
  const auto r = extract_tables(
      page("<table class=\"navbox\"><tr><td>n</td></tr></table><table><tr><td>x</td></tr></table>"),
      opts);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].table_id.offset, 1);
}

TEST(Extract, ContextStopsAtSectionHeadings) {
  const auto r = extract_tables(page(
      "<p>раз два</p><h2>Раздел</h2><p>три четыре</p>"
      "<table><tr><td>x</td></tr></table><p>пять</p><h2>Другой</h2><p>шесть</p>"));
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].context_before, (std::vector<std::string>{"три", "четыре"}));
  EXPECT_EQ(r.tables[0].context_after, std::vector<std::string>{"пять"});
}

TEST(Extract, ContextIsLimitedTo200Words) {
  std::string before, after;
  for (int i = 0; i < 250; ++i) before += "b" + std::to_string(i) + " ";
  for (int i = 0; i < 250; ++i) after += "a" + std::to_string(i) + " ";
  const auto r = extract_tables(
      page("<p>" + before + "</p><table><tr><td>x</td></tr></table><p>" + after + "</p>"));
  ASSERT_EQ(r.tables.size(), 1u);
  ASSERT_EQ(r.tables[0].context_before.size(), 200u);
  EXPECT_EQ(r.tables[0].context_before.front(), "b50");
  ASSERT_EQ(r.tables[0].context_after.size(), 200u);
  EXPECT_EQ(r.tables[0].context_after.back(), "a199");
}

TEST(Extract, ArticleUrlEncodesTitle) {
  EXPECT_EQ(article_url("https://ru.wikipedia.org/wiki/", "Москва (река)"),
            "https://ru.wikipedia.org/wiki/%D0%9C%D0%BE%D1%81%D0%BA%D0%B2%D0%B0_(%D1%80%D0%B5%D0%BA%D0%B0)");
  EXPECT_EQ(article_url("b/", "A&B?"), "b/A%26B%3F");
  const auto r = extract_tables(page("<table><tr><td>x</td></tr></table>", "Омск"));
  EXPECT_EQ(r.tables[0].url, "https://ru.wikipedia.org/wiki/%D0%9E%D0%BC%D1%81%D0%BA");
  EXPECT_EQ(r.tables[0].page_title, "Омск");
  EXPECT_EQ(r.tables[0].table_id.page_id, 42);
}

TEST(Extract, ExtractionIsDeterministic) {
  const std::string html =
      "<p>до</p><table><tr><th>a</th></tr><tr><td rowspan=3>1</td></tr></table><p>после</p>";
  EXPECT_EQ(extract_tables(page(html)).tables, extract_tables(page(html)).tables);
}
