#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wikitables/grid.hpp"

using namespace wikitables;
using namespace wikitables::testing;

namespace {

SourceCell cell(const std::string& text, long rs = 1, long cs = 1, bool th = false) {
  return SourceCell{text, th, rs, cs};
}

}  // namespace

TEST(ParseSpan, BrowserLikeParsing) {
  const auto span = [](const char* s) {
    const std::string v = s;
    return parse_span(&v);
  };
  EXPECT_EQ(parse_span(nullptr), 1);
  EXPECT_EQ(span("3"), 3);
  EXPECT_EQ(span(" 2px"), 2);
  EXPECT_EQ(span("abc"), 1);
  EXPECT_EQ(span(""), 1);
  EXPECT_EQ(span("-2"), -2);
  EXPECT_EQ(span("99999999999999"), 1'000'000'000);
}

TEST(NormalizeGrid, RowspanAndColspanOverlap) {
  // Row 0: A spans 2 rows, B spans 2 cols. Row 1: C lands after A's copy.
  SourceTable t{{{cell("A", 2), cell("B", 1, 2)}, {cell("C"), cell("D")}}};
  const auto g = normalize_grid(t).grid;
  ASSERT_EQ(g.n_cols(), 3u);
  EXPECT_EQ(g.at(1, 0).text, "A");
  EXPECT_EQ(g.at(1, 0).origin, CellOrigin::span_copy);
  EXPECT_EQ(g.at(1, 1).text, "C");
  EXPECT_EQ(g.at(1, 2).text, "D");
}

TEST(NormalizeGrid, FirstOccupantWinsOnConflicts) {
  // B's colspan reaches into the slot already claimed by A's rowspan.
  SourceTable t{{{cell("x"), cell("A", 2)}, {cell("B", 1, 3)}}};
  const auto g = normalize_grid(t).grid;
  ASSERT_EQ(g.n_cols(), 3u);
  EXPECT_EQ(g.at(1, 1).text, "A");
  EXPECT_EQ(g.at(1, 2).text, "B");
  EXPECT_EQ(g.at(0, 2).origin, CellOrigin::pad);
}

TEST(NormalizeGrid, ClampsBadSpansWithWarnings) {
  SourceTable t{{{cell("a", 0, 1001), cell("b", -1, 1)}, {cell("c", 5000, 1)}}};
  const auto r = normalize_grid(t);
  EXPECT_EQ(r.warnings.size(), 4u);
  EXPECT_EQ(r.grid.n_cols(), 2u);
  EXPECT_EQ(r.grid.n_rows(), 2u);
}

TEST(NormalizeGrid, RowspanClippedAtLastRow) {
  SourceTable t{{{cell("a", 10)}, {}}};
  const auto g = normalize_grid(t).grid;
  EXPECT_EQ(g.n_rows(), 2u);
  EXPECT_EQ(g.at(1, 0).text, "a");
}

TEST(NormalizeGrid, PadsShortRows) {
  SourceTable t{{{cell("a"), cell("b"), cell("c")}, {cell("d")}}};
  const auto g = normalize_grid(t).grid;
  EXPECT_TRUE(g.rectangular());
  EXPECT_EQ(g.at(1, 2).origin, CellOrigin::pad);
}

TEST(NormalizeGrid, MatchesOccupancyOracleOnRandomTables) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const SourceTable t = random_source_table(rng);
    const auto g = normalize_grid(t).grid;
    ASSERT_EQ(g, oracle_expand(t)) << "case " << i;
    EXPECT_TRUE(g.rectangular());
  }
}

TEST(DetectHeader, LeadingAllHeaderRows) {
  SourceTable t{{{cell("h", 1, 1, true), cell("h2", 1, 1, true)},
                 {cell("s", 1, 1, true)},
                 {cell("d"), cell("e", 1, 1, true)},
                 {cell("h", 1, 1, true)}}};
  // Row 1 is a header row: its pad cell is ignored.
  EXPECT_EQ(detect_header(normalize_grid(t).grid), 2);
  EXPECT_EQ(detect_header(CellGrid{}), 0);
}
