#include <doctest.h>

#include <random>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/core/html_table.hpp"
#include "chartattrib/core/types.hpp"

using namespace chartattrib;
using core::CellValue;
using core::DataTable;

namespace {

DataTable make_table(std::vector<std::string> cols, std::vector<std::string> rows,
                     std::vector<std::vector<CellValue>> cells) {
  return DataTable(std::move(cols), std::move(rows), std::move(cells));
}

// Random canonical table for round-trip properties.
DataTable random_table(std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> value(-1000, 1000);
  int rows = dim(rng), cols = dim(rng);
  std::vector<std::string> col_headers, row_headers;
  for (int c = 0; c < cols; ++c) col_headers.push_back("C" + std::to_string(c));
  for (int r = 0; r < rows; ++r) row_headers.push_back("R" + std::to_string(r));
  std::vector<std::vector<CellValue>> cells;
  for (int r = 0; r < rows; ++r) {
    std::vector<CellValue> row;
    for (int c = 0; c < cols; ++c) {
      switch (pick(rng)) {
        case 0: row.emplace_back(double(int(value(rng)))); break;
        case 1: row.emplace_back(value(rng)); break;
        case 2: row.emplace_back(std::string("text <") + std::to_string(c) + "& quote\""); break;
        default: row.emplace_back(std::string("plain")); break;
      }
    }
    cells.push_back(std::move(row));
  }
  return make_table(std::move(col_headers), std::move(row_headers), std::move(cells));
}

}  // namespace

TEST_CASE("parse_table_html transcribes a minimal table") {
  auto t = core::parse_table_html(
      "<table><tr><th></th><th>2020</th></tr><tr><th>A</th><td>10</td></tr></table>");
  CHECK(t.column_headers() == std::vector<std::string>{"2020"});
  CHECK(t.row_headers() == std::vector<std::string>{"A"});
  REQUIRE(t.rows() == 1);
  REQUIRE(t.cols() == 1);
  CHECK(core::cell_is_number(t.at(0, 0)));
  CHECK(core::cell_number(t.at(0, 0)) == 10.0);
}

TEST_CASE("parse_table_html rejects degenerate input") {
  CHECK_THROWS_AS(core::parse_table_html(""), MalformedHtml);
  CHECK_THROWS_AS(core::parse_table_html("<div>no table here</div>"), MalformedHtml);
  CHECK_THROWS_AS(core::parse_table_html("<table><tr><td>x</td>"), MalformedHtml);
}

TEST_CASE("parse_table_html rejects ragged rows") {
  CHECK_THROWS_AS(core::parse_table_html("<table>"
                                         "<tr><th></th><th>A</th><th>B</th></tr>"
                                         "<tr><th>r</th><td>1</td></tr>"
                                         "</table>"),
                  RaggedRows);
}

TEST_CASE("3x2 fixture round-trips through serialize then parse") {
  auto t = make_table({"Q1", "Q2"}, {"North", "South", "West"},
                      {{CellValue(1.5), CellValue(std::string("n/a"))},
                       {CellValue(-3.0), CellValue(12345.0)},
                       {CellValue(std::string("x<y&z")), CellValue(0.0)}});
  auto back = core::parse_table_html(core::serialize_table_html(t));
  CHECK(back == t);
}

TEST_CASE("serialize emits exactly one td for a 1x1 table") {
  auto t = make_table({"C"}, {"R"}, {{CellValue(7.0)}});
  std::string html = core::serialize_table_html(t);
  size_t first = html.find("<td>");
  CHECK(first != std::string::npos);
  CHECK(html.find("<td>", first + 1) == std::string::npos);
}

TEST_CASE("round-trip identity holds on random tables") {
  std::mt19937 rng(20240811);
  for (int i = 0; i < 20; ++i) {
    DataTable t = random_table(rng);
    CAPTURE(i);
    DataTable back = core::parse_table_html(core::serialize_table_html(t));
    CHECK(back == t);
  }
}

TEST_CASE("cell text with markup round-trips entity-escaped") {
  auto t = make_table({"C"}, {"R"}, {{CellValue(std::string("a<b>&c"))}});
  std::string html = core::serialize_table_html(t);
  CHECK(html.find("a&lt;b&gt;&amp;c") != std::string::npos);
  CHECK(core::parse_table_html(html) == t);
}

TEST_CASE("numeric cell detection is strict") {
  CHECK(core::cell_is_number(core::normalize_cell_text(" 42 ")));
  CHECK(core::cell_is_number(core::normalize_cell_text("-0.5")));
  CHECK(core::cell_is_number(core::normalize_cell_text("+7")));
  CHECK(core::cell_is_number(core::normalize_cell_text("1,234,567.5")));
  CHECK(core::cell_number(core::normalize_cell_text("1,234,567.5")) == 1234567.5);
  CHECK(core::cell_is_number(core::normalize_cell_text("1e3")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("1,23")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("12,34")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("4 2")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("nan")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("inf")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("")));
  CHECK_FALSE(core::cell_is_number(core::normalize_cell_text("x10")));
}

TEST_CASE("DataTable rejects ragged grids") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim(2, 6);
  for (int i = 0; i < 50; ++i) {
    int rows = dim(rng), cols = dim(rng);
    std::vector<std::vector<CellValue>> cells(rows, std::vector<CellValue>(cols, CellValue(1.0)));
    // Break one row's width.
    int bad = std::uniform_int_distribution<int>(0, rows - 1)(rng);
    cells[bad].push_back(CellValue(2.0));
    std::vector<std::string> col_headers(cols, "c"), row_headers(rows, "r");
    CHECK_THROWS_AS(DataTable(col_headers, row_headers, cells), InvalidTable);
  }
  CHECK_THROWS_AS(make_table({}, {"r"}, {{}}), InvalidTable);
  CHECK_THROWS_AS(make_table({"c"}, {}, {}), InvalidTable);
}

TEST_CASE("table json round-trip") {
  auto t = make_table({"A", "B"}, {"r1"}, {{CellValue(1.0), CellValue(std::string("two"))}});
  auto j = core::table_to_json(t);
  CHECK(j.at("cells").at(0).at(0).is_number());
  CHECK(j.at("cells").at(0).at(1).is_string());
  CHECK(core::table_from_json(j) == t);
}

TEST_CASE("validate_citation covers the spec cases") {
  auto t = make_table({"C"}, {"R"}, {{CellValue(5.0)}});
  core::Citation ok;
  ok.claim_index = 0;
  ok.cells = {{0, 0}};
  ok.boxes = {{0, 0, 1, 1}};
  CHECK(core::validate_citation(ok, t).empty());

  core::Citation bad_row = ok;
  bad_row.cells = {{2, 0}};
  auto violations = core::validate_citation(bad_row, t);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("row out of range") != std::string::npos);

  core::Citation inverted = ok;
  inverted.boxes = {{0.9, 0.0, 0.1, 1.0}};
  violations = core::validate_citation(inverted, t);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("inverted") != std::string::npos);

  core::Citation empty_cells = ok;
  empty_cells.cells.clear();
  CHECK_FALSE(core::validate_citation(empty_cells, t).empty());
}

TEST_CASE("bbox violations") {
  CHECK(core::BBox{0, 0, 1, 1}.valid());
  CHECK(core::BBox{0.5, 0.5, 0.5, 0.5}.valid());
  CHECK_FALSE(core::BBox{-0.1, 0, 1, 1}.valid());
  CHECK_FALSE(core::BBox{0, 0, 1.5, 1}.valid());
  CHECK_FALSE(core::BBox{0.6, 0, 0.4, 1}.valid());
}

TEST_CASE("citations json round-trip") {
  core::Citation c;
  c.claim_index = 1;
  c.claim_text = "B was 20 in 2021";
  c.cells = {{0, 1}, {1, 1}};
  c.boxes = {{0.1, 0.2, 0.3, 0.4}};
  c.rationale = "direct match";
  auto j = core::citations_to_json("sample-1", {c});
  CHECK(j.at("sample_id") == "sample-1");
  auto back = core::citations_from_json(j);
  REQUIRE(back.size() == 1);
  CHECK(back[0].claim_index == 1);
  CHECK(back[0].claim_text == c.claim_text);
  CHECK(back[0].cells == c.cells);
  CHECK(back[0].boxes == c.boxes);
}
