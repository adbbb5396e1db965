#include <doctest.h>

#include <filesystem>
#include <set>

#include "chartattrib/agents/localization.hpp"
#include "chartattrib/chartgen/render.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/llm/mock_backend.hpp"
#include "chartattrib/util/fsio.hpp"

using namespace chartattrib;
using core::CellValue;
using llm::Gateway;
using llm::ScriptedMock;

namespace {

struct Rendered {
  core::DataTable table;
  chartgen::RenderResult render;
  img::Image image;
};

Rendered rendered_chart(core::ChartType type, std::vector<std::vector<double>> values) {
  std::vector<std::string> cols, rows;
  for (size_t c = 0; c < values[0].size(); ++c) cols.push_back("C" + std::to_string(c));
  for (size_t r = 0; r < values.size(); ++r) rows.push_back("R" + std::to_string(r));
  std::vector<std::vector<CellValue>> cells;
  for (const auto& row : values) {
    std::vector<CellValue> out;
    for (double v : row) out.emplace_back(v);
    cells.push_back(std::move(out));
  }
  core::DataTable table(cols, rows, cells);
  auto render = chartgen::render_chart(table, type, chartgen::default_layout(type), 3);
  img::Image image = img::decode_png(render.png);
  return {std::move(table), std::move(render), std::move(image)};
}

}  // namespace

TEST_CASE("oracle detector reproduces ground-truth regions with cells attached") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20}});
  agents::SyntheticOracleDetector detector(r.render.ground_truth);
  auto marks = agents::detect_marks(r.image, core::ChartType::bar, detector);
  REQUIRE(marks.size() == 2);
  CHECK(marks[0].id == 1);
  CHECK(marks[1].id == 2);
  for (const auto& mark : marks) {
    REQUIRE(mark.cell.has_value());
    const auto* entry = r.render.ground_truth.find(*mark.cell);
    REQUIRE(entry);
    CHECK(mark.region == *entry->box);
    CHECK(mark.kind == agents::MarkKind::bar);
  }
  // Ids run left to right.
  CHECK(marks[0].region.cx() < marks[1].region.cx());
}

TEST_CASE("oracle detector: four-slice pie yields slice marks for row cells") {
  auto r = rendered_chart(core::ChartType::pie, {{1, 1, 1, 1}});
  agents::SyntheticOracleDetector detector(r.render.ground_truth);
  auto marks = agents::detect_marks(r.image, core::ChartType::pie, detector);
  REQUIRE(marks.size() == 4);
  std::set<int> cols;
  for (const auto& mark : marks) {
    CHECK(mark.kind == agents::MarkKind::slice);
    REQUIRE(mark.cell.has_value());
    CHECK(mark.cell->row == 0);
    cols.insert(mark.cell->col);
  }
  CHECK(cols == std::set<int>{0, 1, 2, 3});
}

TEST_CASE("line marks are 2% squares centered on the data points") {
  auto r = rendered_chart(core::ChartType::line, {{1, 5, 3}});
  auto marks = agents::oracle_marks_from_ground_truth(r.render.ground_truth);
  REQUIRE(marks.size() == 3);
  double side = 0.02 * std::min(r.image.width(), r.image.height());
  for (const auto& mark : marks) {
    CHECK(mark.kind == agents::MarkKind::point);
    CHECK(mark.region.width() * r.image.width() == doctest::Approx(side).epsilon(1e-9));
  }
}

TEST_CASE("detect_marks ordering is deterministic and ids are 1..n") {
  auto r = rendered_chart(core::ChartType::bar, {{5, 9, 2}, {7, 1, 4}});
  agents::SyntheticOracleDetector detector(r.render.ground_truth);
  auto a = agents::detect_marks(r.image, core::ChartType::bar, detector);
  auto b = agents::detect_marks(r.image, core::ChartType::bar, detector);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == int(i) + 1);
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].cell == b[i].cell);
  }
}

TEST_CASE("empty chart yields no marks") {
  chartgen::GroundTruth gt;
  gt.chart_type = core::ChartType::bar;
  gt.image_width = 100;
  gt.image_height = 100;
  agents::SyntheticOracleDetector detector(gt);
  img::Image image(100, 100);
  CHECK(agents::detect_marks(image, core::ChartType::bar, detector).empty());
}

TEST_CASE("file detector adapts external detections json") {
  auto path = std::filesystem::temp_directory_path() / "chartattrib_detections.json";
  util::write_file_atomic(path.string(),
                          R"({"marks": [{"kind": "bar", "box": [0.1, 0.2, 0.3, 0.9]},
                                        {"kind": "point", "box": [0.5, 0.5, 0.52, 0.52]}]})");
  agents::FileDetector detector(path.string());
  img::Image image(50, 50);
  auto marks = agents::detect_marks(image, core::ChartType::bar, detector);
  REQUIRE(marks.size() == 2);
  CHECK(marks[0].kind == agents::MarkKind::bar);
  CHECK_FALSE(marks[0].cell.has_value());
}

TEST_CASE("annotate_marks changes pixels only near the mark, ids 1..n") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20}});
  agents::SyntheticOracleDetector detector(r.render.ground_truth);
  auto marks = agents::detect_marks(r.image, core::ChartType::bar, detector);
  std::vector<agents::DataMark> one = {marks[0]};
  img::Image annotated = agents::annotate_marks(r.image, one);
  REQUIRE(annotated.width() == r.image.width());
  REQUIRE(annotated.height() == r.image.height());

  // Pixel diff must stay within the mark region inflated by the outline
  // width and the label backplate radius.
  const core::BBox& region = one[0].region;
  int w = r.image.width(), h = r.image.height();
  double pad = 16.0;
  int lo_x = int(region.x_min * w - pad), hi_x = int(region.x_max * w + pad);
  int lo_y = int(region.y_min * h - pad), hi_y = int(region.y_max * h + pad);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (annotated.get(x, y) == r.image.get(x, y)) continue;
      CHECK(x >= lo_x);
      CHECK(x <= hi_x);
      CHECK(y >= lo_y);
      CHECK(y <= hi_y);
    }
  }

  CHECK_THROWS_AS(agents::annotate_marks(r.image, {}), Error);
}

TEST_CASE("map_cells_to_marks keeps known ids and reports unmapped cells") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20}});
  agents::SyntheticOracleDetector detector(r.render.ground_truth);
  auto marks = agents::detect_marks(r.image, core::ChartType::bar, detector);
  auto annotated =
      llm::make_image_part(img::encode_png(agents::annotate_marks(r.image, marks)));
  core::Claim claim{0, "R0 in C1 is 20"};

  ScriptedMock mock("t", {{"TASK: map-cells", "",
                           R"({"assignments": [{"cell": [0, 1], "mark": 2},
                                               {"cell": [0, 0], "mark": 9}]})",
                           true, 0}});
  Gateway gw;
  auto outcome = agents::map_cells_to_marks(gw, mock, annotated, marks, {{0, 1}, {0, 0}},
                                            r.table, claim);
  REQUIRE(outcome.assignments.size() == 1);
  CHECK(outcome.assignments[0].cell == core::CellRef{0, 1});
  CHECK(outcome.assignments[0].mark_id == 2);
  REQUIRE(outcome.unmapped.size() == 1);
  CHECK(outcome.unmapped[0] == core::CellRef{0, 0});
}

TEST_CASE("oracle mapping path assigns every cell its ground-truth mark") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20, 30}});
  auto marks = agents::oracle_marks_from_ground_truth(r.render.ground_truth);
  auto outcome = agents::map_cells_oracle(marks, {{0, 2}, {0, 0}});
  REQUIRE(outcome.assignments.size() == 2);
  for (const auto& a : outcome.assignments) {
    const auto* entry = r.render.ground_truth.find(a.cell);
    REQUIRE(entry);
    core::BBox region;
    for (const auto& m : marks) {
      if (m.id == a.mark_id) region = m.region;
    }
    CHECK(region == *entry->box);
  }
}

TEST_CASE("localize_cells verifies, retries once, then gives up") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20}});
  agents::SyntheticOracleDetector detector(r.render.ground_truth);
  auto marks = agents::detect_marks(r.image, core::ChartType::bar, detector);
  auto annotated =
      llm::make_image_part(img::encode_png(agents::annotate_marks(r.image, marks)));
  core::Claim claim{0, "R0 in C1 is 20"};
  Gateway gw;

  SUBCASE("consistent on the first verify") {
    ScriptedMock mock("t",
                      {{"TASK: map-cells", "",
                        R"({"assignments": [{"cell": [0, 1], "mark": 2}]})", true, 0},
                       {"TASK: verify-citation", "",
                        R"({"consistent": true, "discrepancies": []})", true, 0}});
    auto result = agents::localize_cells(gw, mock, r.image, annotated, marks, {{0, 1}},
                                         r.table, claim);
    CHECK(result.verified);
    REQUIRE(result.assignments.size() == 1);
    CHECK(mock.calls() == 2);
  }

  SUBCASE("inconsistent then consistent: two mapping calls") {
    ScriptedMock mock(
        "t", {{"TASK: map-cells", "", R"({"assignments": [{"cell": [0, 1], "mark": 1}]})",
               true, 0},
              {"TASK: verify-citation", "",
               R"({"consistent": false, "discrepancies": ["wrong bar"]})", true, 0},
              {"TASK: map-cells", "", R"({"assignments": [{"cell": [0, 1], "mark": 2}]})",
               true, 0},
              {"TASK: verify-citation", "",
               R"({"consistent": true, "discrepancies": []})", true, 0}});
    auto result = agents::localize_cells(gw, mock, r.image, annotated, marks, {{0, 1}},
                                         r.table, claim);
    CHECK(result.verified);
    REQUIRE(result.assignments.size() == 1);
    CHECK(result.assignments[0].mark_id == 2);
    CHECK(mock.calls() == 4);
  }

  SUBCASE("inconsistent twice: result still returned, verified=false") {
    ScriptedMock mock(
        "t", {{"TASK: map-cells", "", R"({"assignments": [{"cell": [0, 1], "mark": 1}]})",
               false, 0},
              {"TASK: verify-citation", "",
               R"({"consistent": false, "discrepancies": ["still wrong"]})", false, 0}});
    auto result = agents::localize_cells(gw, mock, r.image, annotated, marks, {{0, 1}},
                                         r.table, claim);
    CHECK_FALSE(result.verified);
    REQUIRE(result.assignments.size() == 1);
  }
}

TEST_CASE("direct_bbox_baseline clamps, swaps, and drops boxes") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20}});
  auto image = llm::make_image_part(r.render.png);
  core::Claim claim{0, "anything"};
  Gateway gw;

  ScriptedMock mock("t", {{"TASK: direct-bbox", "",
                           R"({"boxes": [[0.1, 0.1, 0.3, 0.9]]})", true, 0}});
  auto boxes = agents::direct_bbox_baseline(gw, mock, image, claim);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == core::BBox{0.1, 0.1, 0.3, 0.9});

  ScriptedMock swapped("t", {{"TASK: direct-bbox", "",
                              R"({"boxes": [[0.5, 0.5, 0.2, 0.9]]})", true, 0}});
  boxes = agents::direct_bbox_baseline(gw, swapped, image, claim);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == core::BBox{0.2, 0.5, 0.5, 0.9});

  ScriptedMock empty("t", {{"TASK: direct-bbox", "", R"({"boxes": []})", true, 0}});
  CHECK(agents::direct_bbox_baseline(gw, empty, image, claim).empty());
}

TEST_CASE("every emitted baseline box satisfies the bbox invariants") {
  auto r = rendered_chart(core::ChartType::bar, {{10, 20}});
  auto image = llm::make_image_part(r.render.png);
  Gateway gw;
  ScriptedMock wild("t", {{"TASK: direct-bbox", "",
                           R"({"boxes": [[-3, 0.5, 7, 0.1], [0.2, 0.2, 0.4, 0.4],
                                         [2, 2, 3, 3]]})",
                           true, 0}});
  auto boxes = agents::direct_bbox_baseline(gw, wild, image, {0, "x"});
  for (const auto& b : boxes) CHECK(b.valid());
  CHECK(boxes.size() == 3);  // all repairable after swap + clamp
}
