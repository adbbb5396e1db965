#include "chartattrib/agents/localization.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/prompts/catalog.hpp"
#include "chartattrib/util/fsio.hpp"

namespace chartattrib::agents {

std::string to_string(MarkKind kind) {
  switch (kind) {
    case MarkKind::bar: return "bar";
    case MarkKind::slice: return "slice";
    case MarkKind::point: return "point";
    case MarkKind::segment: return "segment";
  }
  return "bar";
}

MarkKind mark_kind_from_string(const std::string& s) {
  if (s == "bar") return MarkKind::bar;
  if (s == "slice") return MarkKind::slice;
  if (s == "point") return MarkKind::point;
  if (s == "segment") return MarkKind::segment;
  throw Error("unknown mark kind: " + s);
}

SyntheticOracleDetector::SyntheticOracleDetector(chartgen::GroundTruth gt)
    : gt_(std::move(gt)) {}

namespace {

std::vector<DataMark> marks_from_gt(const chartgen::GroundTruth& gt) {
  std::vector<DataMark> out;
  double side_px = 0.02 * std::min(gt.image_width, gt.image_height);
  double sx = side_px / gt.image_width;
  double sy = side_px / gt.image_height;
  for (const auto& entry : gt.entries) {
    DataMark mark;
    mark.cell = entry.cell;
    if (entry.box) {
      mark.kind = gt.chart_type == core::ChartType::pie ? MarkKind::slice : MarkKind::bar;
      mark.region = *entry.box;
    } else if (!entry.points.empty()) {
      mark.kind = MarkKind::point;
      const core::Point& p = entry.points.front();
      mark.region = {std::clamp(p.x - sx / 2, 0.0, 1.0), std::clamp(p.y - sy / 2, 0.0, 1.0),
                     std::clamp(p.x + sx / 2, 0.0, 1.0), std::clamp(p.y + sy / 2, 0.0, 1.0)};
    } else {
      continue;
    }
    out.push_back(std::move(mark));
  }
  return out;
}

}  // namespace

std::vector<DataMark> SyntheticOracleDetector::detect(const img::Image& image,
                                                      core::ChartType chart_type) {
  if (image.width() != gt_.image_width || image.height() != gt_.image_height) {
    throw DetectorFailure("image dimensions do not match the ground-truth sidecar");
  }
  if (chart_type != gt_.chart_type) {
    throw DetectorFailure("chart type does not match the ground-truth sidecar");
  }
  return marks_from_gt(gt_);
}

std::vector<DataMark> oracle_marks_from_ground_truth(const chartgen::GroundTruth& gt) {
  std::vector<DataMark> marks = marks_from_gt(gt);
  std::stable_sort(marks.begin(), marks.end(), [](const DataMark& a, const DataMark& b) {
    double ax = a.region.cx(), bx = b.region.cx();
    if (ax != bx) return ax < bx;
    return a.region.cy() < b.region.cy();
  });
  for (size_t i = 0; i < marks.size(); ++i) marks[i].id = int(i) + 1;
  return marks;
}

FileDetector::FileDetector(const std::string& detections_json_path) {
  nlohmann::json j = nlohmann::json::parse(util::read_file(detections_json_path));
  for (const auto& jm : j.at("marks")) {
    DataMark mark;
    mark.kind = mark_kind_from_string(jm.at("kind").get<std::string>());
    mark.region = core::bbox_from_json(jm.at("box"));
    marks_.push_back(std::move(mark));
  }
}

std::vector<DataMark> FileDetector::detect(const img::Image&, core::ChartType) {
  return marks_;
}

std::vector<DataMark> detect_marks(const img::Image& image, core::ChartType chart_type,
                                   Detector& detector) {
  std::vector<DataMark> marks;
  try {
    marks = detector.detect(image, chart_type);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw DetectorFailure(std::string("detector '") + detector.identity() +
                          "' failed: " + e.what());
  }
  for (const auto& m : marks) {
    if (!m.region.valid()) {
      throw DetectorFailure("detector returned an invalid mark region");
    }
  }
  std::stable_sort(marks.begin(), marks.end(), [](const DataMark& a, const DataMark& b) {
    double ax = a.region.cx(), bx = b.region.cx();
    if (ax != bx) return ax < bx;
    return a.region.cy() < b.region.cy();
  });
  for (size_t i = 0; i < marks.size(); ++i) marks[i].id = int(i) + 1;
  return marks;
}

img::Image annotate_marks(const img::Image& image, const std::vector<DataMark>& marks) {
  if (marks.empty()) throw Error("annotate_marks needs at least one mark");
  img::Image out = image;
  const img::Color outline{220, 30, 30};
  const img::Color plate{32, 32, 32};
  const img::Color label{255, 255, 255};
  int w = image.width(), h = image.height();
  for (const auto& mark : marks) {
    const core::BBox& r = mark.region;
    out.draw_rect_outline(r.x_min * w, r.y_min * h, r.x_max * w, r.y_max * h, 2, outline);
    double cx = r.cx() * w, cy = r.cy() * h;
    std::string text = std::to_string(mark.id);
    int tw = img::Image::text_width(text, 2);
    int th = img::Image::text_height(2);
    double radius = std::max(10.0, tw / 2.0 + 4.0);
    out.fill_disc(cx, cy, radius, plate);
    out.draw_text(int(cx - tw / 2.0), int(cy - th / 2.0), text, 2, label);
  }
  return out;
}

MappingOutcome map_cells_oracle(const std::vector<DataMark>& marks,
                                const std::vector<core::CellRef>& cited_cells) {
  MappingOutcome out;
  for (const auto& cell : cited_cells) {
    const DataMark* hit = nullptr;
    for (const auto& m : marks) {
      if (m.cell && *m.cell == cell) {
        hit = &m;
        break;
      }
    }
    if (hit) {
      out.assignments.push_back({cell, hit->id});
    } else {
      out.unmapped.push_back(cell);
    }
  }
  return out;
}

MappingOutcome map_cells_to_marks(llm::Gateway& gateway, llm::Backend& backend,
                                  const llm::ImagePart& annotated,
                                  const std::vector<DataMark>& marks,
                                  const std::vector<core::CellRef>& cited_cells,
                                  const core::DataTable& table, const core::Claim& claim,
                                  const std::string& feedback) {
  const auto& tpl = prompts::get("som.map");
  std::string mark_list;
  for (const auto& m : marks) {
    if (!mark_list.empty()) mark_list += ", ";
    mark_list += std::to_string(m.id) + ":" + to_string(m.kind);
  }
  std::string cell_list;
  for (const auto& cell : cited_cells) {
    cell_list += "- cell (" + std::to_string(cell.row) + ", " + std::to_string(cell.col) +
                 "): " + table.row_headers()[cell.row] + " / " +
                 table.column_headers()[cell.col] + " = " +
                 core::format_cell(table.at(cell.row, cell.col)) + "\n";
  }
  std::string user = prompts::render(
      tpl.user, {{"marks", mark_list}, {"claim", claim.text}, {"cells", cell_list}});
  if (!feedback.empty()) {
    user += "\nA previous attempt was rejected by verification: " + feedback +
            "\nReassign more carefully.";
  }
  llm::Prompt prompt = llm::make_prompt(tpl.system, {llm::TextPart{user}, annotated});
  nlohmann::json schema = {
      {"type", "object"},
      {"required", {"assignments"}},
      {"properties",
       {{"assignments",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"cell", "mark"}},
            {"properties",
             {{"cell", {{"type", "array"}, {"items", {{"type", "integer"}}}}},
              {"mark", {{"type", "integer"}}}}}}}}}}}};
  nlohmann::json v = gateway.complete_structured(backend, prompt, schema);

  MappingOutcome out;
  std::set<std::pair<int, int>> assigned;
  for (const auto& ja : v.at("assignments")) {
    if (ja.at("cell").size() != 2) continue;
    core::CellRef cell{ja.at("cell").at(0).get<int>(), ja.at("cell").at(1).get<int>()};
    int mark_id = ja.at("mark").get<int>();
    bool known = std::any_of(marks.begin(), marks.end(),
                             [&](const DataMark& m) { return m.id == mark_id; });
    bool cited = std::any_of(cited_cells.begin(), cited_cells.end(),
                             [&](const core::CellRef& c) { return c == cell; });
    if (!known || !cited || assigned.count({cell.row, cell.col})) continue;
    assigned.insert({cell.row, cell.col});
    out.assignments.push_back({cell, mark_id});
  }
  for (const auto& cell : cited_cells) {
    if (!assigned.count({cell.row, cell.col})) out.unmapped.push_back(cell);
  }
  return out;
}

ReflectionVerdict verify_localization(llm::Gateway& gateway, llm::Backend& backend,
                                      const llm::ImagePart& image,
                                      const std::vector<core::BBox>& boxes,
                                      const core::Claim& claim) {
  if (boxes.empty()) throw Error("verify_localization needs at least one box");
  const auto& tpl = prompts::get("som.verify");
  nlohmann::json jboxes = nlohmann::json::array();
  for (const auto& b : boxes) jboxes.push_back(core::bbox_to_json(b));
  std::string user =
      prompts::render(tpl.user, {{"boxes", jboxes.dump()}, {"claim", claim.text}});
  llm::Prompt prompt = llm::make_prompt(tpl.system, {llm::TextPart{user}, image});
  nlohmann::json schema = {
      {"type", "object"},
      {"required", {"consistent"}},
      {"properties",
       {{"consistent", {{"type", "boolean"}}},
        {"discrepancies", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
  nlohmann::json v = gateway.complete_structured(backend, prompt, schema);
  ReflectionVerdict verdict;
  verdict.consistent = v.at("consistent").get<bool>();
  for (const auto& d : v.value("discrepancies", nlohmann::json::array())) {
    verdict.discrepancies.push_back(d.get<std::string>());
  }
  if (verdict.consistent && !verdict.discrepancies.empty()) verdict.consistent = false;
  return verdict;
}

namespace {

core::BBox region_for_mark(const std::vector<DataMark>& marks, int id) {
  for (const auto& m : marks) {
    if (m.id == id) return m.region;
  }
  throw Error("mark id not found: " + std::to_string(id));
}

std::vector<core::BBox> boxes_of(const MappingOutcome& outcome,
                                 const std::vector<DataMark>& marks) {
  std::vector<core::BBox> boxes;
  for (const auto& a : outcome.assignments) boxes.push_back(region_for_mark(marks, a.mark_id));
  return boxes;
}

}  // namespace

LocalizationResult localize_cells(llm::Gateway& gateway, llm::Backend& backend,
                                  const img::Image& chart,
                                  const llm::ImagePart& annotated,
                                  const std::vector<DataMark>& marks,
                                  const std::vector<core::CellRef>& cited_cells,
                                  const core::DataTable& table, const core::Claim& claim,
                                  const LocalizeOptions& opts) {
  (void)chart;
  LocalizationResult result;
  bool oracle_path = opts.use_oracle_mapping &&
                     std::all_of(marks.begin(), marks.end(),
                                 [](const DataMark& m) { return m.cell.has_value(); });

  MappingOutcome outcome =
      oracle_path ? map_cells_oracle(marks, cited_cells)
                  : map_cells_to_marks(gateway, backend, annotated, marks, cited_cells,
                                       table, claim);
  if (oracle_path) {
    result.assignments = outcome.assignments;
    result.unmapped = outcome.unmapped;
    result.verified = true;  // assignments are ground truth by construction
    return result;
  }

  std::vector<core::BBox> boxes = boxes_of(outcome, marks);
  bool verified = false;
  if (!boxes.empty()) {
    ReflectionVerdict verdict = verify_localization(gateway, backend, annotated, boxes, claim);
    if (!verdict.consistent) {
      // One retry with the verdict folded into the mapping prompt.
      std::string feedback;
      for (const auto& d : verdict.discrepancies) feedback += d + "; ";
      outcome = map_cells_to_marks(gateway, backend, annotated, marks, cited_cells, table,
                                   claim, feedback.empty() ? "inconsistent" : feedback);
      boxes = boxes_of(outcome, marks);
      if (!boxes.empty()) {
        verdict = verify_localization(gateway, backend, annotated, boxes, claim);
        verified = verdict.consistent;
      }
    } else {
      verified = true;
    }
  }
  result.assignments = outcome.assignments;
  result.unmapped = outcome.unmapped;
  result.verified = verified;
  return result;
}

std::vector<core::BBox> direct_bbox_baseline(llm::Gateway& gateway, llm::Backend& backend,
                                             const llm::ImagePart& image,
                                             const core::Claim& claim) {
  const auto& tpl = prompts::get("baseline.bbox");
  std::string user = prompts::render(tpl.user, {{"claim", claim.text}});
  llm::Prompt prompt = llm::make_prompt(tpl.system, {llm::TextPart{user}, image});
  nlohmann::json schema = {
      {"type", "object"},
      {"required", {"boxes"}},
      {"properties",
       {{"boxes",
         {{"type", "array"},
          {"items", {{"type", "array"}, {"items", {{"type", "number"}}}}}}}}}};
  nlohmann::json v = gateway.complete_structured(backend, prompt, schema);

  std::vector<core::BBox> out;
  for (const auto& jb : v.at("boxes")) {
    if (jb.size() != 4) continue;
    double x0 = jb.at(0).get<double>(), y0 = jb.at(1).get<double>();
    double x1 = jb.at(2).get<double>(), y1 = jb.at(3).get<double>();
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1)) {
      continue;
    }
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    core::BBox box{std::clamp(x0, 0.0, 1.0), std::clamp(y0, 0.0, 1.0),
                   std::clamp(x1, 0.0, 1.0), std::clamp(y1, 0.0, 1.0)};
    if (box.valid()) out.push_back(box);
  }
  return out;
}

}  // namespace chartattrib::agents
