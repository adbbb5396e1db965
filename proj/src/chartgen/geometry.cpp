#include "chartattrib/chartgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::chartgen {

void Layout::validate() const {
  if (width <= 0 || height <= 0) throw Error("layout: image dimensions must be positive");
  if (!plot.valid() || plot.width() <= 0 || plot.height() <= 0) {
    throw Error("layout: plot rect must be a proper box within [0,1]^2");
  }
  if (bar_gap < 0 || bar_gap >= 1) throw Error("layout: bar gap must be in [0,1)");
  if (pie_radius <= 0) throw Error("layout: pie radius must be positive");
}

nlohmann::json Layout::to_json() const {
  return {{"width", width},
          {"height", height},
          {"plot", core::bbox_to_json(plot)},
          {"bar_gap", bar_gap},
          {"pie_center", {pie_center.x, pie_center.y}},
          {"pie_radius", pie_radius}};
}

Layout Layout::from_json(const nlohmann::json& j) {
  Layout l;
  l.width = j.value("width", l.width);
  l.height = j.value("height", l.height);
  if (j.contains("plot")) l.plot = core::bbox_from_json(j.at("plot"));
  l.bar_gap = j.value("bar_gap", l.bar_gap);
  if (j.contains("pie_center")) {
    l.pie_center = {j.at("pie_center").at(0).get<double>(),
                    j.at("pie_center").at(1).get<double>()};
  }
  l.pie_radius = j.value("pie_radius", l.pie_radius);
  l.validate();
  return l;
}

const GtEntry* GroundTruth::find(core::CellRef cell) const {
  for (const auto& e : entries) {
    if (e.cell == cell) return &e;
  }
  return nullptr;
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json je = {{"cell", {e.cell.row, e.cell.col}},
                         {"color", {e.color.r, e.color.g, e.color.b}}};
    if (e.box) je["box"] = core::bbox_to_json(*e.box);
    if (e.sector) {
      je["sector"] = {{"center", {e.sector->center.x, e.sector->center.y}},
                      {"radius", e.sector->radius},
                      {"start_deg", e.sector->start_deg},
                      {"extent_deg", e.sector->extent_deg}};
    }
    if (!e.points.empty()) {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& p : e.points) pts.push_back({p.x, p.y});
      je["points"] = std::move(pts);
    }
    arr.push_back(std::move(je));
  }
  return {{"chart_type", core::to_string(chart_type)},
          {"image", {{"width", image_width}, {"height", image_height}}},
          {"entries", std::move(arr)}};
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
  GroundTruth gt;
  gt.chart_type = core::chart_type_from_string(j.at("chart_type").get<std::string>());
  gt.image_width = j.at("image").at("width").get<int>();
  gt.image_height = j.at("image").at("height").get<int>();
  for (const auto& je : j.at("entries")) {
    GtEntry e;
    e.cell = {je.at("cell").at(0).get<int>(), je.at("cell").at(1).get<int>()};
    if (je.contains("color")) {
      e.color = {je.at("color").at(0).get<uint8_t>(), je.at("color").at(1).get<uint8_t>(),
                 je.at("color").at(2).get<uint8_t>()};
    }
    if (je.contains("box")) e.box = core::bbox_from_json(je.at("box"));
    if (je.contains("sector")) {
      const auto& js = je.at("sector");
      Sector s;
      s.center = {js.at("center").at(0).get<double>(), js.at("center").at(1).get<double>()};
      s.radius = js.at("radius").get<double>();
      s.start_deg = js.at("start_deg").get<double>();
      s.extent_deg = js.at("extent_deg").get<double>();
      e.sector = s;
    }
    if (je.contains("points")) {
      for (const auto& jp : je.at("points")) {
        e.points.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
      }
    }
    gt.entries.push_back(std::move(e));
  }
  return gt;
}

std::vector<std::vector<core::BBox>> bar_geometry(
    const std::vector<std::vector<double>>& values, const Layout& layout) {
  layout.validate();
  if (values.empty() || values[0].empty()) throw UnrenderableTable("no values to lay out");
  size_t series = values.size();
  size_t groups = values[0].size();
  double max_value = 0;
  for (const auto& row : values) {
    if (row.size() != groups) throw UnrenderableTable("ragged value grid");
    for (double v : row) {
      if (!std::isfinite(v)) throw UnrenderableTable("non-finite value");
      if (v < 0) throw UnrenderableTable("negative bar value");
      max_value = std::max(max_value, v);
    }
  }
  if (max_value <= 0) throw AllZeroValues("all bar values are zero");

  const core::BBox& plot = layout.plot;
  double slot_w = plot.width() / double(groups);
  double margin = slot_w * layout.bar_gap / 2.0;
  double bar_w = slot_w * (1.0 - layout.bar_gap) / double(series);
  std::vector<std::vector<core::BBox>> out(series, std::vector<core::BBox>(groups));
  for (size_t g = 0; g < groups; ++g) {
    double slot_x0 = plot.x_min + slot_w * double(g);
    for (size_t s = 0; s < series; ++s) {
      double x0 = slot_x0 + margin + bar_w * double(s);
      double h = values[s][g] / max_value * plot.height();
      out[s][g] = core::BBox{x0, plot.y_max - h, x0 + bar_w, plot.y_max};
    }
  }
  return out;
}

std::vector<double> pie_angles(const std::vector<double>& values) {
  if (values.empty()) throw ZeroSum("empty pie");
  double sum = 0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0) throw UnrenderableTable("pie values must be >= 0");
    sum += v;
  }
  if (sum <= 0) throw ZeroSum("pie values sum to zero");
  std::vector<double> extents(values.size());
  double consumed = 0;
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    extents[i] = 360.0 * values[i] / sum;
    consumed += extents[i];
  }
  extents.back() = 360.0 - consumed;
  // The last slice takes the remainder; nudge it until the sequential sum
  // reproduces 360 bit-exactly (one pass is usually enough, the rounding
  // of the re-summation can cost an ulp).
  for (int pass = 0; pass < 32; ++pass) {
    double total = 0;
    for (double e : extents) total += e;
    double err = total - 360.0;
    if (err == 0.0) break;
    extents.back() -= err;
  }
  return extents;
}

namespace {

// Degree-aware sin/cos, exact at the axis angles so axis-aligned slice
// boundaries land on exact coordinates.
void sincos_deg(double deg, double& sin_out, double& cos_out) {
  double m = std::fmod(deg, 360.0);
  if (m < 0) m += 360.0;
  if (m == 0.0) {
    sin_out = 0.0;
    cos_out = 1.0;
    return;
  }
  if (m == 90.0) {
    sin_out = 1.0;
    cos_out = 0.0;
    return;
  }
  if (m == 180.0) {
    sin_out = 0.0;
    cos_out = -1.0;
    return;
  }
  if (m == 270.0) {
    sin_out = -1.0;
    cos_out = 0.0;
    return;
  }
  double rad = m * std::numbers::pi / 180.0;
  sin_out = std::sin(rad);
  cos_out = std::cos(rad);
}

}  // namespace

core::Point sector_point(const Sector& s, double deg) {
  double sn = 0, cs = 0;
  sincos_deg(deg, sn, cs);
  return {s.center.x + s.radius * sn, s.center.y - s.radius * cs};
}

bool sector_contains(const Sector& s, double x, double y) {
  double dx = x - s.center.x;
  double dy = y - s.center.y;
  if (dx * dx + dy * dy > s.radius * s.radius) return false;
  if (s.extent_deg >= 360.0) return true;
  double deg = std::atan2(dx, -dy) * 180.0 / std::numbers::pi;
  if (deg < 0) deg += 360.0;
  double rel = deg - s.start_deg;
  if (rel < 0) rel += 360.0;
  return rel < s.extent_deg;
}

core::BBox pie_slice_bbox(const Sector& s) {
  double x_min = s.center.x, x_max = s.center.x;
  double y_min = s.center.y, y_max = s.center.y;
  auto take = [&](core::Point p) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  };
  take(sector_point(s, s.start_deg));
  take(sector_point(s, s.start_deg + s.extent_deg));
  // Arc extremes sit at axis-aligned compass angles inside the interval.
  for (int k = 0; k <= 8; ++k) {
    double axis = 90.0 * k;
    if (axis >= s.start_deg && axis <= s.start_deg + s.extent_deg) {
      take(sector_point(s, axis));
    }
  }
  return {x_min, y_min, x_max, y_max};
}

std::vector<core::BBox> pie_geometry(const std::vector<double>& values, const Layout& layout) {
  layout.validate();
  std::vector<double> extents = pie_angles(values);
  std::vector<core::BBox> out;
  double start = 0;
  for (double extent : extents) {
    Sector s{layout.pie_center, layout.pie_radius, start, extent};
    out.push_back(pie_slice_bbox(s));
    start += extent;
  }
  return out;
}

std::vector<std::vector<core::Point>> line_geometry(
    const std::vector<std::vector<double>>& values, const Layout& layout) {
  layout.validate();
  if (values.empty() || values[0].empty()) throw UnrenderableTable("no values to lay out");
  size_t series = values.size();
  size_t count = values[0].size();
  double lo = values[0][0], hi = values[0][0];
  for (const auto& row : values) {
    if (row.size() != count) throw UnrenderableTable("ragged value grid");
    for (double v : row) {
      if (!std::isfinite(v)) throw UnrenderableTable("non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const core::BBox& plot = layout.plot;
  std::vector<std::vector<core::Point>> out(series, std::vector<core::Point>(count));
  for (size_t s = 0; s < series; ++s) {
    for (size_t i = 0; i < count; ++i) {
      double x = count > 1 ? plot.x_min + plot.width() * double(i) / double(count - 1)
                           : plot.x_min;
      double y = hi > lo
                     ? plot.y_max - (values[s][i] - lo) / (hi - lo) * plot.height()
                     : plot.y_min + plot.height() / 2.0;
      out[s][i] = {x, y};
    }
  }
  return out;
}

}  // namespace chartattrib::chartgen
