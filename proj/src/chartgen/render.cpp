#include "chartattrib/chartgen/render.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::chartgen {

namespace {

const img::Color kBackground{255, 255, 255};
const img::Color kInk{32, 32, 32};
const img::Color kGrid{208, 208, 208};
const img::Color kFrame{128, 128, 128};

const std::vector<img::Color>& reserved_colors() {
  static const std::vector<img::Color> kReserved = {kBackground, kInk, kGrid, kFrame};
  return kReserved;
}

}  // namespace

std::vector<img::Color> make_palette(uint32_t style_seed, size_t count) {
  std::mt19937 rng(style_seed ^ 0x9e3779b9u);
  std::uniform_int_distribution<int> channel(0, 255);
  std::vector<img::Color> out;
  int attempts = 0;
  while (out.size() < count) {
    if (++attempts > 20000) {
      throw ColorCollision("cannot place " + std::to_string(count) +
                           " distinct mark colors at channel distance 48");
    }
    img::Color c{uint8_t(channel(rng)), uint8_t(channel(rng)), uint8_t(channel(rng))};
    bool ok = true;
    for (const auto& r : reserved_colors()) {
      if (img::channel_distance(c, r) < 48) {
        ok = false;
        break;
      }
    }
    for (const auto& p : out) {
      if (!ok) break;
      if (img::channel_distance(c, p) < 48) ok = false;
    }
    if (ok) out.push_back(c);
  }
  return out;
}

Layout default_layout(core::ChartType chart_type) {
  Layout l;
  if (chart_type == core::ChartType::pie) {
    l.width = 640;
    l.height = 640;
    l.plot = {0.05, 0.05, 0.95, 0.95};
  }
  return l;
}

namespace {

// Numeric value grid; throws UnrenderableTable when any cell is text.
std::vector<std::vector<double>> numeric_grid(const core::DataTable& table) {
  std::vector<std::vector<double>> out;
  for (size_t r = 0; r < table.rows(); ++r) {
    std::vector<double> row;
    for (size_t c = 0; c < table.cols(); ++c) {
      const auto& cell = table.at(r, c);
      if (!core::cell_is_number(cell)) {
        throw UnrenderableTable("cell (" + std::to_string(r) + "," + std::to_string(c) +
                                ") is not numeric");
      }
      row.push_back(core::cell_number(cell));
    }
    out.push_back(std::move(row));
  }
  return out;
}

struct PieSeries {
  std::vector<double> values;
  std::vector<std::string> labels;
  bool row_wise = true;  // slices come from the single row
};

PieSeries pie_series(const core::DataTable& table) {
  auto grid = numeric_grid(table);
  PieSeries out;
  if (table.rows() == 1) {
    out.values = grid[0];
    out.labels = table.column_headers();
    out.row_wise = true;
  } else if (table.cols() == 1) {
    for (const auto& row : grid) out.values.push_back(row[0]);
    out.labels = table.row_headers();
    out.row_wise = false;
  } else {
    throw UnrenderableTable("pie chart needs a single-row or single-column table");
  }
  for (double v : out.values) {
    if (v < 0) throw UnrenderableTable("pie values must be non-negative");
  }
  return out;
}

void draw_frame_and_ticks(img::Image& canvas, const Layout& layout, double max_value) {
  int w = canvas.width(), h = canvas.height();
  double px0 = layout.plot.x_min * w, px1 = layout.plot.x_max * w;
  double py0 = layout.plot.y_min * h, py1 = layout.plot.y_max * h;
  const int ticks = 4;
  for (int t = 0; t <= ticks; ++t) {
    double frac = double(t) / ticks;
    double y = py1 - frac * (py1 - py0);
    if (t > 0) canvas.fill_rect(px0, y - 0.5, px1, y + 0.5, kGrid);
    double value = max_value * frac;
    std::string label = core::format_cell(core::CellValue{value});
    if (label.size() > 6) label = label.substr(0, 6);
    int tw = img::Image::text_width(label, 1);
    canvas.draw_text(int(px0) - tw - 6, int(y) - img::Image::text_height(1) / 2, label, 1,
                     kInk);
  }
  canvas.draw_rect_outline(px0, py0, px1, py1, 1, kFrame);
}

void draw_group_labels(img::Image& canvas, const Layout& layout,
                       const std::vector<std::string>& labels) {
  int w = canvas.width(), h = canvas.height();
  double px0 = layout.plot.x_min * w;
  double slot = layout.plot.width() * w / double(labels.size());
  int y = int(layout.plot.y_max * h) + 6;
  for (size_t i = 0; i < labels.size(); ++i) {
    std::string text = labels[i];
    if (img::Image::text_width(text, 1) > int(slot) && text.size() > 3) {
      text = text.substr(0, std::max<size_t>(3, size_t(slot) / 6 - 1));
    }
    int tw = img::Image::text_width(text, 1);
    int cx = int(px0 + slot * (double(i) + 0.5));
    canvas.draw_text(cx - tw / 2, y, text, 1, kInk);
  }
}

double point_rect_distance(double px, double py, double x0, double y0, double x1, double y1) {
  double dx = std::max({x0 - px, 0.0, px - x1});
  double dy = std::max({y0 - py, 0.0, py - y1});
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

RenderResult render_chart(const core::DataTable& table, core::ChartType chart_type,
                          const Layout& layout, uint32_t style_seed) {
  layout.validate();
  img::Image canvas(layout.width, layout.height, kBackground);
  GroundTruth gt;
  gt.chart_type = chart_type;
  gt.image_width = layout.width;
  gt.image_height = layout.height;
  int w = layout.width, h = layout.height;

  if (chart_type == core::ChartType::bar) {
    auto values = numeric_grid(table);
    auto boxes = bar_geometry(values, layout);
    double max_value = 0;
    for (const auto& row : values) {
      for (double v : row) max_value = std::max(max_value, v);
    }
    auto palette = make_palette(style_seed, table.rows() * table.cols());
    draw_frame_and_ticks(canvas, layout, max_value);
    for (size_t r = 0; r < boxes.size(); ++r) {
      for (size_t c = 0; c < boxes[r].size(); ++c) {
        img::Color color = palette[r * table.cols() + c];
        const core::BBox& b = boxes[r][c];
        canvas.fill_rect(b.x_min * w, b.y_min * h, b.x_max * w, b.y_max * h, color);
        gt.entries.push_back({{int(r), int(c)}, b, std::nullopt, {}, color});
      }
    }
    draw_group_labels(canvas, layout, table.column_headers());
  } else if (chart_type == core::ChartType::pie) {
    PieSeries series = pie_series(table);
    auto extents = pie_angles(series.values);
    auto palette = make_palette(style_seed, series.values.size());
    double start = 0;
    double radius_px = layout.pie_radius * std::min(w, h);
    for (size_t i = 0; i < extents.size(); ++i) {
      Sector sector{layout.pie_center, layout.pie_radius, start, extents[i]};
      // Fill in normalized space so membership matches the ground truth.
      if (extents[i] > 0) {
        double cx_px = sector.center.x * w, cy_px = sector.center.y * h;
        double rx = sector.radius * w, ry = sector.radius * h;
        int x0 = std::max(0, int(std::floor(cx_px - rx - 1)));
        int x1 = std::min(w - 1, int(std::ceil(cx_px + rx + 1)));
        int y0 = std::max(0, int(std::floor(cy_px - ry - 1)));
        int y1 = std::min(h - 1, int(std::ceil(cy_px + ry + 1)));
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            if (sector_contains(sector, (x + 0.5) / w, (y + 0.5) / h)) {
              canvas.set(x, y, palette[i]);
            }
          }
        }
      }
      core::BBox box = pie_slice_bbox(sector);
      core::CellRef cell = series.row_wise ? core::CellRef{0, int(i)}
                                           : core::CellRef{int(i), 0};
      gt.entries.push_back({cell, box, sector, {}, palette[i]});

      // Label outside the disc at the mid angle, skipped when it cannot
      // clear the circle.
      double mid = start + extents[i] / 2.0;
      core::Point anchor = sector_point({sector.center, sector.radius, mid, 0}, mid);
      double dir_x = anchor.x - sector.center.x, dir_y = anchor.y - sector.center.y;
      double norm = std::sqrt(dir_x * dir_x + dir_y * dir_y);
      if (norm > 1e-9 && i < series.labels.size()) {
        std::string label = series.labels[i];
        double lx = sector.center.x * w + dir_x / norm * (radius_px + 14);
        double ly = sector.center.y * h + dir_y / norm * (radius_px + 14);
        int tw = img::Image::text_width(label, 1);
        int th = img::Image::text_height(1);
        double tx0 = dir_x >= 0 ? lx : lx - tw;
        double ty0 = ly - th / 2.0;
        if (point_rect_distance(sector.center.x * w, sector.center.y * h, tx0 - 1, ty0 - 1,
                                tx0 + tw + 1, ty0 + th + 1) > radius_px + 2) {
          canvas.draw_text(int(tx0), int(ty0), label, 1, kInk);
        }
      }
      start += extents[i];
    }
  } else {
    auto values = numeric_grid(table);
    for (const auto& row : values) {
      for (double v : row) {
        if (v < 0) throw UnrenderableTable("negative line value");
      }
    }
    auto points = line_geometry(values, layout);
    double max_value = 0;
    for (const auto& row : values) {
      for (double v : row) max_value = std::max(max_value, v);
    }
    auto palette = make_palette(style_seed, table.rows());
    draw_frame_and_ticks(canvas, layout, max_value);
    for (size_t s = 0; s < points.size(); ++s) {
      img::Color color = palette[s];
      for (size_t i = 0; i + 1 < points[s].size(); ++i) {
        canvas.draw_segment(points[s][i].x * w, points[s][i].y * h, points[s][i + 1].x * w,
                            points[s][i + 1].y * h, 2.0, color);
      }
      for (size_t i = 0; i < points[s].size(); ++i) {
        canvas.fill_disc(points[s][i].x * w, points[s][i].y * h, 3.5, color);
        gt.entries.push_back(
            {{int(s), int(i)}, std::nullopt, std::nullopt, {points[s][i]}, color});
      }
    }
    draw_group_labels(canvas, layout, table.column_headers());
  }

  return {img::encode_png(canvas), std::move(gt)};
}

namespace {

struct PixelExtent {
  // Half-open pixel index ranges [x0, x1) x [y0, y1); empty when x1 <= x0.
  long x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

double extent_iou(const PixelExtent& a, const PixelExtent& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  long ix0 = std::max(a.x0, b.x0), ix1 = std::min(a.x1, b.x1);
  long iy0 = std::max(a.y0, b.y0), iy1 = std::min(a.y1, b.y1);
  double inter = double(std::max(0L, ix1 - ix0)) * double(std::max(0L, iy1 - iy0));
  double area_a = double(a.x1 - a.x0) * double(a.y1 - a.y0);
  double area_b = double(b.x1 - b.x0) * double(b.y1 - b.y0);
  double uni = area_a + area_b - inter;
  return uni <= 0 ? 0.0 : inter / uni;
}

// Rect quantized with the renderer's pixel-center rule.
PixelExtent quantize_rect(const core::BBox& b, int w, int h) {
  PixelExtent e;
  e.x0 = long(std::ceil(b.x_min * w - 0.5));
  e.x1 = long(std::ceil(b.x_max * w - 0.5));
  e.y0 = long(std::ceil(b.y_min * h - 0.5));
  e.y1 = long(std::ceil(b.y_max * h - 0.5));
  return e;
}

// Extent of pixel centers inside the analytic sector.
PixelExtent sector_extent(const Sector& s, int w, int h) {
  PixelExtent e{long(w), 0, long(h), 0};
  if (s.extent_deg <= 0) return {0, 0, 0, 0};
  double rx = s.radius * w, ry = s.radius * h;
  int x0 = std::max(0, int(std::floor(s.center.x * w - rx - 1)));
  int x1 = std::min(w - 1, int(std::ceil(s.center.x * w + rx + 1)));
  int y0 = std::max(0, int(std::floor(s.center.y * h - ry - 1)));
  int y1 = std::min(h - 1, int(std::ceil(s.center.y * h + ry + 1)));
  bool any = false;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!sector_contains(s, (x + 0.5) / w, (y + 0.5) / h)) continue;
      any = true;
      e.x0 = std::min(e.x0, long(x));
      e.x1 = std::max(e.x1, long(x) + 1);
      e.y0 = std::min(e.y0, long(y));
      e.y1 = std::max(e.y1, long(y) + 1);
    }
  }
  if (!any) return {0, 0, 0, 0};
  return e;
}

}  // namespace

std::vector<CellCheck> rasterize_check(const img::Image& image, const GroundTruth& gt) {
  // Region entries must carry pairwise-distinct colors.
  for (size_t i = 0; i < gt.entries.size(); ++i) {
    if (!gt.entries[i].box) continue;
    for (size_t k = i + 1; k < gt.entries.size(); ++k) {
      if (!gt.entries[k].box) continue;
      if (gt.entries[i].color == gt.entries[k].color) {
        throw ColorCollision("ground truth entries share a fill color");
      }
    }
  }

  int w = image.width(), h = image.height();
  std::vector<CellCheck> out;
  for (const auto& entry : gt.entries) {
    if (!entry.box) continue;  // line points have no region to check
    PixelExtent observed{long(w), 0, long(h), 0};
    bool any = false;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!(image.get(x, y) == entry.color)) continue;
        any = true;
        observed.x0 = std::min(observed.x0, long(x));
        observed.x1 = std::max(observed.x1, long(x) + 1);
        observed.y0 = std::min(observed.y0, long(y));
        observed.y1 = std::max(observed.y1, long(y) + 1);
      }
    }
    if (!any) observed = {0, 0, 0, 0};
    PixelExtent expected =
        entry.sector ? sector_extent(*entry.sector, w, h) : quantize_rect(*entry.box, w, h);
    out.push_back({entry.cell, extent_iou(observed, expected)});
  }
  return out;
}

}  // namespace chartattrib::chartgen
