#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartattrib/core/types.hpp"
#include "chartattrib/img/image.hpp"

namespace chartattrib::chartgen {

/// Chart layout in normalized coordinates plus the raster size.
struct Layout {
  int width = 800;
  int height = 600;
  core::BBox plot{0.12, 0.10, 0.96, 0.84};
  double bar_gap = 0.2;  // fraction of each group slot left as spacing
  core::Point pie_center{0.5, 0.5};
  double pie_radius = 0.36;  // of min(width, height)

  void validate() const;  // throws Error on broken invariants

  nlohmann::json to_json() const;
  static Layout from_json(const nlohmann::json& j);
};

/// Circular sector in normalized coordinates (radius in min-dimension
/// units, compass angles: 0 at 12 o'clock, clockwise).
struct Sector {
  core::Point center;
  double radius = 0;
  double start_deg = 0;
  double extent_deg = 0;
};

/// Analytically known region for one rendered cell. Pie entries carry the
/// sector alongside its bounding box; line entries carry the data point.
struct GtEntry {
  core::CellRef cell;
  std::optional<core::BBox> box;             // bar, pie
  std::optional<Sector> sector;              // pie only
  std::vector<core::Point> points;           // line only
  img::Color color;                          // fill / series color
};

struct GroundTruth {
  core::ChartType chart_type = core::ChartType::bar;
  int image_width = 0;
  int image_height = 0;
  std::vector<GtEntry> entries;

  const GtEntry* find(core::CellRef cell) const;

  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
};

/// Grouped vertical bars: group slots split the plot width equally in
/// column order; series bars sit side by side within a slot in row order;
/// heights are value / max over all values. values[series][group] >= 0.
/// Throws AllZeroValues when max == 0.
std::vector<std::vector<core::BBox>> bar_geometry(
    const std::vector<std::vector<double>>& values, const Layout& layout);

/// Slice angular extents in degrees, clockwise from 12 o'clock. The last
/// slice takes the exact remainder so extents always sum to 360.
std::vector<double> pie_angles(const std::vector<double>& values);

/// Tight axis-aligned box over {center, radial endpoints, contained
/// axis-extreme arc points}. All in normalized coordinates; the radius
/// applies to both axes, so pies render on square canvases.
core::BBox pie_slice_bbox(const Sector& sector);

/// Point on the arc at a compass angle (0 at 12 o'clock, clockwise).
core::Point sector_point(const Sector& s, double deg);

/// Membership test used by both the renderer and the raster self-check.
bool sector_contains(const Sector& s, double x, double y);

/// Per-slice bounding boxes for a pie laid out per `layout`.
std::vector<core::BBox> pie_geometry(const std::vector<double>& values, const Layout& layout);

/// Data points: x equally spaced across the plot in column order, y a
/// linear map of the global [min, max] onto the plot (max on top); an
/// all-equal range maps to the plot's vertical midline.
std::vector<std::vector<core::Point>> line_geometry(
    const std::vector<std::vector<double>>& values, const Layout& layout);

}  // namespace chartattrib::chartgen
