#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chartattrib/chartgen/geometry.hpp"
#include "chartattrib/core/types.hpp"
#include "chartattrib/img/image.hpp"

namespace chartattrib::chartgen {

struct RenderResult {
  std::string png;
  GroundTruth ground_truth;
};

/// Seeded palette of mark fills, pairwise (and against the reserved
/// background/ink colors) at channel distance >= 48. Throws ColorCollision
/// when it cannot place `count` colors.
std::vector<img::Color> make_palette(uint32_t style_seed, size_t count);

/// Renders a table as a bar/pie/line chart and returns the PNG plus the
/// analytically computed per-cell ground truth. Deterministic in all
/// inputs. Pie accepts a single-row (or single-column) table of
/// non-negative values with a positive sum; bar and line require fully
/// numeric non-negative grids.
RenderResult render_chart(const core::DataTable& table, core::ChartType chart_type,
                          const Layout& layout, uint32_t style_seed);

/// Default layouts: 800x600 for bar/line, 640x640 for pie.
Layout default_layout(core::ChartType chart_type);

struct CellCheck {
  core::CellRef cell;
  double iou = 0;
};

/// Generator self-check: for every bar/slice entry, the tight bbox of
/// pixels in that cell's fill color is compared against the ground-truth
/// region quantized to the same pixel grid (IoU in pixel-extent space).
/// Line entries are skipped (their ground truth is points, not regions).
std::vector<CellCheck> rasterize_check(const img::Image& image, const GroundTruth& gt);

}  // namespace chartattrib::chartgen
