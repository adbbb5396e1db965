#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chartattrib::img {

struct Color {
  uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Color&) const = default;
};

/// Largest per-channel difference; the palette generator keeps this >= 48
/// between any two mark fills so pixel scans stay unambiguous.
int channel_distance(Color a, Color b);

/// 8-bit RGB raster with a fixed top-left origin. All fills use a
/// pixel-center rule: pixel (i,j) belongs to a shape iff its center
/// (i+0.5, j+0.5) does. That keeps rendered extents aligned with the
/// analytic geometry that produced them.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Color fill = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Color get(int x, int y) const;
  void set(int x, int y, Color c);

  /// Rectangle in pixel coordinates, half-open under the center rule.
  void fill_rect(double x0, double y0, double x1, double y1, Color c);

  /// Circular sector. Angles are compass degrees: 0 at 12 o'clock,
  /// increasing clockwise. extent_deg may be up to 360.
  void fill_sector(double cx, double cy, double radius, double start_deg,
                   double extent_deg, Color c);

  void fill_disc(double cx, double cy, double radius, Color c);

  /// Solid line segment of the given thickness (distance-to-segment test).
  void draw_segment(double x0, double y0, double x1, double y1, double thickness, Color c);

  /// Axis-aligned rectangle outline, `width` pixels thick, drawn inward.
  void draw_rect_outline(double x0, double y0, double x1, double y1, int width, Color c);

  void draw_circle_outline(double cx, double cy, double radius, double thickness, Color c);

  /// Bitmap-font text; (x, y) is the top-left corner. scale multiplies the
  /// base 5x7 glyph cell. Returns the pixel width consumed.
  int draw_text(int x, int y, const std::string& text, int scale, Color c);
  static int text_width(const std::string& text, int scale);
  static int text_height(int scale);

  const std::vector<uint8_t>& pixels() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> data_;  // RGB, row-major
};

/// Deterministic PNG encode (8-bit RGB, filter 0, fixed zlib level).
std::string encode_png(const Image& image);

/// Decodes 8-bit RGB/RGBA non-interlaced PNGs; throws ImageDecodeError.
Image decode_png(const std::string& bytes);

}  // namespace chartattrib::img
