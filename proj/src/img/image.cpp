#include "chartattrib/img/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::img {

namespace {

// 5x7 bitmap font, ASCII 32..126. Row bytes, bit 4 = leftmost column.
constexpr int kGlyphW = 5;
constexpr int kGlyphH = 7;
constexpr uint8_t kFont[95][7] = {
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // space
    {0x04, 0x04, 0x04, 0x04, 0x04, 0x00, 0x04},  // !
    {0x0A, 0x0A, 0x00, 0x00, 0x00, 0x00, 0x00},  // "
    {0x0A, 0x0A, 0x1F, 0x0A, 0x1F, 0x0A, 0x0A},  // #
    {0x04, 0x0F, 0x14, 0x0E, 0x05, 0x1E, 0x04},  // $
    {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03},  // %
    {0x0C, 0x12, 0x14, 0x08, 0x15, 0x12, 0x0D},  // &
    {0x04, 0x04, 0x00, 0x00, 0x00, 0x00, 0x00},  // '
    {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02},  // (
    {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08},  // )
    {0x00, 0x04, 0x15, 0x0E, 0x15, 0x04, 0x00},  // *
    {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00},  // +
    {0x00, 0x00, 0x00, 0x00, 0x06, 0x04, 0x08},  // ,
    {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00},  // -
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C},  // .
    {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10},  // /
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
    {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00},  // :
    {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x04, 0x08},  // ;
    {0x02, 0x04, 0x08, 0x10, 0x08, 0x04, 0x02},  // <
    {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00},  // =
    {0x08, 0x04, 0x02, 0x01, 0x02, 0x04, 0x08},  // >
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04},  // ?
    {0x0E, 0x11, 0x01, 0x0D, 0x15, 0x15, 0x0E},  // @
    {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // A
    {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},  // B
    {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E},  // C
    {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},  // D
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F},  // E
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},  // F
    {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F},  // G
    {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // H
    {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // I
    {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},  // J
    {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // K
    {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},  // L
    {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11},  // M
    {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // N
    {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // O
    {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},  // P
    {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D},  // Q
    {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},  // R
    {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E},  // S
    {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // T
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // U
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},  // V
    {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A},  // W
    {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},  // X
    {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04},  // Y
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},  // Z
    {0x0E, 0x08, 0x08, 0x08, 0x08, 0x08, 0x0E},  // [
    {0x10, 0x10, 0x08, 0x04, 0x02, 0x01, 0x01},  // backslash
    {0x0E, 0x02, 0x02, 0x02, 0x02, 0x02, 0x0E},  // ]
    {0x04, 0x0A, 0x11, 0x00, 0x00, 0x00, 0x00},  // ^
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F},  // _
    {0x08, 0x04, 0x00, 0x00, 0x00, 0x00, 0x00},  // `
    {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F},  // a
    {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x1E},  // b
    {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E},  // c
    {0x01, 0x01, 0x0F, 0x11, 0x11, 0x11, 0x0F},  // d
    {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E},  // e
    {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08},  // f
    {0x00, 0x00, 0x0F, 0x11, 0x0F, 0x01, 0x0E},  // g
    {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x11},  // h
    {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E},  // i
    {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C},  // j
    {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12},  // k
    {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // l
    {0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15},  // m
    {0x00, 0x00, 0x1E, 0x11, 0x11, 0x11, 0x11},  // n
    {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E},  // o
    {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10},  // p
    {0x00, 0x00, 0x0F, 0x11, 0x0F, 0x01, 0x01},  // q
    {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10},  // r
    {0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E},  // s
    {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06},  // t
    {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D},  // u
    {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04},  // v
    {0x00, 0x00, 0x11, 0x15, 0x15, 0x15, 0x0A},  // w
    {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11},  // x
    {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E},  // y
    {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F},  // z
    {0x02, 0x04, 0x04, 0x08, 0x04, 0x04, 0x02},  // {
    {0x04, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // |
    {0x08, 0x04, 0x04, 0x02, 0x04, 0x04, 0x08},  // }
    {0x00, 0x00, 0x08, 0x15, 0x02, 0x00, 0x00},  // ~
};

}  // namespace

int channel_distance(Color a, Color b) {
  int dr = std::abs(int(a.r) - int(b.r));
  int dg = std::abs(int(a.g) - int(b.g));
  int db = std::abs(int(a.b) - int(b.b));
  return std::max({dr, dg, db});
}

Image::Image(int width, int height, Color fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
  data_.resize(size_t(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) set(x, y, fill);
  }
}

Color Image::get(int x, int y) const {
  size_t i = (size_t(y) * width_ + x) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set(int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  size_t i = (size_t(y) * width_ + x) * 3;
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

void Image::fill_rect(double x0, double y0, double x1, double y1, Color c) {
  if (x1 < x0) std::swap(x0, x1);
  if (y1 < y0) std::swap(y0, y1);
  // pixel centers i+0.5 in [x0, x1)
  int ix0 = std::max(0, int(std::ceil(x0 - 0.5)));
  int ix1 = std::min(width_, int(std::ceil(x1 - 0.5)));
  int iy0 = std::max(0, int(std::ceil(y0 - 0.5)));
  int iy1 = std::min(height_, int(std::ceil(y1 - 0.5)));
  for (int y = iy0; y < iy1; ++y) {
    for (int x = ix0; x < ix1; ++x) set(x, y, c);
  }
}

namespace {

// Compass angle of (dx, dy) in image coordinates (y down):
// 0 at 12 o'clock, growing clockwise, in [0, 360).
double compass_deg(double dx, double dy) {
  double deg = std::atan2(dx, -dy) * 180.0 / std::numbers::pi;
  if (deg < 0) deg += 360.0;
  return deg;
}

}  // namespace

void Image::fill_sector(double cx, double cy, double radius, double start_deg,
                        double extent_deg, Color c) {
  if (extent_deg <= 0) return;
  bool full = extent_deg >= 360.0;
  int x0 = std::max(0, int(std::floor(cx - radius - 1)));
  int x1 = std::min(width_ - 1, int(std::ceil(cx + radius + 1)));
  int y0 = std::max(0, int(std::floor(cy - radius - 1)));
  int y1 = std::min(height_ - 1, int(std::ceil(cy + radius + 1)));
  double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = x + 0.5 - cx;
      double dy = y + 0.5 - cy;
      if (dx * dx + dy * dy > r2) continue;
      if (!full) {
        double rel = compass_deg(dx, dy) - start_deg;
        if (rel < 0) rel += 360.0;
        if (rel >= extent_deg) continue;
      }
      set(x, y, c);
    }
  }
}

void Image::fill_disc(double cx, double cy, double radius, Color c) {
  fill_sector(cx, cy, radius, 0.0, 360.0, c);
}

void Image::draw_segment(double x0, double y0, double x1, double y1, double thickness,
                         Color c) {
  double half = thickness / 2.0;
  int bx0 = std::max(0, int(std::floor(std::min(x0, x1) - half - 1)));
  int bx1 = std::min(width_ - 1, int(std::ceil(std::max(x0, x1) + half + 1)));
  int by0 = std::max(0, int(std::floor(std::min(y0, y1) - half - 1)));
  int by1 = std::min(height_ - 1, int(std::ceil(std::max(y0, y1) + half + 1)));
  double vx = x1 - x0, vy = y1 - y0;
  double len2 = vx * vx + vy * vy;
  for (int y = by0; y <= by1; ++y) {
    for (int x = bx0; x <= bx1; ++x) {
      double px = x + 0.5 - x0, py = y + 0.5 - y0;
      double t = len2 > 0 ? std::clamp((px * vx + py * vy) / len2, 0.0, 1.0) : 0.0;
      double ex = px - t * vx, ey = py - t * vy;
      if (ex * ex + ey * ey <= half * half) set(x, y, c);
    }
  }
}

void Image::draw_rect_outline(double x0, double y0, double x1, double y1, int width,
                              Color c) {
  if (x1 < x0) std::swap(x0, x1);
  if (y1 < y0) std::swap(y0, y1);
  double w = width;
  fill_rect(x0, y0, x1, std::min(y1, y0 + w), c);
  fill_rect(x0, std::max(y0, y1 - w), x1, y1, c);
  fill_rect(x0, y0, std::min(x1, x0 + w), y1, c);
  fill_rect(std::max(x0, x1 - w), y0, x1, y1, c);
}

void Image::draw_circle_outline(double cx, double cy, double radius, double thickness,
                                Color c) {
  double ro = radius + thickness / 2.0;
  double ri = std::max(0.0, radius - thickness / 2.0);
  int x0 = std::max(0, int(std::floor(cx - ro - 1)));
  int x1 = std::min(width_ - 1, int(std::ceil(cx + ro + 1)));
  int y0 = std::max(0, int(std::floor(cy - ro - 1)));
  int y1 = std::min(height_ - 1, int(std::ceil(cy + ro + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      double d2 = dx * dx + dy * dy;
      if (d2 <= ro * ro && d2 >= ri * ri) set(x, y, c);
    }
  }
}

int Image::draw_text(int x, int y, const std::string& text, int scale, Color c) {
  int cursor = x;
  for (char ch : text) {
    unsigned code = static_cast<unsigned char>(ch);
    if (code < 32 || code > 126) code = '?';
    const uint8_t* glyph = kFont[code - 32];
    for (int row = 0; row < kGlyphH; ++row) {
      for (int col = 0; col < kGlyphW; ++col) {
        if (!(glyph[row] & (1 << (kGlyphW - 1 - col)))) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            set(cursor + col * scale + sx, y + row * scale + sy, c);
          }
        }
      }
    }
    cursor += (kGlyphW + 1) * scale;
  }
  return cursor - x;
}

int Image::text_width(const std::string& text, int scale) {
  return int(text.size()) * (kGlyphW + 1) * scale;
}

int Image::text_height(int scale) { return kGlyphH * scale; }

// ---------------------------------------------------------------------------
// PNG codec. Only what the artifact emits and consumes: 8-bit RGB(A),
// non-interlaced. Fixed zlib level keeps encodes byte-stable.
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& out, uint32_t v) {
  out.push_back(char((v >> 24) & 0xFF));
  out.push_back(char((v >> 16) & 0xFF));
  out.push_back(char((v >> 8) & 0xFF));
  out.push_back(char(v & 0xFF));
}

uint32_t read_u32(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

void append_chunk(std::string& out, const char type[4], const std::string& payload) {
  put_u32(out, uint32_t(payload.size()));
  size_t crc_start = out.size();
  out.append(type, 4);
  out += payload;
  uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data() + crc_start),
                    uInt(out.size() - crc_start));
  put_u32(out, uint32_t(crc));
}

}  // namespace

std::string encode_png(const Image& image) {
  if (image.empty()) throw Error("cannot encode empty image");
  int w = image.width(), h = image.height();
  std::string raw;
  raw.reserve(size_t(h) * (size_t(w) * 3 + 1));
  const auto& px = image.pixels();
  for (int y = 0; y < h; ++y) {
    raw.push_back('\0');  // filter type 0
    raw.append(reinterpret_cast<const char*>(px.data()) + size_t(y) * w * 3,
               size_t(w) * 3);
  }
  uLongf bound = compressBound(uLong(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()),
                6) != Z_OK) {
    throw Error("png: deflate failed");
  }
  compressed.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, uint32_t(w));
  put_u32(ihdr, uint32_t(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", "");
  return out;
}

namespace {

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

Image decode_png(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(p, "\x89PNG\r\n\x1a\n", 8) != 0) {
    throw ImageDecodeError("not a PNG file");
  }
  size_t pos = 8;
  uint32_t w = 0, h = 0;
  int bit_depth = 0, color_type = 0, interlace = 0;
  std::string idat;
  bool saw_ihdr = false, saw_iend = false;
  while (pos + 8 <= bytes.size()) {
    uint32_t len = read_u32(p + pos);
    std::string type(bytes, pos + 4, 4);
    if (pos + 12 + size_t(len) > bytes.size()) throw ImageDecodeError("png: truncated chunk");
    uLong crc = crc32(0L, p + pos + 4, uInt(len + 4));
    if (uint32_t(crc) != read_u32(p + pos + 8 + len)) throw ImageDecodeError("png: bad CRC");
    const unsigned char* data = p + pos + 8;
    if (type == "IHDR") {
      if (len != 13) throw ImageDecodeError("png: bad IHDR");
      w = read_u32(data);
      h = read_u32(data + 4);
      bit_depth = data[8];
      color_type = data[9];
      interlace = data[12];
      saw_ihdr = true;
    } else if (type == "IDAT") {
      idat.append(reinterpret_cast<const char*>(data), len);
    } else if (type == "IEND") {
      saw_iend = true;
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend) throw ImageDecodeError("png: missing IHDR/IEND");
  if (bit_depth != 8 || (color_type != 2 && color_type != 6) || interlace != 0) {
    throw ImageDecodeError("png: unsupported format (need 8-bit RGB/RGBA, non-interlaced)");
  }
  if (w == 0 || h == 0 || w > 1 << 16 || h > 1 << 16) throw ImageDecodeError("png: bad size");
  int channels = color_type == 2 ? 3 : 4;
  size_t stride = size_t(w) * channels;
  size_t raw_size = (stride + 1) * h;
  std::string raw(raw_size, '\0');
  uLongf dest_len = raw_size;
  int rc = uncompress(reinterpret_cast<Bytef*>(raw.data()), &dest_len,
                      reinterpret_cast<const Bytef*>(idat.data()), uLong(idat.size()));
  if (rc != Z_OK || dest_len != raw_size) throw ImageDecodeError("png: inflate failed");

  auto* rp = reinterpret_cast<unsigned char*>(raw.data());
  std::vector<unsigned char> prev(stride, 0), cur(stride, 0);
  Image img(static_cast<int>(w), static_cast<int>(h));
  for (uint32_t y = 0; y < h; ++y) {
    unsigned char filter = rp[y * (stride + 1)];
    const unsigned char* line = rp + y * (stride + 1) + 1;
    for (size_t i = 0; i < stride; ++i) {
      int a = i >= size_t(channels) ? cur[i - channels] : 0;
      int b = prev[i];
      int c = i >= size_t(channels) ? prev[i - channels] : 0;
      int x = line[i];
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default: throw ImageDecodeError("png: bad filter type");
      }
      cur[i] = static_cast<unsigned char>(x & 0xFF);
    }
    for (uint32_t x = 0; x < w; ++x) {
      img.set(int(x), int(y),
              {cur[x * channels], cur[x * channels + 1], cur[x * channels + 2]});
    }
    std::swap(prev, cur);
  }
  return img;
}

}  // namespace chartattrib::img
