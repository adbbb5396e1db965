#include <doctest.h>

#include <random>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/img/image.hpp"

using namespace chartattrib;
using img::Color;
using img::Image;

TEST_CASE("png encode/decode round-trips pixels") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> channel(0, 255);
  Image a(37, 23);
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      a.set(x, y, {uint8_t(channel(rng)), uint8_t(channel(rng)), uint8_t(channel(rng))});
    }
  }
  std::string png = img::encode_png(a);
  Image b = img::decode_png(png);
  REQUIRE(b.width() == a.width());
  REQUIRE(b.height() == a.height());
  CHECK(a.pixels() == b.pixels());
}

TEST_CASE("png encoding is byte-stable") {
  Image a(16, 16, {200, 10, 30});
  CHECK(img::encode_png(a) == img::encode_png(a));
}

TEST_CASE("png decoder rejects garbage") {
  CHECK_THROWS_AS(img::decode_png("not a png"), ImageDecodeError);
  std::string png = img::encode_png(Image(4, 4));
  png[20] ^= 0x5A;  // corrupt IHDR payload -> CRC mismatch
  CHECK_THROWS_AS(img::decode_png(png), ImageDecodeError);
}

TEST_CASE("fill_rect follows the pixel-center rule") {
  Image a(10, 10, {0, 0, 0});
  a.fill_rect(2.0, 3.0, 5.0, 6.0, {255, 255, 255});
  int lit = 0;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      bool on = a.get(x, y) == Color{255, 255, 255};
      bool expected = x >= 2 && x < 5 && y >= 3 && y < 6;
      CHECK(on == expected);
      lit += on;
    }
  }
  CHECK(lit == 9);
}

TEST_CASE("fill_sector covers the right quadrant") {
  Image a(100, 100, {0, 0, 0});
  // Compass 0..90 degrees: upper-right quadrant.
  a.fill_sector(50, 50, 40, 0, 90, {255, 0, 0});
  CHECK(a.get(60, 30) == Color{255, 0, 0});   // upper right: inside
  CHECK(a.get(30, 30) == Color{0, 0, 0});     // upper left: outside
  CHECK(a.get(60, 70) == Color{0, 0, 0});     // lower right: outside
  CHECK(a.get(50, 5) == Color{0, 0, 0});      // above radius
}

TEST_CASE("text rendering stays within its advertised box") {
  Image a(200, 40, {255, 255, 255});
  int width = a.draw_text(5, 5, "Hello 123", 2, {0, 0, 0});
  CHECK(width == Image::text_width("Hello 123", 2));
  bool outside = false;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.get(x, y) == Color{255, 255, 255}) continue;
      if (x < 5 || x >= 5 + width || y < 5 || y >= 5 + Image::text_height(2)) outside = true;
    }
  }
  CHECK_FALSE(outside);
}

TEST_CASE("channel distance is the max per-channel delta") {
  CHECK(img::channel_distance({0, 0, 0}, {10, 40, 20}) == 40);
  CHECK(img::channel_distance({255, 255, 255}, {255, 255, 255}) == 0);
}
