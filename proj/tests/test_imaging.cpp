// Copyright 2026 The sgmreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <string>

#include <png.h>

#include "core/error.hpp"
#include "core/imaging.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace reid;
using namespace reid::imaging;

namespace {

std::string ppm_bytes(int w, int h, const std::string& payload) {
  return "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + payload;
}

// Integer-domain l1l2l3; the ratios are scale free so 0..255 inputs suffice.
Eigen::Vector3d l1l2l3_reference(int r, int g, int b) {
  const long rg = static_cast<long>(r - g) * (r - g);
  const long rb = static_cast<long>(r - b) * (r - b);
  const long gb = static_cast<long>(g - b) * (g - b);
  const long d = rg + rb + gb;
  if (d == 0) return Eigen::Vector3d::Constant(1.0 / 3.0);
  return {static_cast<double>(rg) / d, static_cast<double>(rb) / d, static_cast<double>(gb) / d};
}

// Hue in degrees, then scaled.
Eigen::Vector3d hsv_reference(int r, int g, int b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double v = mx / 255.0;
  if (mx == 0 || mx == mn) return {0.0, 0.0, v};
  const double c = mx - mn;
  double deg;
  if (mx == r)
    deg = 60.0 * std::fmod((g - b) / c + 6.0, 6.0);
  else if (mx == g)
    deg = 60.0 * ((b - r) / c + 2.0);
  else
    deg = 60.0 * ((r - g) / c + 4.0);
  return {deg / 360.0, c / mx, v};
}

}  // namespace

TEST_CASE("ppm bytes pass through untouched") {
  const std::string payload{'\xff', '\0', '\0', '\0', '\0', '\xff'};
  const auto img = decode_ppm(ppm_bytes(2, 1, payload));
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.pixels == std::vector<std::uint8_t>{255, 0, 0, 0, 0, 255});
}

TEST_CASE("ppm header comments and whitespace") {
  const std::string bytes = std::string("P6 # comment\n2\t1\n# more\n255\n") + "abcdef";
  const auto img = decode_ppm(bytes);
  CHECK(img.pixels[0] == 'a');
  CHECK(img.pixels[5] == 'f');
}

TEST_CASE("128x48 image loads with 6144 pixels") {
  const auto dir = testing::temp_dir("imaging_load");
  const auto img = testing::random_image(48, 128, 7);
  save_ppm(img, (dir / "a.ppm").string());
  const auto back = load_image((dir / "a.ppm").string());
  CHECK(back.pixel_count() == 6144);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("malformed images are rejected") {
  REQUIRE_ERROR(decode_ppm(ppm_bytes(0, 0, "")), ErrorCode::kCorruptFile);
  REQUIRE_ERROR(decode_ppm(ppm_bytes(2, 2, "abc")), ErrorCode::kCorruptFile);
  REQUIRE_ERROR(decode_ppm("P6\n1 1\n65535\n" + std::string(6, 'x')), ErrorCode::kUnsupportedFormat);
  REQUIRE_ERROR(decode_ppm("P6\n16384 16384\n255\n"), ErrorCode::kDimensionOverflow);

  const auto dir = testing::temp_dir("imaging_bad");
  testing::write_bytes(dir / "x.bmp", "BM not an image");
  REQUIRE_ERROR(load_image((dir / "x.bmp").string()), ErrorCode::kUnsupportedFormat);
  REQUIRE_ERROR(load_image((dir / "missing.ppm").string()), ErrorCode::kIoFailure);
}

TEST_CASE("mask threshold and dimension check") {
  const auto dir = testing::temp_dir("imaging_mask");
  const auto img = testing::random_image(4, 2, 1);
  testing::write_bytes(dir / "ones.pgm", "P5\n4 2\n255\n" + std::string(8, '\xff'));
  testing::write_bytes(dir / "zeros.pgm", "P5\n4 2\n255\n" + std::string(8, '\0'));
  testing::write_bytes(dir / "mixed.pgm", "P5\n4 2\n255\n" + std::string{'\x7f', '\x80', 0, 1, 2, 3, '\xc8', 4});
  testing::write_bytes(dir / "small.pgm", "P5\n2 2\n255\n" + std::string(4, '\xff'));

  const auto ones = load_mask((dir / "ones.pgm").string(), img);
  CHECK(std::all_of(ones.values.begin(), ones.values.end(), [](auto v) { return v == 1; }));
  const auto zeros = load_mask((dir / "zeros.pgm").string(), img);
  CHECK(std::all_of(zeros.values.begin(), zeros.values.end(), [](auto v) { return v == 0; }));
  const auto mixed = load_mask((dir / "mixed.pgm").string(), img);
  CHECK(mixed.values == std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0, 1, 0});
  REQUIRE_ERROR(load_mask((dir / "small.pgm").string(), img), ErrorCode::kDimensionMismatch);
  testing::write_bytes(dir / "color.pgm", ppm_bytes(4, 2, std::string(24, 'x')));
  REQUIRE_ERROR(load_mask((dir / "color.pgm").string(), img), ErrorCode::kUnsupportedFormat);

  const auto full = testing::random_image(48, 128, 3);
  const ForegroundMask small{48, 64, std::vector<std::uint8_t>(48 * 64, 1)};
  REQUIRE_ERROR(convert(full, ColorSpace::kRgb, &small), ErrorCode::kDimensionMismatch);
}

TEST_CASE("definitional conversions") {
  const auto gray = convert_rgb(128 / 255.0, 128 / 255.0, 128 / 255.0, ColorSpace::kNormalizedRgb);
  CHECK(gray.isApprox(Eigen::Vector3d::Constant(1.0 / 3.0), 1e-15));
  CHECK(convert_rgb(1, 0, 0, ColorSpace::kHsv) == Eigen::Vector3d(0, 1, 1));
  CHECK(convert_rgb(0, 0, 0, ColorSpace::kNormalizedRgb) == Eigen::Vector3d::Constant(1.0 / 3.0));
  CHECK(convert_rgb(10 / 255.0, 10 / 255.0, 10 / 255.0, ColorSpace::kL1L2L3) ==
        Eigen::Vector3d::Constant(1.0 / 3.0));
  CHECK(convert_rgb(0, 0, 0, ColorSpace::kHsv) == Eigen::Vector3d(0, 0, 0));
  CHECK(convert_rgb(0.2, 0.4, 0.6, ColorSpace::kRgb) == Eigen::Vector3d(0.2, 0.4, 0.6));
}

TEST_CASE("l1l2l3 and HSV agree with independent references over an RGB grid") {
  double worst_l = 0.0, worst_h = 0.0;
  for (int r = 0; r < 256; r += 5)
    for (int g = 0; g < 256; g += 5)
      for (int b = 0; b < 256; b += 5) {
        const std::uint8_t px[3] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                    static_cast<std::uint8_t>(b)};
        worst_l = std::max(worst_l, (convert_pixel(px, ColorSpace::kL1L2L3) - l1l2l3_reference(r, g, b))
                                        .cwiseAbs().maxCoeff());
        worst_h = std::max(worst_h, (convert_pixel(px, ColorSpace::kHsv) - hsv_reference(r, g, b))
                                        .cwiseAbs().maxCoeff());
      }
  CHECK(worst_l <= 1e-12);
  CHECK(worst_h <= 1e-12);
}

TEST_CASE("every conversion stays in the unit cube") {
  const auto img = testing::random_image(64, 64, 11);
  for (auto space : kAllColorSpaces) {
    const auto set = convert(img, space);
    for (const auto& p : set.points) {
      CHECK(p.minCoeff() >= 0.0);
      CHECK(p.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("all-ones mask equals no mask; empty mask falls back or fails") {
  const auto img = testing::random_image(12, 30, 5);
  const auto ones = testing::full_mask(12, 30);
  const auto zeros = testing::full_mask(12, 30, 0);
  for (auto space : kAllColorSpaces) {
    CHECK(convert(img, space, &ones).points == convert(img, space).points);
    CHECK(convert(img, space, &zeros).points == convert(img, space).points);
    REQUIRE_ERROR(convert(img, space, &zeros, false), ErrorCode::kEmptyPixelSet);
  }
}

TEST_CASE("masked conversion keeps only foreground pixels in raster order") {
  const auto img = testing::random_image(3, 3, 9);
  ForegroundMask mask{3, 3, {0, 1, 0, 0, 0, 0, 1, 0, 1}};
  const auto set = convert(img, ColorSpace::kRgb, &mask);
  REQUIRE(set.points.size() == 3);
  CHECK(set.points[0] == convert_pixel(img.at(1, 0), ColorSpace::kRgb));
  CHECK(set.points[1] == convert_pixel(img.at(0, 2), ColorSpace::kRgb));
  CHECK(set.points[2] == convert_pixel(img.at(2, 2), ColorSpace::kRgb));
}

TEST_CASE("color space names round trip") {
  for (auto space : kAllColorSpaces) CHECK(parse_color_space(color_space_name(space)) == space);
  CHECK(!parse_color_space("lab").has_value());
}

TEST_CASE("png decodes to the same bytes it was written from") {
  const auto img = testing::random_image(5, 7, 21);
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = 5;
  out.height = 7;
  out.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  REQUIRE(png_image_write_to_memory(&out, nullptr, &size, 0, img.pixels.data(), 0, nullptr));
  std::string bytes(size, '\0');
  REQUIRE(png_image_write_to_memory(&out, bytes.data(), &size, 0, img.pixels.data(), 0, nullptr));
  bytes.resize(size);

  const auto dir = testing::temp_dir("imaging_png");
  testing::write_bytes(dir / "a.png", bytes);
  const auto back = load_image((dir / "a.png").string());
  CHECK(back.width == 5);
  CHECK(back.height == 7);
  CHECK(back.pixels == img.pixels);
  testing::write_bytes(dir / "t.png", bytes.substr(0, 40));
  REQUIRE_ERROR(load_image((dir / "t.png").string()), ErrorCode::kCorruptFile);
}
