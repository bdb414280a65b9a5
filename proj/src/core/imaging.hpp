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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace reid::imaging {

/// Row-major interleaved 8-bit RGB raster.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

/// Binary foreground mask; 1 marks pedestrian pixels.
struct ForegroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  bool foreground(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x] != 0;
  }
};

enum class ColorSpace : int { kRgb = 0, kNormalizedRgb = 1, kL1L2L3 = 2, kHsv = 3 };

inline constexpr std::array<ColorSpace, 4> kAllColorSpaces = {
    ColorSpace::kRgb, ColorSpace::kNormalizedRgb, ColorSpace::kL1L2L3,
    ColorSpace::kHsv};

std::string_view color_space_name(ColorSpace space);
std::optional<ColorSpace> parse_color_space(std::string_view name);

/// Pixels of one image expressed in one color space, every channel in [0,1].
struct PixelSet {
  ColorSpace space = ColorSpace::kRgb;
  std::vector<Eigen::Vector3d> points;
};

/// Largest accepted width*height.
inline constexpr std::size_t kMaxPixels = std::size_t{1} << 26;

/// Reads a binary PPM (P6, maxval 255) or an 8-bit PNG. Byte values are
/// passed through untouched.
RasterImage load_image(const std::string& path);
RasterImage decode_ppm(std::string_view bytes);
void save_ppm(const RasterImage& image, const std::string& path);

/// Reads a binary PGM (P5, maxval 255). Values above 127 are foreground.
ForegroundMask load_mask(const std::string& path, const RasterImage& image);
ForegroundMask decode_pgm_mask(std::string_view bytes);
void save_pgm(const ForegroundMask& mask, const std::string& path);

/// Converts one RGB triple with channels in [0,1] into `space`.
Eigen::Vector3d convert_rgb(double r, double g, double b, ColorSpace space);

inline Eigen::Vector3d convert_pixel(const std::uint8_t* rgb, ColorSpace space) {
  return convert_rgb(rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0, space);
}

/// Converts the whole image, or only mask==1 pixels when a mask is given.
/// With `fallback_to_whole`, an empty selection uses every pixel instead of
/// raising EmptyPixelSet.
PixelSet convert(const RasterImage& image, ColorSpace space,
                 const ForegroundMask* mask = nullptr,
                 bool fallback_to_whole = true);

/// Converts every pixel, row-major, without any selection.
std::vector<Eigen::Vector3d> convert_grid(const RasterImage& image,
                                          ColorSpace space);

void check_mask_matches(const RasterImage& image, const ForegroundMask& mask);

}  // namespace reid::imaging
