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

#include "core/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "core/error.hpp"
#include "core/png_decoder.hpp"

namespace reid::imaging {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIoFailure, "read error: " + path);
  return bytes;
}

// Minimal netpbm header tokenizer: whitespace and '#' comments between
// tokens, exactly one whitespace byte between the last token and the raster.
class NetpbmHeader {
 public:
  explicit NetpbmHeader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view magic() {
    if (bytes_.size() < 2) fail(ErrorCode::kUnsupportedFormat, "file too short for a netpbm header");
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
      fail(ErrorCode::kCorruptFile, std::string("malformed header field: ") + what);
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
      if (value > (std::uint64_t{1} << 40))
        fail(ErrorCode::kDimensionOverflow, std::string("header field too large: ") + what);
      ++pos_;
    }
    return value;
  }

  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      fail(ErrorCode::kCorruptFile, "missing whitespace before raster data");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

struct NetpbmLayout {
  int width;
  int height;
  std::size_t offset;
};

NetpbmLayout parse_netpbm(std::string_view bytes, std::string_view expected_magic,
                          std::size_t channels) {
  NetpbmHeader header(bytes);
  if (header.magic() != expected_magic)
    fail(ErrorCode::kUnsupportedFormat,
         "expected binary netpbm magic " + std::string(expected_magic));
  const auto w = header.number("width");
  const auto h = header.number("height");
  const auto maxval = header.number("maxval");
  if (w == 0 || h == 0) fail(ErrorCode::kCorruptFile, "degenerate image dimensions");
  if (w * h > kMaxPixels)
    fail(ErrorCode::kDimensionOverflow,
         "image of " + std::to_string(w) + "x" + std::to_string(h) + " exceeds 2^26 pixels");
  if (maxval != 255)
    fail(ErrorCode::kUnsupportedFormat, "only maxval 255 is supported, got " + std::to_string(maxval));
  const std::size_t offset = header.payload_offset();
  const std::size_t need = static_cast<std::size_t>(w * h) * channels;
  if (bytes.size() < offset + need)
    fail(ErrorCode::kCorruptFile, "truncated raster payload: expected " + std::to_string(need) +
                                      " bytes, found " + std::to_string(bytes.size() - std::min(bytes.size(), offset)));
  return {static_cast<int>(w), static_cast<int>(h), offset};
}

bool has_png_signature(std::string_view bytes) {
  static constexpr unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

void write_file(const std::string& path, const std::string& header,
                const std::vector<std::uint8_t>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoFailure, "cannot create file: " + path);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) fail(ErrorCode::kIoFailure, "write error: " + path);
}

}  // namespace

std::string_view color_space_name(ColorSpace space) {
  switch (space) {
    case ColorSpace::kRgb: return "RGB";
    case ColorSpace::kNormalizedRgb: return "rgb";
    case ColorSpace::kL1L2L3: return "l1l2l3";
    case ColorSpace::kHsv: return "HSV";
  }
  return "?";
}

std::optional<ColorSpace> parse_color_space(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "RGB") return ColorSpace::kRgb;
  if (name == "rgb" || lower == "nrgb" || lower == "normalizedrgb")
    return ColorSpace::kNormalizedRgb;
  if (lower == "l1l2l3") return ColorSpace::kL1L2L3;
  if (lower == "hsv") return ColorSpace::kHsv;
  return std::nullopt;
}

RasterImage decode_ppm(std::string_view bytes) {
  const auto layout = parse_netpbm(bytes, "P6", 3);
  RasterImage image;
  image.width = layout.width;
  image.height = layout.height;
  const auto* begin = reinterpret_cast<const std::uint8_t*>(bytes.data()) + layout.offset;
  image.pixels.assign(begin, begin + image.pixel_count() * 3);
  return image;
}

ForegroundMask decode_pgm_mask(std::string_view bytes) {
  const auto layout = parse_netpbm(bytes, "P5", 1);
  ForegroundMask mask;
  mask.width = layout.width;
  mask.height = layout.height;
  const auto* begin = reinterpret_cast<const std::uint8_t*>(bytes.data()) + layout.offset;
  const std::size_t n = static_cast<std::size_t>(mask.width) * mask.height;
  mask.values.resize(n);
  std::transform(begin, begin + n, mask.values.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v > 127 ? 1 : 0); });
  return mask;
}

RasterImage load_image(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  if (has_png_signature(bytes)) return decode_png(bytes);
  fail(ErrorCode::kUnsupportedFormat, "not a binary PPM (P6) or PNG file: " + path);
}

ForegroundMask load_mask(const std::string& path, const RasterImage& image) {
  const std::string bytes = read_file(path);
  ForegroundMask mask = decode_pgm_mask(bytes);
  check_mask_matches(image, mask);
  return mask;
}

void check_mask_matches(const RasterImage& image, const ForegroundMask& mask) {
  if (mask.width != image.width || mask.height != image.height)
    fail(ErrorCode::kDimensionMismatch,
         "mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
             " but image is " + std::to_string(image.width) + "x" +
             std::to_string(image.height));
}

void save_ppm(const RasterImage& image, const std::string& path) {
  write_file(path,
             "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n",
             image.pixels);
}

void save_pgm(const ForegroundMask& mask, const std::string& path) {
  std::vector<std::uint8_t> bytes(mask.values.size());
  std::transform(mask.values.begin(), mask.values.end(), bytes.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
  write_file(path,
             "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n",
             bytes);
}

Eigen::Vector3d convert_rgb(double r, double g, double b, ColorSpace space) {
  constexpr double kThird = 1.0 / 3.0;
  switch (space) {
    case ColorSpace::kRgb:
      return {r, g, b};
    case ColorSpace::kNormalizedRgb: {
      const double sum = r + g + b;
      if (sum <= 0.0) return {kThird, kThird, kThird};
      return {r / sum, g / sum, b / sum};
    }
    case ColorSpace::kL1L2L3: {
      const double rg = (r - g) * (r - g);
      const double rb = (r - b) * (r - b);
      const double gb = (g - b) * (g - b);
      const double d = rg + rb + gb;
      if (d <= 0.0) return {kThird, kThird, kThird};
      return {rg / d, rb / d, gb / d};
    }
    case ColorSpace::kHsv: {
      const double max = std::max({r, g, b});
      const double min = std::min({r, g, b});
      const double delta = max - min;
      const double v = max;
      if (max <= 0.0 || delta <= 0.0) return {0.0, 0.0, v};
      const double s = delta / max;
      double h;
      if (max == r) {
        h = (g - b) / delta;
        if (h < 0.0) h += 6.0;
      } else if (max == g) {
        h = (b - r) / delta + 2.0;
      } else {
        h = (r - g) / delta + 4.0;
      }
      return {h / 6.0, s, v};
    }
  }
  return {r, g, b};
}

std::vector<Eigen::Vector3d> convert_grid(const RasterImage& image, ColorSpace space) {
  std::vector<Eigen::Vector3d> out(image.pixel_count());
  const std::uint8_t* p = image.pixels.data();
  for (auto& z : out) {
    z = convert_pixel(p, space);
    p += 3;
  }
  return out;
}

PixelSet convert(const RasterImage& image, ColorSpace space, const ForegroundMask* mask,
                 bool fallback_to_whole) {
  PixelSet set;
  set.space = space;
  if (mask == nullptr) {
    set.points = convert_grid(image, space);
    return set;
  }
  check_mask_matches(image, *mask);
  const std::size_t n = image.pixel_count();
  set.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask->values[i]) set.points.push_back(convert_pixel(image.pixels.data() + 3 * i, space));
  }
  if (set.points.empty()) {
    if (!fallback_to_whole)
      fail(ErrorCode::kEmptyPixelSet, "foreground mask selects no pixels");
    set.points = convert_grid(image, space);
  }
  return set;
}

}  // namespace reid::imaging
