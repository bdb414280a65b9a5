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

#include "core/png_decoder.hpp"

#include <png.h>

#include <cstring>

#include "core/error.hpp"

namespace reid::imaging {

RasterImage decode_png(std::string_view bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    fail(ErrorCode::kCorruptFile, std::string("png: ") + png.message);

  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    fail(ErrorCode::kUnsupportedFormat, "png: only 8-bit channels are supported");
  }
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    fail(ErrorCode::kCorruptFile, "png: degenerate image dimensions");
  }
  if (static_cast<std::size_t>(png.width) * png.height > kMaxPixels) {
    png_image_free(&png);
    fail(ErrorCode::kDimensionOverflow, "png: image exceeds 2^26 pixels");
  }

  RasterImage image;
  image.width = static_cast<int>(png.width);
  image.height = static_cast<int>(png.height);
  png.format = PNG_FORMAT_RGB;
  image.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    fail(ErrorCode::kCorruptFile, "png: " + msg);
  }
  return image;
}

}  // namespace reid::imaging
