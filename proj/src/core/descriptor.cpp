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

#include "core/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "core/error.hpp"

namespace reid::descriptor {
namespace {

using imaging::ColorSpace;
using imaging::ForegroundMask;
using imaging::RasterImage;

constexpr int kPool = 3;
constexpr int kSiltpCodes = 81;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<View> views_for(const ForegroundMask* mask, const ExtractionConfig& config) {
  if (mask != nullptr && config.use_mask) return {View::kWhole, View::kForeground};
  return {View::kWhole};
}

void check_geometry(const RasterImage& image, const ExtractionConfig& config) {
  if (image.width < kPool)
    fail(ErrorCode::kStackTooSmall, "image width " + std::to_string(image.width) + " is below 3");
  if (image.height < kPool * config.stripes)
    fail(ErrorCode::kStackTooSmall, "image height " + std::to_string(image.height) +
                                        " cannot hold " + std::to_string(config.stripes) +
                                        " stripes of at least 3 rows");
}

// Per stripe: does the mask mark at least one pixel in the stripe's rows?
std::vector<bool> stripes_with_foreground(const ForegroundMask& mask, int stripes) {
  const auto rows = stripe_rows(mask.height, stripes);
  std::vector<bool> out(rows.size(), false);
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto begin = mask.values.begin() + static_cast<std::ptrdiff_t>(rows[s].first) * mask.width;
    const auto end = mask.values.begin() + static_cast<std::ptrdiff_t>(rows[s].second) * mask.width;
    out[s] = std::any_of(begin, end, [](std::uint8_t v) { return v != 0; });
  }
  return out;
}

sgm::GaussianMapModel model_for(const RasterImage& image, ColorSpace space, View view,
                                const ForegroundMask* mask, const sgm::PalettePoints& names,
                                const ExtractionConfig& config) {
  switch (config.covariance) {
    case CovarianceMode::kIdentity:
      return sgm::identity_model(space);
    case CovarianceMode::kGlobal:
      return (*config.global_models)[static_cast<int>(space)];
    case CovarianceMode::kPerImage:
      break;
  }
  const auto pixels =
      imaging::convert(image, space, view == View::kForeground ? mask : nullptr, true);
  return sgm::fit_model(pixels.points, names, config.epsilon0, space);
}

void append(ImageRepresentation& rep, const LayoutRecord& record, const double* values) {
  rep.values.insert(rep.values.end(), values, values + record.length);
  rep.layout.push_back(record);
}

// Pixel indices of one stripe that belong to the view, falling back to the
// whole stripe when the view selects nothing.
std::vector<std::size_t> stripe_pixels(const RasterImage& image, std::pair<int, int> rows,
                                       const ForegroundMask* mask) {
  std::vector<std::size_t> idx;
  const std::size_t begin = static_cast<std::size_t>(rows.first) * image.width;
  const std::size_t end = static_cast<std::size_t>(rows.second) * image.width;
  if (mask != nullptr) {
    for (std::size_t i = begin; i < end; ++i)
      if (mask->values[i]) idx.push_back(i);
  }
  if (idx.empty()) {
    idx.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) idx[i - begin] = i;
  }
  return idx;
}

}  // namespace

const char* feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kSgm: return "SGM";
    case FeatureKind::kColorHistogram: return "CH";
    case FeatureKind::kSiltp: return "SILTP";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature_kind(const std::string& name) {
  const auto n = lower(name);
  if (n == "sgm") return FeatureKind::kSgm;
  if (n == "ch") return FeatureKind::kColorHistogram;
  if (n == "siltp") return FeatureKind::kSiltp;
  return std::nullopt;
}

const char* view_name(View view) { return view == View::kWhole ? "whole" : "foreground"; }

const char* covariance_mode_name(CovarianceMode mode) {
  switch (mode) {
    case CovarianceMode::kPerImage: return "per-image";
    case CovarianceMode::kIdentity: return "identity";
    case CovarianceMode::kGlobal: return "global";
  }
  return "?";
}

std::optional<CovarianceMode> parse_covariance_mode(const std::string& name) {
  const auto n = lower(name);
  if (n == "per-image" || n == "fitted") return CovarianceMode::kPerImage;
  if (n == "identity" || n == "eu") return CovarianceMode::kIdentity;
  if (n == "global" || n == "ma") return CovarianceMode::kGlobal;
  return std::nullopt;
}

void ExtractionConfig::validate() const {
  if (k < 1 || k > sgm::kNumColorNames)
    fail(ErrorCode::kInvalidArgument, "k must lie in [1,16]");
  if (stripes < 1) fail(ErrorCode::kInvalidArgument, "stripes must be positive");
  if (spaces.empty()) fail(ErrorCode::kInvalidArgument, "at least one color space is required");
  if (features.empty()) fail(ErrorCode::kInvalidArgument, "at least one feature kind is required");
  if (!(epsilon0 > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon0 must be positive");
  if (histogram_bins < 1) fail(ErrorCode::kInvalidArgument, "histogram_bins must be positive");
  if (!(siltp_tau >= 0.0)) fail(ErrorCode::kInvalidArgument, "siltp_tau must be non-negative");
  if (covariance == CovarianceMode::kGlobal && !global_models)
    fail(ErrorCode::kInvalidArgument, "global covariance mode needs fitted global models");
}

std::size_t layout_length(const std::vector<LayoutRecord>& layout) {
  std::size_t n = 0;
  for (const auto& r : layout) n += static_cast<std::size_t>(r.length);
  return n;
}

std::vector<std::string> layout_paths(const std::vector<LayoutRecord>& layout) {
  std::vector<std::string> out;
  out.reserve(layout_length(layout));
  for (const auto& r : layout) {
    std::string prefix = std::string(feature_kind_name(r.kind)) + "/" + view_name(r.view) + "/";
    if (r.space >= 0)
      prefix += std::string(imaging::color_space_name(static_cast<ColorSpace>(r.space))) + "/";
    prefix += "s" + std::to_string(r.stripe) + "/";
    prefix += r.kind == FeatureKind::kSgm ? "c" : "b";
    for (int i = 0; i < r.length; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%02d", i);
      out.push_back(prefix + buf);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> stripe_rows(int height, int stripes) {
  if (stripes < 1 || height < stripes)
    fail(ErrorCode::kInvalidArgument, "cannot split " + std::to_string(height) + " rows into " +
                                          std::to_string(stripes) + " stripes");
  const int base = height / stripes;
  std::vector<std::pair<int, int>> rows(static_cast<std::size_t>(stripes));
  for (int s = 0; s < stripes; ++s) rows[s] = {s * base, s == stripes - 1 ? height : (s + 1) * base};
  return rows;
}

std::pair<int, int> pooled_stripe_rows(int image_height, int stripes, int stripe) {
  const auto rows = stripe_rows(image_height, stripes);
  const auto [begin, end] = rows.at(static_cast<std::size_t>(stripe));
  // Cells are owned by the stripe containing their top image row.
  const int first = (begin + kPool - 1) / kPool;
  const int last = (end + kPool - 1) / kPool;
  return {first, last};
}

SoftGaussianMapStack build_maps(const RasterImage& image, const sgm::GaussianMapModel& model,
                                const sgm::PalettePoints& names, int k) {
  SoftGaussianMapStack stack(image.width, image.height);
  const std::size_t plane = static_cast<std::size_t>(image.width) * image.height;
  const std::uint8_t* p = image.pixels.data();
  for (std::size_t i = 0; i < plane; ++i, p += 3) {
    const auto s = sgm::soft_map(model, imaging::convert_pixel(p, model.space), names, k);
    for (int j = 0; j < sgm::kNumColorNames; ++j) stack.data[j * plane + i] = s.weights[j];
  }
  return stack;
}

SoftGaussianMapStack build_maps(const RasterImage& image, ColorSpace space,
                                const ForegroundMask* mask, const sgm::ColorNamePalette& palette,
                                int k, double epsilon0) {
  const auto names = palette.in_space(space);
  const auto pixels = imaging::convert(image, space, mask, true);
  const auto model = sgm::fit_model(pixels.points, names, epsilon0, space);
  return build_maps(image, model, names, k);
}

void apply_mask(SoftGaussianMapStack& stack, const ForegroundMask& mask) {
  if (mask.width != stack.width || mask.height != stack.height)
    fail(ErrorCode::kDimensionMismatch, "mask does not match map dimensions");
  const std::size_t plane = mask.values.size();
  for (int j = 0; j < sgm::kNumColorNames; ++j)
    for (std::size_t i = 0; i < plane; ++i)
      if (!mask.values[i]) stack.data[j * plane + i] = 0.0;
}

SoftGaussianMapStack max_pool(const SoftGaussianMapStack& stack) {
  if (stack.width < kPool || stack.height < kPool)
    fail(ErrorCode::kStackTooSmall, "max pooling needs maps of at least 3x3, got " +
                                        std::to_string(stack.width) + "x" +
                                        std::to_string(stack.height));
  const int pw = (stack.width + kPool - 1) / kPool;
  const int ph = (stack.height + kPool - 1) / kPool;
  SoftGaussianMapStack out(pw, ph);
  for (int j = 0; j < sgm::kNumColorNames; ++j) {
    for (int cy = 0; cy < ph; ++cy) {
      const int y1 = std::min(stack.height, (cy + 1) * kPool);
      for (int cx = 0; cx < pw; ++cx) {
        const int x1 = std::min(stack.width, (cx + 1) * kPool);
        double m = stack.at(j, cx * kPool, cy * kPool);
        for (int y = cy * kPool; y < y1; ++y)
          for (int x = cx * kPool; x < x1; ++x) m = std::max(m, stack.at(j, x, y));
        out.at(j, cx, cy) = m;
      }
    }
  }
  return out;
}

StripeDescriptor stripe_descriptor(const SoftGaussianMapStack& pooled, int row_begin,
                                   int row_end) {
  if (row_begin < 0 || row_end > pooled.height || row_begin >= row_end || pooled.width <= 0)
    fail(ErrorCode::kEmptyStripe, "stripe rows [" + std::to_string(row_begin) + "," +
                                      std::to_string(row_end) + ") are empty or outside " +
                                      std::to_string(pooled.height) + " pooled rows");
  StripeDescriptor d{};
  double total = 0.0;
  for (int j = 0; j < sgm::kNumColorNames; ++j) {
    double sum = 0.0;
    for (int y = row_begin; y < row_end; ++y)
      for (int x = 0; x < pooled.width; ++x) sum += pooled.at(j, x, y);
    d[j] = sum;
    total += sum;
  }
  if (!(total > 0.0)) {
    d.fill(1.0 / sgm::kNumColorNames);
    return d;
  }
  for (double& v : d) v /= total;
  return d;
}

ImageRepresentation extract_sgm(const RasterImage& image, const ForegroundMask* mask,
                                const ExtractionConfig& config, const std::string& source_id) {
  config.validate();
  check_geometry(image, config);
  if (mask != nullptr) imaging::check_mask_matches(image, *mask);

  ImageRepresentation rep;
  rep.source_id = source_id;
  const auto views = views_for(mask, config);
  std::vector<bool> has_fg;
  if (views.size() > 1) has_fg = stripes_with_foreground(*mask, config.stripes);

  for (View view : views) {
    for (ColorSpace space : config.spaces) {
      const auto names = config.palette.in_space(space);
      const auto model = model_for(image, space, view, mask, names, config);
      SoftGaussianMapStack maps = build_maps(image, model, names, config.k);
      const SoftGaussianMapStack pooled = max_pool(maps);
      SoftGaussianMapStack pooled_fg;
      if (view == View::kForeground) {
        apply_mask(maps, *mask);
        pooled_fg = max_pool(maps);
      }
      for (int s = 0; s < config.stripes; ++s) {
        const auto [pb, pe] = pooled_stripe_rows(image.height, config.stripes, s);
        const bool masked = view == View::kForeground && has_fg[s];
        const auto d = stripe_descriptor(masked ? pooled_fg : pooled, pb, pe);
        append(rep, {FeatureKind::kSgm, static_cast<int>(space), view, s, sgm::kNumColorNames},
               d.data());
      }
    }
  }
  return rep;
}

ImageRepresentation extract_color_histogram(const RasterImage& image, const ForegroundMask* mask,
                                            const ExtractionConfig& config,
                                            const std::string& source_id) {
  config.validate();
  check_geometry(image, config);
  if (mask != nullptr) imaging::check_mask_matches(image, *mask);

  ImageRepresentation rep;
  rep.source_id = source_id;
  const int bins = config.histogram_bins;
  const auto rows = stripe_rows(image.height, config.stripes);
  std::vector<double> hist(static_cast<std::size_t>(3 * bins));
  for (View view : views_for(mask, config)) {
    for (ColorSpace space : config.spaces) {
      const auto grid = imaging::convert_grid(image, space);
      for (int s = 0; s < config.stripes; ++s) {
        const auto idx = stripe_pixels(image, rows[s], view == View::kForeground ? mask : nullptr);
        std::fill(hist.begin(), hist.end(), 0.0);
        for (std::size_t i : idx) {
          for (int c = 0; c < 3; ++c) {
            const int b = std::clamp(static_cast<int>(std::floor(grid[i][c] * bins)), 0, bins - 1);
            hist[static_cast<std::size_t>(c * bins + b)] += 1.0;
          }
        }
        const double total = 3.0 * static_cast<double>(idx.size());
        for (double& v : hist) v /= total;
        append(rep, {FeatureKind::kColorHistogram, static_cast<int>(space), view, s, 3 * bins},
               hist.data());
      }
    }
  }
  return rep;
}

std::vector<int> siltp_codes(const RasterImage& image, double tau) {
  const int w = image.width;
  const int h = image.height;
  std::vector<double> gray(image.pixel_count());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const std::uint8_t* p = image.pixels.data() + 3 * i;
    gray[i] = (static_cast<double>(p[0]) + p[1] + p[2]) / 3.0;
  }
  auto g = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return gray[static_cast<std::size_t>(y) * w + x];
  };
  static constexpr int kDx[4] = {1, 0, -1, 0};
  static constexpr int kDy[4] = {0, -1, 0, 1};
  std::vector<int> codes(gray.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double c = g(x, y);
      int code = 0;
      int weight = 1;
      for (int n = 0; n < 4; ++n) {
        const double v = g(x + kDx[n], y + kDy[n]);
        int t = 0;
        if (v > (1.0 + tau) * c) t = 1;
        else if (v < (1.0 - tau) * c) t = 2;
        code += t * weight;
        weight *= 3;
      }
      codes[static_cast<std::size_t>(y) * w + x] = code;
    }
  }
  return codes;
}

ImageRepresentation extract_siltp(const RasterImage& image, const ForegroundMask* mask,
                                  const ExtractionConfig& config, const std::string& source_id) {
  config.validate();
  check_geometry(image, config);
  if (mask != nullptr) imaging::check_mask_matches(image, *mask);

  ImageRepresentation rep;
  rep.source_id = source_id;
  const auto codes = siltp_codes(image, config.siltp_tau);
  const auto rows = stripe_rows(image.height, config.stripes);
  std::vector<double> hist(kSiltpCodes);
  for (View view : views_for(mask, config)) {
    for (int s = 0; s < config.stripes; ++s) {
      const auto idx = stripe_pixels(image, rows[s], view == View::kForeground ? mask : nullptr);
      std::fill(hist.begin(), hist.end(), 0.0);
      for (std::size_t i : idx) hist[static_cast<std::size_t>(codes[i])] += 1.0;
      for (double& v : hist) v /= static_cast<double>(idx.size());
      append(rep, {FeatureKind::kSiltp, -1, view, s, kSiltpCodes}, hist.data());
    }
  }
  return rep;
}

ImageRepresentation fuse(const std::vector<ImageRepresentation>& reps) {
  if (reps.empty()) fail(ErrorCode::kInvalidArgument, "nothing to fuse");
  ImageRepresentation out;
  out.source_id = reps.front().source_id;
  for (const auto& r : reps) {
    if (r.source_id != out.source_id)
      fail(ErrorCode::kSourceMismatch,
           "cannot fuse representations of '" + out.source_id + "' and '" + r.source_id + "'");
    out.values.insert(out.values.end(), r.values.begin(), r.values.end());
    out.layout.insert(out.layout.end(), r.layout.begin(), r.layout.end());
  }
  return out;
}

ImageRepresentation extract(const RasterImage& image, const ForegroundMask* mask,
                            const ExtractionConfig& config, const std::string& source_id) {
  std::vector<ImageRepresentation> parts;
  for (FeatureKind kind : config.features) {
    switch (kind) {
      case FeatureKind::kSgm:
        parts.push_back(extract_sgm(image, mask, config, source_id));
        break;
      case FeatureKind::kColorHistogram:
        parts.push_back(extract_color_histogram(image, mask, config, source_id));
        break;
      case FeatureKind::kSiltp:
        parts.push_back(extract_siltp(image, mask, config, source_id));
        break;
    }
  }
  return fuse(parts);
}

std::array<sgm::GaussianMapModel, 4> fit_global_models(
    const std::vector<const RasterImage*>& images, const std::vector<const ForegroundMask*>& masks,
    const ExtractionConfig& config) {
  if (images.empty()) fail(ErrorCode::kEmptyPixelSet, "global fit needs at least one image");
  std::array<sgm::GaussianMapModel, 4> models;
  for (ColorSpace space : imaging::kAllColorSpaces) {
    sgm::MomentAccumulator acc;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const ForegroundMask* m =
          (config.use_mask && i < masks.size()) ? masks[i] : nullptr;
      const auto pixels = imaging::convert(*images[i], space, m, true);
      sgm::MomentAccumulator part;
      for (const auto& z : pixels.points) part.add(z);
      acc.merge(part);
    }
    const auto names = config.palette.in_space(space);
    models[static_cast<int>(space)] = sgm::model_from_covariance(
        sgm::discrepancy_covariance(acc, names), config.epsilon0, space);
  }
  return models;
}

}  // namespace reid::descriptor
