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
#include <optional>
#include <string>
#include <vector>

#include "core/imaging.hpp"
#include "core/palette.hpp"
#include "core/sgm.hpp"

namespace reid::descriptor {

enum class FeatureKind : int { kSgm = 0, kColorHistogram = 1, kSiltp = 2 };
enum class View : int { kWhole = 0, kForeground = 1 };

/// How each color space's discrepancy covariance is obtained.
enum class CovarianceMode : int {
  kPerImage = 0,  // fitted on the image's own pixel set
  kIdentity = 1,  // Sigma = I, Euclidean soft assignment
  kGlobal = 2,    // fitted once on pixels pooled over a training corpus
};

const char* feature_kind_name(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(const std::string& name);
const char* view_name(View view);
const char* covariance_mode_name(CovarianceMode mode);
std::optional<CovarianceMode> parse_covariance_mode(const std::string& name);

struct ExtractionConfig {
  int k = 5;
  int stripes = 10;
  std::vector<imaging::ColorSpace> spaces{imaging::kAllColorSpaces.begin(),
                                          imaging::kAllColorSpaces.end()};
  bool use_mask = true;
  double epsilon0 = sgm::kDefaultEpsilon0;
  std::vector<FeatureKind> features{FeatureKind::kSgm};
  sgm::ColorNamePalette palette = sgm::default_palette();
  CovarianceMode covariance = CovarianceMode::kPerImage;
  /// Indexed by ColorSpace; required when covariance == kGlobal.
  std::optional<std::array<sgm::GaussianMapModel, 4>> global_models;
  int histogram_bins = 16;
  double siltp_tau = 0.3;

  void validate() const;
};

/// 16 planes, plane-major: value(j, x, y) = data[(j * height + y) * width + x].
struct SoftGaussianMapStack {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  SoftGaussianMapStack() = default;
  SoftGaussianMapStack(int w, int h)
      : width(w), height(h),
        data(static_cast<std::size_t>(sgm::kNumColorNames) * w * h, 0.0) {}

  double& at(int plane, int x, int y) {
    return data[(static_cast<std::size_t>(plane) * height + y) * width + x];
  }
  double at(int plane, int x, int y) const {
    return data[(static_cast<std::size_t>(plane) * height + y) * width + x];
  }
};

using StripeDescriptor = std::array<double, sgm::kNumColorNames>;

struct LayoutRecord {
  FeatureKind kind = FeatureKind::kSgm;
  int space = -1;  // ColorSpace index, -1 for space-free features
  View view = View::kWhole;
  int stripe = 0;
  int length = 0;

  bool operator==(const LayoutRecord&) const = default;
};

struct ImageRepresentation {
  std::vector<double> values;
  std::vector<LayoutRecord> layout;
  std::string source_id;
};

std::size_t layout_length(const std::vector<LayoutRecord>& layout);
/// One path string per dimension, e.g. "SGM/whole/RGB/s3/c07".
std::vector<std::string> layout_paths(const std::vector<LayoutRecord>& layout);

/// Image row ranges [begin, end) of the horizontal stripes; the remainder
/// rows join the last stripe.
std::vector<std::pair<int, int>> stripe_rows(int height, int stripes);

/// Soft Gaussian maps over the full image grid under a given model.
SoftGaussianMapStack build_maps(const imaging::RasterImage& image,
                                const sgm::GaussianMapModel& model,
                                const sgm::PalettePoints& names, int k);
/// Fits the model on the (masked or whole) pixel set first.
SoftGaussianMapStack build_maps(const imaging::RasterImage& image, imaging::ColorSpace space,
                                const imaging::ForegroundMask* mask,
                                const sgm::ColorNamePalette& palette, int k,
                                double epsilon0 = sgm::kDefaultEpsilon0);

/// Zeroes every background location of every plane.
void apply_mask(SoftGaussianMapStack& stack, const imaging::ForegroundMask& mask);

/// Non-overlapping 3x3, stride 3 max pooling; partial border cells pool
/// over their actual extent.
SoftGaussianMapStack max_pool(const SoftGaussianMapStack& stack);

/// Sums each plane over pooled rows [row_begin, row_end) and sum-normalizes.
/// A zero-sum stripe yields the uniform distribution.
StripeDescriptor stripe_descriptor(const SoftGaussianMapStack& pooled, int row_begin,
                                   int row_end);

/// Pooled row range holding the cells whose top image row falls in the
/// given stripe.
std::pair<int, int> pooled_stripe_rows(int image_height, int stripes, int stripe);

ImageRepresentation extract_sgm(const imaging::RasterImage& image,
                                const imaging::ForegroundMask* mask,
                                const ExtractionConfig& config,
                                const std::string& source_id = "");
ImageRepresentation extract_color_histogram(const imaging::RasterImage& image,
                                            const imaging::ForegroundMask* mask,
                                            const ExtractionConfig& config,
                                            const std::string& source_id = "");
ImageRepresentation extract_siltp(const imaging::RasterImage& image,
                                  const imaging::ForegroundMask* mask,
                                  const ExtractionConfig& config,
                                  const std::string& source_id = "");

/// Scale-invariant local ternary code (4-neighbour, replicate padding) of
/// every pixel, values in [0, 81).
std::vector<int> siltp_codes(const imaging::RasterImage& image, double tau);

ImageRepresentation fuse(const std::vector<ImageRepresentation>& reps);

/// Every feature listed in config.features, fused in that order.
ImageRepresentation extract(const imaging::RasterImage& image,
                            const imaging::ForegroundMask* mask,
                            const ExtractionConfig& config, const std::string& source_id = "");

/// Per-space models fitted on pixels pooled across many images (masked
/// pixels when masks are given).
std::array<sgm::GaussianMapModel, 4> fit_global_models(
    const std::vector<const imaging::RasterImage*>& images,
    const std::vector<const imaging::ForegroundMask*>& masks, const ExtractionConfig& config);

}  // namespace reid::descriptor
