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
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "core/descriptor.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace reid;
using namespace reid::descriptor;
using imaging::ColorSpace;
using reid::testing::full_mask;
using reid::testing::random_image;
using reid::testing::solid_image;

namespace {

ExtractionConfig sgm_only() { return ExtractionConfig{}; }

// Scalar reference of one SGM stripe descriptor on the whole image.
std::array<double, 16> reference_stripe(const imaging::RasterImage& img, ColorSpace space, int k,
                                        int stripes, int stripe) {
  const auto& pal = sgm::default_palette();
  std::vector<Eigen::Vector3d> c(16);
  for (int j = 0; j < 16; ++j) c[j] = imaging::convert_rgb(pal.rgb[j][0], pal.rgb[j][1], pal.rgb[j][2], space);
  const std::size_t n = img.pixel_count();
  std::vector<Eigen::Vector3d> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = img.pixels.data() + 3 * i;
    z[i] = imaging::convert_rgb(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0, space);
  }
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  for (const auto& zi : z)
    for (const auto& cj : c) sigma += (zi - cj) * (zi - cj).transpose();
  sigma /= 16.0 * static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sigma);
  Eigen::Vector3d lam = es.eigenvalues();
  for (int i = 0; i < 3; ++i)
    if (lam[i] <= 0) lam[i] = 1.0 / sgm::kDefaultEpsilon0;
  const Eigen::Matrix3d inv = es.eigenvectors() * lam.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();

  std::vector<std::array<double, 16>> map(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 16> q;
    for (int j = 0; j < 16; ++j) q[j] = (z[i] - c[j]).dot(inv * (z[i] - c[j]));
    std::array<int, 16> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] < q[b]; });
    map[i].fill(0.0);
    double total = 0.0;
    for (int t = 0; t < k; ++t) total += std::exp(-0.5 * (q[order[t]] - q[order[0]]));
    for (int t = 0; t < k; ++t) map[i][order[t]] = std::exp(-0.5 * (q[order[t]] - q[order[0]])) / total;
  }

  const int base = img.height / stripes;
  const int begin = stripe * base;
  const int end = stripe == stripes - 1 ? img.height : begin + base;
  std::array<double, 16> d{};
  for (int cy = 0; 3 * cy < img.height; ++cy) {
    if (3 * cy < begin || 3 * cy >= end) continue;
    for (int cx = 0; 3 * cx < img.width; ++cx)
      for (int j = 0; j < 16; ++j) {
        double m = 0.0;
        for (int y = 3 * cy; y < std::min(img.height, 3 * cy + 3); ++y)
          for (int x = 3 * cx; x < std::min(img.width, 3 * cx + 3); ++x)
            m = std::max(m, map[static_cast<std::size_t>(y) * img.width + x][j]);
        d[j] += m;
      }
  }
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  for (double& v : d) v /= total;
  return d;
}

}  // namespace

TEST_CASE("a uniform image gives identical maps at every location") {
  const auto img = solid_image(9, 12, 200, 40, 90);
  const auto stack = build_maps(img, ColorSpace::kRgb, nullptr, sgm::default_palette(), 5);
  for (int j = 0; j < 16; ++j)
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 9; ++x) CHECK(stack.at(j, x, y) == stack.at(j, 0, 0));
  double total = 0.0;
  for (int j = 0; j < 16; ++j) total += stack.at(j, 4, 4);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("k = 1 on a palette-colored image is one-hot at that name") {
  const auto& pal = sgm::default_palette();
  for (int j = 0; j < 16; ++j) {
    const auto& c = pal.rgb[j];
    const auto img = solid_image(6, 6, static_cast<std::uint8_t>(std::lround(c[0] * 255)),
                                 static_cast<std::uint8_t>(std::lround(c[1] * 255)),
                                 static_cast<std::uint8_t>(std::lround(c[2] * 255)));
    const auto stack = build_maps(img, sgm::identity_model(), pal.in_space(ColorSpace::kRgb), 1);
    for (int i = 0; i < 16; ++i) CHECK(stack.at(i, 2, 3) == (i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("max pooling keeps the largest value of each 3x3 patch") {
  SoftGaussianMapStack stack(3, 3);
  const double patch[9] = {0.1, 0.2, 0.05, 0.3, 0.4, 0.0, 0.15, 0.35, 0.25};
  for (int i = 0; i < 9; ++i) stack.at(0, i % 3, i / 3) = patch[i];
  const auto pooled = max_pool(stack);
  CHECK(pooled.width == 1);
  CHECK(pooled.height == 1);
  CHECK(pooled.at(0, 0, 0) == 0.4);

  SoftGaussianMapStack constant(7, 8);
  std::fill(constant.data.begin(), constant.data.end(), 0.625);
  const auto pc = max_pool(constant);
  CHECK(pc.width == 3);
  CHECK(pc.height == 3);
  CHECK(std::all_of(pc.data.begin(), pc.data.end(), [](double v) { return v == 0.625; }));
}

TEST_CASE("max pooling matches a brute-force window search including partial borders") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  for (auto [w, h] : {std::pair{4, 4}, std::pair{6, 9}, std::pair{11, 13}, std::pair{48, 128}}) {
    SoftGaussianMapStack stack(w, h);
    for (double& v : stack.data) v = u(rng);
    const auto pooled = max_pool(stack);
    CHECK(pooled.width == (w + 2) / 3);
    CHECK(pooled.height == (h + 2) / 3);
    for (int j = 0; j < 16; ++j)
      for (int cy = 0; cy < pooled.height; ++cy)
        for (int cx = 0; cx < pooled.width; ++cx) {
          double m = -1.0;
          for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
              if (x / 3 == cx && y / 3 == cy) m = std::max(m, stack.at(j, x, y));
          CHECK(pooled.at(j, cx, cy) == m);
        }
  }
  REQUIRE_ERROR(max_pool(SoftGaussianMapStack(2, 5)), ErrorCode::kStackTooSmall);
  REQUIRE_ERROR(max_pool(SoftGaussianMapStack(5, 2)), ErrorCode::kStackTooSmall);
}

TEST_CASE("stripe descriptors are sum-normalized pooled sums") {
  SoftGaussianMapStack pooled(2, 3);
  pooled.at(4, 0, 1) = 1.0;
  auto d = stripe_descriptor(pooled, 1, 2);
  for (int j = 0; j < 16; ++j) CHECK(d[j] == (j == 4 ? 1.0 : 0.0));

  SoftGaussianMapStack a(1, 1), b(1, 1), ab(1, 2);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u;
  for (int j = 0; j < 16; ++j) {
    a.at(j, 0, 0) = u(rng);
    b.at(j, 0, 0) = u(rng);
    ab.at(j, 0, 0) = a.at(j, 0, 0);
    ab.at(j, 0, 1) = b.at(j, 0, 0);
  }
  const auto combined = stripe_descriptor(ab, 0, 2);
  double total = 0.0;
  for (int j = 0; j < 16; ++j) total += a.at(j, 0, 0) + b.at(j, 0, 0);
  for (int j = 0; j < 16; ++j)
    CHECK(combined[j] == doctest::Approx((a.at(j, 0, 0) + b.at(j, 0, 0)) / total).epsilon(1e-14));

  const auto zero = stripe_descriptor(SoftGaussianMapStack(2, 2), 0, 2);
  for (double v : zero) CHECK(v == 1.0 / 16);
  REQUIRE_ERROR(stripe_descriptor(pooled, 2, 2), ErrorCode::kEmptyStripe);
  REQUIRE_ERROR(stripe_descriptor(pooled, 1, 4), ErrorCode::kEmptyStripe);
}

TEST_CASE("stripe geometry") {
  const auto rows = stripe_rows(128, 10);
  CHECK(rows.front() == std::pair{0, 12});
  CHECK(rows.back() == std::pair{108, 128});
  int pooled_total = 0;
  for (int s = 0; s < 10; ++s) {
    const auto [b, e] = pooled_stripe_rows(128, 10, s);
    CHECK(b < e);
    if (s > 0) CHECK(b == pooled_stripe_rows(128, 10, s - 1).second);
    pooled_total += e - b;
  }
  CHECK(pooled_total == 43);
  REQUIRE_ERROR(stripe_rows(5, 6), ErrorCode::kInvalidArgument);
}

TEST_CASE("full SGM stripe descriptor matches a scalar reference") {
  const auto img = random_image(12, 31, 99);
  ExtractionConfig cfg = sgm_only();
  cfg.stripes = 3;
  const auto rep = extract_sgm(img, nullptr, cfg);
  REQUIRE(rep.values.size() == 4u * 3 * 16);
  for (int si = 0; si < 4; ++si)
    for (int s = 0; s < 3; ++s) {
      const auto want = reference_stripe(img, imaging::kAllColorSpaces[si], 5, 3, s);
      for (int j = 0; j < 16; ++j)
        CHECK(rep.values[(si * 3 + s) * 16 + j] == doctest::Approx(want[j]).epsilon(1e-9));
    }
}

TEST_CASE("default dimensions") {
  const auto img = random_image(48, 128, 1);
  auto mask = full_mask(48, 128, 0);
  for (int y = 10; y < 120; ++y)
    for (int x = 12; x < 36; ++x) mask.values[y * 48 + x] = 1;
  ExtractionConfig cfg;
  const auto with_mask = extract(img, &mask, cfg);
  CHECK(with_mask.values.size() == 1280);
  CHECK(layout_length(with_mask.layout) == 1280);
  CHECK(extract(img, nullptr, cfg).values.size() == 640);
  cfg.use_mask = false;
  CHECK(extract(img, &mask, cfg).values.size() == 640);
  cfg.use_mask = true;
  cfg.features = {FeatureKind::kColorHistogram};
  CHECK(extract(img, &mask, cfg).values.size() == 3840);
  cfg.features = {FeatureKind::kSiltp};
  CHECK(extract(img, &mask, cfg).values.size() == 1620);
  cfg.features = {FeatureKind::kSgm, FeatureKind::kColorHistogram, FeatureKind::kSiltp};
  const auto all = extract(img, &mask, cfg);
  CHECK(all.values.size() == 1280 + 3840 + 1620);

  for (std::size_t i = 0, off = 0; i < all.layout.size(); off += all.layout[i].length, ++i) {
    const auto& r = all.layout[i];
    const double sum = std::accumulate(all.values.begin() + off, all.values.begin() + off + r.length, 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 0; j < r.length; ++j) CHECK(all.values[off + j] >= 0.0);
  }
}

TEST_CASE("layout order is view, space, stripe") {
  const auto img = random_image(48, 128, 2);
  const auto mask = full_mask(48, 128);
  const auto rep = extract(img, &mask, ExtractionConfig{});
  REQUIRE(rep.layout.size() == 80);
  for (int i = 0; i < 80; ++i) {
    CHECK(rep.layout[i].view == (i < 40 ? View::kWhole : View::kForeground));
    CHECK(rep.layout[i].space == (i / 10) % 4);
    CHECK(rep.layout[i].stripe == i % 10);
  }
  const auto paths = layout_paths(rep.layout);
  REQUIRE(paths.size() == 1280);
  CHECK(paths[0] == "SGM/whole/RGB/s0/c00");
  CHECK(std::set<std::string>(paths.begin(), paths.end()).size() == 1280);
}

TEST_CASE("an all-foreground mask duplicates the whole-image view") {
  const auto img = random_image(48, 128, 3);
  const auto mask = full_mask(48, 128);
  const auto rep = extract(img, &mask, ExtractionConfig{});
  for (int i = 0; i < 640; ++i) CHECK(rep.values[i] == rep.values[640 + i]);
}

TEST_CASE("foreground view ignores background pixels") {
  auto a = random_image(48, 128, 4);
  auto b = a;
  auto mask = full_mask(48, 128, 0);
  for (int y = 0; y < 128; ++y)
    for (int x = 15; x < 33; ++x) mask.values[y * 48 + x] = 1;
  // Change the background far from any pooling cell that touches the foreground.
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 12; ++x) b.pixels[(y * 48 + x) * 3] ^= 0x5a;
  ExtractionConfig cfg;
  cfg.covariance = CovarianceMode::kIdentity;
  const auto ra = extract(a, &mask, cfg);
  const auto rb = extract(b, &mask, cfg);
  for (int i = 640; i < 1280; ++i) CHECK(ra.values[i] == rb.values[i]);
  bool whole_changed = false;
  for (int i = 0; i < 640; ++i) whole_changed |= ra.values[i] != rb.values[i];
  CHECK(whole_changed);
}

TEST_CASE("stripes without foreground fall back to the whole stripe") {
  const auto img = random_image(48, 128, 5);
  auto mask = full_mask(48, 128, 0);
  for (int y = 0; y < 60; ++y)
    for (int x = 10; x < 30; ++x) mask.values[y * 48 + x] = 1;
  ExtractionConfig cfg;
  cfg.covariance = CovarianceMode::kIdentity;
  const auto rep = extract(img, &mask, cfg);
  for (int s = 5; s < 10; ++s)
    for (int j = 0; j < 16; ++j) CHECK(rep.values[640 + s * 16 + j] == rep.values[s * 16 + j]);
}

TEST_CASE("permuting the palette permutes each stripe descriptor") {
  const auto img = random_image(24, 30, 6);
  ExtractionConfig cfg;
  cfg.stripes = 2;
  // Achromatic names coincide in the chromaticity spaces, where ties follow index order.
  cfg.spaces = {ColorSpace::kRgb};
  std::array<int, 16> perm;
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(7);
  std::shuffle(perm.begin(), perm.end(), rng);
  ExtractionConfig permuted = cfg;
  for (int j = 0; j < 16; ++j) {
    permuted.palette.rgb[j] = cfg.palette.rgb[perm[j]];
    permuted.palette.labels[j] = cfg.palette.labels[perm[j]];
  }
  const auto a = extract(img, nullptr, cfg);
  const auto b = extract(img, nullptr, permuted);
  for (std::size_t block = 0; block < a.layout.size(); ++block)
    for (int j = 0; j < 16; ++j)
      CHECK(b.values[block * 16 + j] == doctest::Approx(a.values[block * 16 + perm[j]]).epsilon(1e-12));
}

TEST_CASE("extraction is deterministic") {
  const auto img = random_image(48, 128, 8);
  const auto mask = full_mask(48, 128);
  ExtractionConfig cfg;
  cfg.features = {FeatureKind::kSgm, FeatureKind::kColorHistogram, FeatureKind::kSiltp};
  CHECK(extract(img, &mask, cfg).values == extract(img, &mask, cfg).values);
}

TEST_CASE("SILTP and color histogram reference cases") {
  const auto flat = solid_image(9, 30, 120, 120, 120);
  for (int code : siltp_codes(flat, 0.3)) CHECK(code == 0);
  ExtractionConfig cfg;
  cfg.features = {FeatureKind::kSiltp};
  cfg.stripes = 3;
  const auto s = extract(flat, nullptr, cfg);
  for (int st = 0; st < 3; ++st) CHECK(s.values[st * 81] == 1.0);

  // Right neighbour brighter, others equal: ternary digit 1 at position 0.
  imaging::RasterImage step = solid_image(3, 3, 100, 100, 100);
  for (int c = 0; c < 3; ++c) step.pixels[(1 * 3 + 2) * 3 + c] = 200;
  CHECK(siltp_codes(step, 0.3)[1 * 3 + 1] == 1);
  // The bright pixel sees darker up, left and down neighbours.
  CHECK(siltp_codes(step, 0.3)[1 * 3 + 2] == 2 * 3 + 2 * 9 + 2 * 27);

  cfg.features = {FeatureKind::kColorHistogram};
  cfg.spaces = {ColorSpace::kRgb};
  cfg.histogram_bins = 4;
  const auto h = extract(solid_image(9, 30, 255, 0, 70), nullptr, cfg);
  REQUIRE(h.values.size() == 3u * 12);
  const double third = 1.0 / 3.0;
  CHECK(h.values[3] == doctest::Approx(third));
  CHECK(h.values[4] == doctest::Approx(third));
  CHECK(h.values[9] == doctest::Approx(third));
}

TEST_CASE("fusion") {
  const auto img = random_image(24, 30, 9);
  ExtractionConfig cfg;
  cfg.stripes = 3;
  const auto sgm_rep = extract_sgm(img, nullptr, cfg, "x");
  const auto siltp_rep = extract_siltp(img, nullptr, cfg, "x");
  const auto fused = fuse({sgm_rep, siltp_rep});
  CHECK(fused.values.size() == sgm_rep.values.size() + siltp_rep.values.size());
  CHECK(fused.layout.front().kind == FeatureKind::kSgm);
  CHECK(fused.layout.back().kind == FeatureKind::kSiltp);
  CHECK(fuse({sgm_rep}).values == sgm_rep.values);
  REQUIRE_ERROR(fuse({sgm_rep, extract_siltp(img, nullptr, cfg, "y")}), ErrorCode::kSourceMismatch);
  REQUIRE_ERROR(fuse({}), ErrorCode::kInvalidArgument);
}

TEST_CASE("geometry and configuration errors") {
  ExtractionConfig cfg;
  REQUIRE_ERROR(extract(random_image(2, 128, 1), nullptr, cfg), ErrorCode::kStackTooSmall);
  REQUIRE_ERROR(extract(random_image(48, 29, 1), nullptr, cfg), ErrorCode::kStackTooSmall);
  const auto small = full_mask(48, 127);
  REQUIRE_ERROR(extract(random_image(48, 128, 1), &small, cfg), ErrorCode::kDimensionMismatch);
  cfg.k = 0;
  REQUIRE_ERROR(extract(random_image(48, 128, 1), nullptr, cfg), ErrorCode::kInvalidArgument);
  cfg.k = 5;
  cfg.covariance = CovarianceMode::kGlobal;
  REQUIRE_ERROR(extract(random_image(48, 128, 1), nullptr, cfg), ErrorCode::kInvalidArgument);
}

TEST_CASE("global models pool pixels across images") {
  const auto a = random_image(12, 30, 10);
  const auto b = random_image(12, 30, 11);
  ExtractionConfig cfg;
  cfg.stripes = 3;
  const auto models = fit_global_models({&a, &b}, {nullptr, nullptr}, cfg);
  auto pa = imaging::convert(a, ColorSpace::kHsv, nullptr, true).points;
  const auto pb = imaging::convert(b, ColorSpace::kHsv, nullptr, true).points;
  pa.insert(pa.end(), pb.begin(), pb.end());
  const auto want = sgm::discrepancy_covariance(pa, cfg.palette.in_space(ColorSpace::kHsv));
  CHECK((models[3].sigma - want).cwiseAbs().maxCoeff() <= 1e-12);

  cfg.covariance = CovarianceMode::kGlobal;
  cfg.global_models = models;
  CHECK(extract(a, nullptr, cfg).values.size() == 4u * 3 * 16);
}
