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

#include "core/sgm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>

#include "core/eig3.hpp"
#include "core/error.hpp"

namespace reid::sgm {
namespace {

void check_k(int k) {
  if (k < 1 || k > kNumColorNames)
    fail(ErrorCode::kInvalidArgument, "k must lie in [1,16], got " + std::to_string(k));
}

// Pixels are folded into blocks and the blocks merged pairwise, so the
// rounding pattern depends on the block layout only, never on thread timing.
constexpr std::size_t kBlock = 1024;

MomentAccumulator accumulate_pairwise(std::span<const Eigen::Vector3d> pixels) {
  if (pixels.size() <= kBlock) {
    MomentAccumulator acc;
    for (const auto& z : pixels) acc.add(z);
    return acc;
  }
  const std::size_t blocks = (pixels.size() + kBlock - 1) / kBlock;
  const std::size_t split = (blocks / 2) * kBlock;
  MomentAccumulator left = accumulate_pairwise(pixels.first(split));
  left.merge(accumulate_pairwise(pixels.subspan(split)));
  return left;
}

}  // namespace

void MomentAccumulator::add(const Eigen::Vector3d& z) {
  ++count_;
  const Eigen::Vector3d delta = z - mean_;
  mean_ += delta / static_cast<double>(count_);
  scatter_.noalias() += delta * (z - mean_).transpose();
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::Vector3d delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  scatter_ += other.scatter_ + delta * delta.transpose() * (na * nb / n);
  count_ += other.count_;
}

Eigen::Matrix3d MomentAccumulator::covariance() const {
  if (count_ == 0) return Eigen::Matrix3d::Zero();
  const Eigen::Matrix3d c = scatter_ / static_cast<double>(count_);
  return 0.5 * (c + c.transpose());
}

Eigen::Matrix3d discrepancy_covariance(const MomentAccumulator& pixels,
                                       const PalettePoints& names) {
  if (pixels.count() == 0) fail(ErrorCode::kEmptyPixelSet, "cannot fit a model to zero pixels");
  MomentAccumulator palette_moments;
  for (int j = 0; j < kNumColorNames; ++j) palette_moments.add(names.col(j));
  const Eigen::Vector3d gap = pixels.mean() - palette_moments.mean();
  Eigen::Matrix3d sigma =
      pixels.covariance() + palette_moments.covariance() + gap * gap.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::Matrix3d discrepancy_covariance(std::span<const Eigen::Vector3d> pixels,
                                       const PalettePoints& names) {
  if (pixels.empty()) fail(ErrorCode::kEmptyPixelSet, "cannot fit a model to zero pixels");
  return discrepancy_covariance(accumulate_pairwise(pixels), names);
}

GaussianMapModel model_from_covariance(const Eigen::Matrix3d& sigma, double epsilon0,
                                       imaging::ColorSpace space) {
  if (!(epsilon0 > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon0 must be positive");
  if (!sigma.allFinite()) fail(ErrorCode::kNumericFailure, "covariance has non-finite entries");

  GaussianMapModel model;
  model.space = space;
  model.epsilon0 = epsilon0;
  model.sigma = 0.5 * (sigma + sigma.transpose());

  const auto eig = linalg::eigen_symmetric3(model.sigma);
  model.eigenvalues = eig.values;
  model.eigenvectors = eig.vectors;

  Eigen::Vector3d inverse_spectrum;
  for (int i = 0; i < 3; ++i) {
    double lambda = eig.values[i];
    if (std::abs(lambda) < kEigenvalueZero) lambda = 0.0;
    model.rectified_eigenvalues[i] = lambda > 0.0 ? lambda : 1.0 / epsilon0;
    inverse_spectrum[i] = 1.0 / model.rectified_eigenvalues[i];
  }
  const Eigen::Matrix3d& u = eig.vectors;
  const Eigen::Matrix3d inv = u * inverse_spectrum.asDiagonal() * u.transpose();
  model.rectified_inverse = 0.5 * (inv + inv.transpose());

  const double det = model.rectified_eigenvalues.prod();
  model.norm_const = std::pow(2.0 * std::numbers::pi, -1.5) / std::sqrt(det);
  return model;
}

GaussianMapModel fit_model(std::span<const Eigen::Vector3d> pixels, const PalettePoints& names,
                           double epsilon0, imaging::ColorSpace space) {
  if (!(epsilon0 > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon0 must be positive");
  return model_from_covariance(discrepancy_covariance(pixels, names), epsilon0, space);
}

GaussianMapModel fit_model(const imaging::PixelSet& pixels, const ColorNamePalette& palette,
                           double epsilon0) {
  return fit_model(pixels.points, palette.in_space(pixels.space), epsilon0, pixels.space);
}

GaussianMapModel identity_model(imaging::ColorSpace space) {
  GaussianMapModel model;
  model.space = space;
  model.norm_const = std::pow(2.0 * std::numbers::pi, -1.5);
  return model;
}

Likelihoods mahalanobis_sq(const GaussianMapModel& model, const Eigen::Vector3d& z,
                           const PalettePoints& names) {
  const Eigen::Matrix3d& s = model.rectified_inverse;
  const double s00 = s(0, 0), s11 = s(1, 1), s22 = s(2, 2);
  const double s01 = 2.0 * s(0, 1), s02 = 2.0 * s(0, 2), s12 = 2.0 * s(1, 2);
  Likelihoods q;
  for (int j = 0; j < kNumColorNames; ++j) {
    const double d0 = z.x() - names(0, j);
    const double d1 = z.y() - names(1, j);
    const double d2 = z.z() - names(2, j);
    q[j] = s00 * d0 * d0 + s11 * d1 * d1 + s22 * d2 * d2 + s01 * d0 * d1 + s02 * d0 * d2 +
           s12 * d1 * d2;
  }
  return q;
}

Likelihoods pixel_likelihoods(const GaussianMapModel& model, const Eigen::Vector3d& z,
                              const PalettePoints& names) {
  Likelihoods p = mahalanobis_sq(model, z, names);
  for (double& v : p) v = model.norm_const * std::exp(-0.5 * v);
  return p;
}

Likelihoods pixel_likelihoods(const GaussianMapModel& model, const Eigen::Vector3d& z,
                              const ColorNamePalette& palette) {
  return pixel_likelihoods(model, z, palette.in_space(model.space));
}

PixelDescriptor soft_map(const GaussianMapModel& model, const Eigen::Vector3d& z,
                         const PalettePoints& names, int k) {
  check_k(k);
  const Likelihoods q = mahalanobis_sq(model, z, names);
  std::array<int, kNumColorNames> order;
  std::iota(order.begin(), order.end(), 0);
  // Likelihood is strictly decreasing in q, so the k largest likelihoods are
  // the k smallest distances.
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    return q[a] < q[b] || (q[a] == q[b] && a < b);
  });

  // Normalizing relative to the best kept name cancels norm_const and keeps
  // the ratio exact where the raw densities would underflow.
  PixelDescriptor out;
  const double q_min = q[order[0]];
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const int j = order[i];
    const double w = std::exp(-0.5 * (q[j] - q_min));
    out.weights[j] = w;
    sum += w;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    for (int i = 0; i < kNumColorNames; ++i) out.weights[i] = 0.0;
    for (int i = 0; i < k; ++i) out.weights[order[i]] = 1.0 / k;
    return out;
  }
  for (int i = 0; i < k; ++i) out.weights[order[i]] /= sum;
  return out;
}

PixelDescriptor soft_map(const GaussianMapModel& model, const Eigen::Vector3d& z,
                         const ColorNamePalette& palette, int k) {
  return soft_map(model, z, palette.in_space(model.space), k);
}

Eigen::Matrix3d transform_space(const GaussianMapModel& model) {
  Eigen::LLT<Eigen::Matrix3d> llt(model.rectified_inverse);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::kNotPositiveDefinite, "rectified inverse is not positive definite");
  return llt.matrixU();
}

}  // namespace reid::sgm
