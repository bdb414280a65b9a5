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
#include <span>

#include <Eigen/Core>

#include "core/imaging.hpp"
#include "core/palette.hpp"

namespace reid::sgm {

inline constexpr double kDefaultEpsilon0 = 1e-4;
/// Eigenvalues of magnitude below this are treated as exactly zero before
/// rectification.
inline constexpr double kEigenvalueZero = 1e-12;

using PalettePoints = Eigen::Matrix<double, 3, kNumColorNames>;
using Likelihoods = std::array<double, kNumColorNames>;

/// Gaussian model of pixel/color-name discrepancies for one pixel set.
/// Immutable once built.
struct GaussianMapModel {
  imaging::ColorSpace space = imaging::ColorSpace::kRgb;
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Identity();
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Ones();  // of sigma, descending
  Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Identity();
  Eigen::Vector3d rectified_eigenvalues = Eigen::Vector3d::Ones();
  Eigen::Matrix3d rectified_inverse = Eigen::Matrix3d::Identity();
  double norm_const = 0.0;  // (2 pi)^(-3/2) |rectified sigma|^(-1/2)
  double epsilon0 = kDefaultEpsilon0;
};

/// Per-pixel soft color-name weights.
struct PixelDescriptor {
  std::array<double, kNumColorNames> weights{};
};

/// Running first and second moments of a 3-D point stream (Welford), with
/// an order-insensitive merge so partial sums can be combined.
class MomentAccumulator {
 public:
  void add(const Eigen::Vector3d& z);
  void merge(const MomentAccumulator& other);

  std::size_t count() const { return count_; }
  const Eigen::Vector3d& mean() const { return mean_; }
  /// Population covariance (divides by count).
  Eigen::Matrix3d covariance() const;

 private:
  std::size_t count_ = 0;
  Eigen::Vector3d mean_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d scatter_ = Eigen::Matrix3d::Zero();
};

/// Average outer product of all n*16 pixel/name discrepancies, accumulated
/// as cov(z) + cov(c) + (mean z - mean c)(mean z - mean c)^T in one pass.
Eigen::Matrix3d discrepancy_covariance(std::span<const Eigen::Vector3d> pixels,
                                       const PalettePoints& names);
Eigen::Matrix3d discrepancy_covariance(const MomentAccumulator& pixels,
                                       const PalettePoints& names);

/// Eigendecomposition, rectification of non-positive eigenvalues to
/// 1/epsilon0, and the rectified inverse.
GaussianMapModel model_from_covariance(const Eigen::Matrix3d& sigma, double epsilon0,
                                       imaging::ColorSpace space = imaging::ColorSpace::kRgb);

GaussianMapModel fit_model(const imaging::PixelSet& pixels, const ColorNamePalette& palette,
                           double epsilon0 = kDefaultEpsilon0);
GaussianMapModel fit_model(std::span<const Eigen::Vector3d> pixels, const PalettePoints& names,
                           double epsilon0, imaging::ColorSpace space);

/// Sigma = I: plain Euclidean soft assignment.
GaussianMapModel identity_model(imaging::ColorSpace space = imaging::ColorSpace::kRgb);

/// norm_const * exp(-0.5 * Mahalanobis^2) for every color name.
Likelihoods pixel_likelihoods(const GaussianMapModel& model, const Eigen::Vector3d& z,
                              const PalettePoints& names);
Likelihoods pixel_likelihoods(const GaussianMapModel& model, const Eigen::Vector3d& z,
                              const ColorNamePalette& palette);

/// Squared Mahalanobis distances under the rectified inverse.
Likelihoods mahalanobis_sq(const GaussianMapModel& model, const Eigen::Vector3d& z,
                           const PalettePoints& names);

/// Keeps the k most likely names (ties to the lower index) and
/// sum-normalizes them.
PixelDescriptor soft_map(const GaussianMapModel& model, const Eigen::Vector3d& z,
                         const PalettePoints& names, int k);
PixelDescriptor soft_map(const GaussianMapModel& model, const Eigen::Vector3d& z,
                         const ColorNamePalette& palette, int k);

/// Upper-triangular L with L^T L = rectified inverse, so that Mahalanobis
/// distance becomes Euclidean distance after z -> L z.
Eigen::Matrix3d transform_space(const GaussianMapModel& model);

}  // namespace reid::sgm
