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

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace reid::ccl {

inline constexpr double kDefaultRidge = 1e-3;
inline constexpr int kDefaultRank = 100;

/// One matched cross-camera pair of the same person.
struct PairedSample {
  Eigen::VectorXd x;  // camera A
  Eigen::VectorXd y;  // camera B
  std::string person_id;
};

/// Intra-personal covariances of commonness m = x + y and difference
/// e = x - y, after per-view centering.
struct CoupledStats {
  int dim = 0;
  Eigen::VectorXd mean_x;
  Eigen::VectorXd mean_y;
  Eigen::MatrixXd sigma_m;
  Eigen::MatrixXd sigma_e;
  std::size_t pair_count = 0;
  double ridge = kDefaultRidge;
};

enum class CameraView : int { kA = 0, kB = 1 };

struct CclModel {
  Eigen::VectorXd mean_x;
  Eigen::VectorXd mean_y;
  Eigen::MatrixXd w;              // d x r, unit columns, eigenvalues descending
  Eigen::VectorXd eigenvalues;    // r
  Eigen::MatrixXd proj_sigma_m_inv;  // r x r
  Eigen::MatrixXd proj_sigma_e_inv;
  Eigen::MatrixXd proj_sigma_inv;    // inverse of (Sigma_m + Sigma_e) / 2

  int dim() const { return static_cast<int>(w.rows()); }
  int rank() const { return static_cast<int>(w.cols()); }

  /// Recomputes the two quadratic forms used by score(); called by
  /// solve_subspace and by the model loader.
  void prepare_scoring();

  Eigen::MatrixXd common_form;      // Sigma^-1 - Sigma_m^-1
  Eigen::MatrixXd difference_form;  // Sigma_e^-1 - Sigma^-1
};

/// Rows of `x` and `y` are matched pairs (same person, cameras A and B).
CoupledStats accumulate_stats(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              double ridge = kDefaultRidge);
CoupledStats accumulate_stats(std::span<const PairedSample> pairs, double ridge = kDefaultRidge);

/// Top-r generalized eigenvectors of (Sigma_m, Sigma_e) via Cholesky
/// whitening of Sigma_e.
CclModel solve_subspace(const CoupledStats& stats, int r);

Eigen::VectorXd project(const CclModel& model, const Eigen::Ref<const Eigen::VectorXd>& rep,
                        CameraView view);

/// m^T (Sigma^-1 - Sigma_m^-1) m - e^T (Sigma_e^-1 - Sigma^-1) e in the
/// projected space, m = px + py, e = px - py. Higher is more similar.
double score(const CclModel& model, const Eigen::Ref<const Eigen::VectorXd>& px,
             const Eigen::Ref<const Eigen::VectorXd>& py);

/// Rows are probes, columns gallery entries.
Eigen::MatrixXd score_matrix(const CclModel& model, const std::vector<Eigen::VectorXd>& gallery,
                             const std::vector<Eigen::VectorXd>& probes, int threads = 1);

}  // namespace reid::ccl
