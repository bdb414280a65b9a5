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

#include "core/ccl.hpp"

#include <algorithm>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "core/error.hpp"

namespace reid::ccl {
namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::kNotPositiveDefinite, std::string("projected ") + what + " is not positive definite");
  return symmetrize(llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols())));
}

void check_dim(const CclModel& model, Eigen::Index n, const char* what) {
  if (n != model.rank())
    fail(ErrorCode::kDimensionMismatch, std::string(what) + " has dimension " + std::to_string(n) +
                                            ", model rank is " + std::to_string(model.rank()));
}

}  // namespace

void CclModel::prepare_scoring() {
  common_form = symmetrize(proj_sigma_inv - proj_sigma_m_inv);
  difference_form = symmetrize(proj_sigma_e_inv - proj_sigma_inv);
}

CoupledStats accumulate_stats(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    fail(ErrorCode::kDimensionMismatch, "camera A and B sample matrices differ in shape");
  if (x.rows() < 2)
    fail(ErrorCode::kTooFewPairs, "need at least 2 matched pairs, got " + std::to_string(x.rows()));
  if (!(ridge >= 0.0)) fail(ErrorCode::kInvalidArgument, "ridge must be non-negative");

  CoupledStats stats;
  stats.dim = static_cast<int>(x.cols());
  stats.pair_count = static_cast<std::size_t>(x.rows());
  stats.ridge = ridge;
  stats.mean_x = x.colwise().mean().transpose();
  stats.mean_y = y.colwise().mean().transpose();

  const Eigen::MatrixXd xc = x.rowwise() - stats.mean_x.transpose();
  const Eigen::MatrixXd yc = y.rowwise() - stats.mean_y.transpose();
  const Eigen::MatrixXd m = xc + yc;
  const Eigen::MatrixXd e = xc - yc;
  const double n = static_cast<double>(x.rows());
  stats.sigma_m = symmetrize(m.transpose() * m / n);
  stats.sigma_e = symmetrize(e.transpose() * e / n);

  // Ridge scaled by each matrix's mean diagonal. A vanishing matrix (e.g.
  // identical views) borrows the scale of the pooled pair.
  const double d = static_cast<double>(stats.dim);
  const double pooled = (stats.sigma_m.trace() + stats.sigma_e.trace()) / (2.0 * d);
  auto scale_of = [&](const Eigen::MatrixXd& s) {
    const double own = s.trace() / d;
    if (own > 0.0) return own;
    return pooled > 0.0 ? pooled : 1.0;
  };
  const double sm = scale_of(stats.sigma_m);
  const double se = scale_of(stats.sigma_e);
  stats.sigma_m.diagonal().array() += ridge * sm;
  stats.sigma_e.diagonal().array() += ridge * se;
  return stats;
}

CoupledStats accumulate_stats(std::span<const PairedSample> pairs, double ridge) {
  if (pairs.size() < 2)
    fail(ErrorCode::kTooFewPairs, "need at least 2 matched pairs, got " + std::to_string(pairs.size()));
  const Eigen::Index d = pairs.front().x.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.size()), d);
  Eigen::MatrixXd y(x.rows(), d);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].x.size() != d || pairs[i].y.size() != d)
      fail(ErrorCode::kDimensionMismatch, "pair " + std::to_string(i) + " (" + pairs[i].person_id +
                                              ") has a different dimension");
    x.row(static_cast<Eigen::Index>(i)) = pairs[i].x.transpose();
    y.row(static_cast<Eigen::Index>(i)) = pairs[i].y.transpose();
  }
  return accumulate_stats(x, y, ridge);
}

CclModel solve_subspace(const CoupledStats& stats, int r) {
  const int d = stats.dim;
  if (r < 1 || r > d)
    fail(ErrorCode::kRankTooLarge, "subspace rank " + std::to_string(r) + " outside [1," +
                                       std::to_string(d) + "]");

  Eigen::LLT<Eigen::MatrixXd> llt(stats.sigma_e);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::kNotPositiveDefinite, "difference covariance is not positive definite");
  const auto lower = llt.matrixL();

  // Whitened commonness covariance: L^-1 Sigma_m L^-T.
  Eigen::MatrixXd whitened = lower.solve(stats.sigma_m);
  whitened = lower.solve(whitened.transpose().eval());
  whitened = symmetrize(whitened);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(whitened);
  if (eig.info() != Eigen::Success)
    fail(ErrorCode::kNumericFailure, "symmetric eigensolver did not converge");

  CclModel model;
  model.mean_x = stats.mean_x;
  model.mean_y = stats.mean_y;
  model.eigenvalues.resize(r);
  Eigen::MatrixXd v(d, r);
  for (int i = 0; i < r; ++i) {
    model.eigenvalues[i] = eig.eigenvalues()[d - 1 - i];
    v.col(i) = eig.eigenvectors().col(d - 1 - i);
  }
  // Back-transform w = L^-T v.
  model.w = lower.transpose().solve(v);
  for (int i = 0; i < r; ++i) {
    auto col = model.w.col(i);
    col.normalize();
    Eigen::Index arg;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0.0) col = -col;
  }

  const Eigen::MatrixXd pm = symmetrize(model.w.transpose() * stats.sigma_m * model.w);
  const Eigen::MatrixXd pe = symmetrize(model.w.transpose() * stats.sigma_e * model.w);
  model.proj_sigma_m_inv = spd_inverse(pm, "commonness covariance");
  model.proj_sigma_e_inv = spd_inverse(pe, "difference covariance");
  model.proj_sigma_inv = spd_inverse(0.5 * (pm + pe), "pooled covariance");
  model.prepare_scoring();
  return model;
}

Eigen::VectorXd project(const CclModel& model, const Eigen::Ref<const Eigen::VectorXd>& rep,
                        CameraView view) {
  if (rep.size() != model.dim())
    fail(ErrorCode::kDimensionMismatch, "representation has dimension " + std::to_string(rep.size()) +
                                            ", model expects " + std::to_string(model.dim()));
  const Eigen::VectorXd& mean = view == CameraView::kA ? model.mean_x : model.mean_y;
  return model.w.transpose() * (rep - mean);
}

double score(const CclModel& model, const Eigen::Ref<const Eigen::VectorXd>& px,
             const Eigen::Ref<const Eigen::VectorXd>& py) {
  check_dim(model, px.size(), "probe");
  check_dim(model, py.size(), "gallery entry");
  const Eigen::VectorXd m = px + py;
  const Eigen::VectorXd e = px - py;
  return m.dot(model.common_form * m) - e.dot(model.difference_form * e);
}

Eigen::MatrixXd score_matrix(const CclModel& model, const std::vector<Eigen::VectorXd>& gallery,
                             const std::vector<Eigen::VectorXd>& probes, int threads) {
  for (const auto& g : gallery) check_dim(model, g.size(), "gallery entry");
  for (const auto& p : probes) check_dim(model, p.size(), "probe");
  const auto rows = static_cast<Eigen::Index>(probes.size());
  const auto cols = static_cast<Eigen::Index>(gallery.size());
  Eigen::MatrixXd out(rows, cols);
  auto fill_rows = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index i = begin; i < end; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = score(model, probes[i], gallery[j]);
  };
  const int workers = std::clamp<int>(threads, 1, static_cast<int>(std::max<Eigen::Index>(rows, 1)));
  if (workers == 1) {
    fill_rows(0, rows);
    return out;
  }
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (rows + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const Eigen::Index begin = t * chunk;
    const Eigen::Index end = std::min(rows, begin + chunk);
    if (begin < end) pool.emplace_back(fill_rows, begin, end);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace reid::ccl
