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

#include "core/eig3.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace reid::linalg {
namespace {

Eigen::Vector3d closed_form_values(const Eigen::Matrix3d& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  if (p1 == 0.0) return {a(0, 0), a(1, 1), a(2, 2)};
  const double q = a.trace() / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Eigen::Matrix3d b = (a - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

// Null vector of (A - lambda I) from the largest cross product of its rows.
// Returns zero when every cross product vanishes (repeated eigenvalue).
Eigen::Vector3d null_vector(const Eigen::Matrix3d& a, double lambda) {
  const Eigen::Matrix3d m = a - lambda * Eigen::Matrix3d::Identity();
  const std::array<Eigen::Vector3d, 3> candidates = {
      Eigen::Vector3d(m.row(0).cross(m.row(1))), Eigen::Vector3d(m.row(0).cross(m.row(2))),
      Eigen::Vector3d(m.row(1).cross(m.row(2)))};
  const auto best = std::max_element(candidates.begin(), candidates.end(),
                                     [](const auto& x, const auto& y) {
                                       return x.squaredNorm() < y.squaredNorm();
                                     });
  const double n = best->norm();
  return n > 0.0 ? Eigen::Vector3d(*best / n) : Eigen::Vector3d::Zero();
}

Eigen::Matrix3d initial_basis(const Eigen::Matrix3d& a, const Eigen::Vector3d& values) {
  Eigen::Vector3d v0 = null_vector(a, values[0]);
  if (v0.isZero()) return Eigen::Matrix3d::Identity();
  Eigen::Vector3d v2 = null_vector(a, values[2]);
  v2 -= v2.dot(v0) * v0;
  if (v2.norm() < 1e-8) {
    // Pick any direction orthogonal to v0.
    const int axis = std::abs(v0.x()) < 0.9 ? 0 : 1;
    v2 = v0.cross(Eigen::Vector3d::Unit(axis));
  }
  v2.normalize();
  Eigen::Matrix3d v;
  v.col(0) = v0;
  v.col(1) = v2.cross(v0);
  v.col(2) = v2;
  return v;
}

// Cyclic Jacobi sweeps on D = V^T A V, accumulating rotations into V.
void jacobi_polish(const Eigen::Matrix3d& a, Eigen::Matrix3d& v) {
  Eigen::Matrix3d d = v.transpose() * a * v;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < 12; ++sweep) {
    const double off = std::abs(d(0, 1)) + std::abs(d(0, 2)) + std::abs(d(1, 2));
    if (off <= 1e-17 * scale) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (d(p, q) == 0.0) continue;
        const double theta = (d(q, q) - d(p, p)) / (2.0 * d(p, q));
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        d = rot.transpose() * d * rot;
        d(p, q) = d(q, p) = 0.0;
        v = v * rot;
      }
    }
  }
}

}  // namespace

SymmetricEigen3 eigen_symmetric3(const Eigen::Matrix3d& input) {
  const Eigen::Matrix3d a = 0.5 * (input + input.transpose());
  Eigen::Vector3d values = closed_form_values(a);
  std::sort(values.data(), values.data() + 3, std::greater<>());
  Eigen::Matrix3d v = initial_basis(a, values);
  jacobi_polish(a, v);

  // Rayleigh quotients of the polished basis, then order descending.
  const Eigen::Matrix3d d = v.transpose() * a * v;
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d(i, i) > d(j, j); });

  SymmetricEigen3 out;
  for (int i = 0; i < 3; ++i) {
    out.values[i] = d(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]).normalized();
  }
  return out;
}

}  // namespace reid::linalg
