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

#include <Eigen/Core>

namespace reid::linalg {

struct SymmetricEigen3 {
  Eigen::Vector3d values;   // descending
  Eigen::Matrix3d vectors;  // column i pairs with values[i]; orthonormal
};

/// Eigendecomposition of a symmetric 3x3 matrix. Eigenvalues come from the
/// trigonometric closed form; eigenvectors from row cross products. A few
/// Jacobi sweeps on V^T A V then polish both, which also rescues the
/// repeated-eigenvalue cases where the cross products degenerate.
SymmetricEigen3 eigen_symmetric3(const Eigen::Matrix3d& a);

}  // namespace reid::linalg
