// Copyright 2026 The neutrex-quality Authors.
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

// Test-only reference decoder. Written independently of src/model.cpp:
// quaternion-based rotations, 4x4 homogeneous transforms, textbook
// sum_k w_k * A_k * [x; 1] skinning, plain index loops.

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "neutrex/model.hpp"

namespace neutrex::testing {

using M4 = std::array<std::array<double, 4>, 4>;
using M3 = std::array<std::array<double, 3>, 3>;

/// Axis-angle to rotation via the unit quaternion (cos(t/2), sin(t/2) * axis).
inline M3 quaternion_rotation(double rx, double ry, double rz) {
  const double angle = std::sqrt(rx * rx + ry * ry + rz * rz);
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
  if (angle > 0.0) {
    const double s = std::sin(angle / 2.0) / angle;
    w = std::cos(angle / 2.0);
    x = rx * s;
    y = ry * s;
    z = rz * s;
  }
  M3 r;
  r[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)};
  r[1] = {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)};
  r[2] = {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
  return r;
}

inline M4 homogeneous(const M3& r, double tx, double ty, double tz) {
  M4 m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = r[i][j];
  }
  m[0][3] = tx;
  m[1][3] = ty;
  m[2][3] = tz;
  m[3][3] = 1.0;
  return m;
}

inline M4 matmul4(const M4& a, const M4& b) {
  M4 out{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

/// Decodes `code` with the raw arrays. Skin weights are used as given.
inline std::vector<std::array<double, 3>> reference_decode(const AssetArrays& a,
                                                           const ParamCode& code) {
  const std::size_t nv = a.template_vertices.size();
  const std::size_t nb = a.n_beta;
  const std::size_t ne = a.n_psi;
  const std::size_t np = 36;
  const std::size_t nj = 5;

  std::vector<std::array<double, 3>> rest(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t c = 0; c < 3; ++c) {
      double x = a.template_vertices[v][c];
      for (std::size_t k = 0; k < nb; ++k) x += a.shape_basis[(v * 3 + c) * nb + k] * code.beta[k];
      for (std::size_t k = 0; k < ne; ++k) x += a.expression_basis[(v * 3 + c) * ne + k] * code.psi[k];
      rest[v][c] = x;
    }
  }

  std::vector<std::array<double, 3>> joints(nj, {0.0, 0.0, 0.0});
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t c = 0; c < 3; ++c) joints[j][c] += a.joint_regressor[j * nv + v] * rest[v][c];
    }
  }

  // full 15-dof pose: root, neck, jaw, eyes
  std::array<std::array<double, 3>, 5> axis_angles{};
  axis_angles[0] = {code.pose[0], code.pose[1], code.pose[2]};
  axis_angles[2] = {code.pose[3], code.pose[4], code.pose[5]};
  std::vector<M3> rots(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    rots[j] = quaternion_rotation(axis_angles[j][0], axis_angles[j][1], axis_angles[j][2]);
  }

  std::vector<double> features(np, 0.0);
  for (std::size_t j = 1; j < nj; ++j) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) features[(j - 1) * 9 + r * 3 + c] = rots[j][r][c] - (r == c ? 1.0 : 0.0);
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < np; ++p) rest[v][c] += a.pose_basis[(v * 3 + c) * np + p] * features[p];
    }
  }

  std::vector<M4> world(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    const int parent = a.parents[j];
    if (parent < 0) {
      world[j] = homogeneous(rots[j], joints[j][0], joints[j][1], joints[j][2]);
    } else {
      const auto& jp = joints[static_cast<std::size_t>(parent)];
      world[j] = matmul4(world[static_cast<std::size_t>(parent)],
                         homogeneous(rots[j], joints[j][0] - jp[0], joints[j][1] - jp[1],
                                     joints[j][2] - jp[2]));
    }
  }
  std::vector<M4> skinning(nj);
  const M3 eye = quaternion_rotation(0, 0, 0);
  for (std::size_t j = 0; j < nj; ++j) {
    skinning[j] = matmul4(world[j], homogeneous(eye, -joints[j][0], -joints[j][1], -joints[j][2]));
  }

  std::vector<std::array<double, 3>> out(nv, {0.0, 0.0, 0.0});
  for (std::size_t v = 0; v < nv; ++v) {
    const double x[4] = {rest[v][0], rest[v][1], rest[v][2], 1.0};
    for (std::size_t k = 0; k < nj; ++k) {
      const double w = a.skin_weights[v * nj + k];
      for (int r = 0; r < 3; ++r) {
        double t = 0.0;
        for (int c = 0; c < 4; ++c) t += skinning[k][r][c] * x[c];
        out[v][r] += w * t;
      }
    }
  }
  return out;
}

}  // namespace neutrex::testing
