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

#include "neutrex/geometry.hpp"

namespace neutrex {

Mat3 rodrigues(const Vec3& r) {
  const double theta_sq = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  const double theta = std::sqrt(theta_sq);

  // R = I + a K + b K^2 with K the cross-product matrix of r (not of the unit
  // axis), a = sin(theta)/theta and b = (1 - cos(theta))/theta^2.
  double a = 0.0;
  double b = 0.0;
  if (theta < 1e-6) {
    // Taylor expansion; truncation error is below 1e-30 here.
    a = 1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0;
    b = 0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0;
  } else {
    a = std::sin(theta) / theta;
    const double half = std::sin(0.5 * theta) / theta;
    b = 2.0 * half * half;
  }

  const double x = r[0];
  const double y = r[1];
  const double z = r[2];
  // K^2 = r r^T - |r|^2 I
  Mat3 out{};
  out[0][0] = 1.0 + b * (x * x - theta_sq);
  out[1][1] = 1.0 + b * (y * y - theta_sq);
  out[2][2] = 1.0 + b * (z * z - theta_sq);
  out[0][1] = -a * z + b * x * y;
  out[1][0] = a * z + b * x * y;
  out[0][2] = a * y + b * x * z;
  out[2][0] = -a * y + b * x * z;
  out[1][2] = -a * x + b * y * z;
  out[2][1] = a * x + b * y * z;
  return out;
}

}  // namespace neutrex
