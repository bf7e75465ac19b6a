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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "neutrex/error.hpp"
#include "neutrex/model.hpp"
#include "neutrex/synth.hpp"
#include "support/oracles.hpp"
#include "support/reference_decoder.hpp"

using namespace neutrex;

namespace {

ParamCode zero_code(const ModelAssets& a) {
  ParamCode c;
  c.beta.assign(a.n_beta(), 0.0);
  c.psi.assign(a.n_psi(), 0.0);
  return c;
}

const synth::HeadModel& head() {
  static const synth::HeadModel h = synth::make_head_model({10, 12, 3});
  return h;
}

// Four vertices; joints sit on vertices by one-hot regressor rows, the first
// two vertices follow the root and the last two the jaw.
AssetArrays jaw_toy() {
  AssetArrays a;
  a.template_vertices = {{0, 1, 0}, {0, 0, 0}, {0, 0, 1}, {1, 0, 1}};
  a.faces = {{0, 1, 2}, {1, 2, 3}};
  a.n_beta = 1;
  a.n_psi = 1;
  a.shape_basis.assign(4 * 3, 0.0);
  a.expression_basis.assign(4 * 3, 0.0);
  a.pose_basis.assign(4 * 3 * kPoseFeatureCount, 0.0);
  a.joint_regressor.assign(kJointCount * 4, 0.0);
  const std::size_t joint_vertex[kJointCount] = {0, 0, 1, 0, 0};
  for (std::size_t j = 0; j < kJointCount; ++j) a.joint_regressor[j * 4 + joint_vertex[j]] = 1.0;
  a.skin_weights.assign(4 * kJointCount, 0.0);
  a.skin_weights[0 * kJointCount + kRoot] = 1.0;
  a.skin_weights[1 * kJointCount + kRoot] = 1.0;
  a.skin_weights[2 * kJointCount + kJaw] = 1.0;
  a.skin_weights[3 * kJointCount + kJaw] = 1.0;
  return a;
}

}  // namespace

TEST_CASE("zero code decodes to the template") {
  const auto& assets = head().assets;
  const auto mesh = decode(assets, zero_code(assets));
  CHECK(testing::max_abs_diff(mesh.vertices, assets.template_vertices()) <= 1e-12);
  CHECK(mesh.faces == assets.faces());
}

TEST_CASE("unit psi extracts one expression basis column") {
  const auto& assets = head().assets;
  const std::size_t nv = assets.vertex_count();
  const std::size_t n = assets.n_psi();
  for (std::size_t k : {std::size_t{0}, std::size_t{4}, n - 1}) {
    std::vector<double> psi(n, 0.0);
    psi[k] = 1.0;
    const auto out = blend_shapes(assets, std::vector<double>(assets.n_beta(), 0.0), psi);
    double worst = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double want = assets.template_vertices()[v][c] + assets.expression_basis()[(v * 3 + c) * n + k];
        worst = std::max(worst, std::abs(out[v][c] - want));
      }
    }
    CHECK(worst == 0.0);
  }
}

TEST_CASE("blend_shapes matches a triple loop") {
  synth::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelAssets assets(synth::random_toy_arrays(rng, 3, 5));
    const auto c = testing::random_code(rng, 3, 5);
    const auto out = blend_shapes(assets, c.beta, c.psi);
    for (std::size_t v = 0; v < 4; ++v) {
      for (std::size_t d = 0; d < 3; ++d) {
        double want = assets.template_vertices()[v][d];
        for (std::size_t k = 0; k < 3; ++k) want += assets.shape_basis()[v * 9 + d * 3 + k] * c.beta[k];
        for (std::size_t k = 0; k < 5; ++k) want += assets.expression_basis()[v * 15 + d * 5 + k] * c.psi[k];
        CHECK(std::abs(out[v][d] - want) <= 1e-10);
      }
    }
  }
}

TEST_CASE("blend_shapes is affine in the codes") {
  const auto& assets = head().assets;
  std::mt19937_64 rng(4);
  const auto a = testing::random_code(rng, assets.n_beta(), assets.n_psi());
  const auto b = testing::random_code(rng, assets.n_beta(), assets.n_psi());
  std::vector<double> beta(a.beta.size()), psi(a.psi.size());
  for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = a.beta[i] + b.beta[i];
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = a.psi[i] + b.psi[i];
  const auto sum = blend_shapes(assets, beta, psi);
  const auto va = blend_shapes(assets, a.beta, a.psi);
  const auto vb = blend_shapes(assets, b.beta, b.psi);
  std::vector<Vec3> rhs(sum.size());
  for (std::size_t v = 0; v < sum.size(); ++v) rhs[v] = va[v] + vb[v] - assets.template_vertices()[v];
  CHECK(testing::max_abs_diff(sum, rhs) <= 1e-10);
}

TEST_CASE("blend_shapes rejects wrong code sizes") {
  const auto& assets = head().assets;
  CHECK_THROWS_AS(blend_shapes(assets, std::vector<double>(3, 0.0), std::vector<double>(assets.n_psi(), 0.0)),
                  ValidationError);
}

TEST_CASE("one-hot regressor selects vertices") {
  const ModelAssets assets(jaw_toy());
  const std::vector<Vec3> mesh{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {1, 1, 1}};
  const auto j = regress_joints(assets, mesh);
  CHECK(j[kRoot] == Vec3{1, 2, 3});
  CHECK(j[kJaw] == Vec3{4, 5, 6});
  CHECK(j[kRightEye] == Vec3{1, 2, 3});
}

TEST_CASE("zero mesh gives zero joints") {
  const auto& assets = head().assets;
  const std::vector<Vec3> zeros(assets.vertex_count(), Vec3{0, 0, 0});
  for (const auto& p : regress_joints(assets, zeros)) CHECK(p == Vec3{0, 0, 0});
}

TEST_CASE("head joints lie inside the template bounding box") {
  const auto& assets = head().assets;
  Vec3 lo = assets.template_vertices()[0], hi = lo;
  for (const auto& p : assets.template_vertices()) {
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  for (const auto& j : regress_joints(assets, assets.template_vertices())) {
    for (int c = 0; c < 3; ++c) {
      CHECK(j[c] >= lo[c]);
      CHECK(j[c] <= hi[c]);
    }
  }
}

TEST_CASE("pose correctives vanish at zero pose") {
  const auto& assets = head().assets;
  for (const auto& d : pose_correctives(assets, PoseCode{})) CHECK(d == Vec3{0, 0, 0});
}

TEST_CASE("global rotation alone adds no correctives") {
  const auto& assets = head().assets;
  for (const auto& d : pose_correctives(assets, PoseCode{0.3, -0.2, 0.5, 0, 0, 0})) CHECK(d == Vec3{0, 0, 0});
}

TEST_CASE("jaw-only correctives use only the jaw features") {
  synth::Rng rng(8);
  auto arrays = synth::random_toy_arrays(rng);
  const ModelAssets full(arrays);
  for (std::size_t v = 0; v < 4; ++v) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < kPoseFeatureCount; ++p) {
        if (p < 9 || p >= 18) arrays.pose_basis[(v * 3 + c) * kPoseFeatureCount + p] = 0.0;
      }
    }
  }
  const ModelAssets jaw_only(arrays);
  const PoseCode pose{0.0, 0.0, 0.0, 0.4, -0.1, 0.05};
  CHECK(testing::max_abs_diff(pose_correctives(full, pose), pose_correctives(jaw_only, pose)) == 0.0);
}

TEST_CASE("pose correctives match a loop with quaternion rotations") {
  synth::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelAssets assets(synth::random_toy_arrays(rng));
    std::normal_distribution<double> g(0.0, 0.7);
    PoseCode pose;
    for (auto& p : pose) p = g(rng);
    const auto r = testing::quaternion_rotation(pose[3], pose[4], pose[5]);
    const auto out = pose_correctives(assets, pose);
    for (std::size_t v = 0; v < 4; ++v) {
      for (std::size_t c = 0; c < 3; ++c) {
        double want = 0.0;
        for (int i = 0; i < 3; ++i) {
          for (int k = 0; k < 3; ++k) {
            want += assets.pose_basis()[(v * 3 + c) * kPoseFeatureCount + 9 + i * 3 + k] *
                    (r[i][k] - (i == k ? 1.0 : 0.0));
          }
        }
        CHECK(std::abs(out[v][c] - want) <= 1e-10);
      }
    }
  }
}

TEST_CASE("lbs at zero pose returns the rest vertices exactly") {
  const auto& assets = head().assets;
  std::mt19937_64 rng(2);
  const auto c = testing::random_code(rng, assets.n_beta(), assets.n_psi());
  const auto rest = blend_shapes(assets, c.beta, c.psi);
  const auto out = lbs(assets, rest, regress_joints(assets, rest), PoseCode{});
  CHECK(out == rest);
}

TEST_CASE("global rotation alone rotates every vertex about the root") {
  const auto& assets = head().assets;
  std::mt19937_64 rng(6);
  auto c = testing::random_code(rng, assets.n_beta(), assets.n_psi(), 1.0, 0.2);
  c.set_global_rotation({0.0, 0.0, 0.0});
  const auto base = decode(assets, c);
  const Vec3 r{0.4, -0.9, 0.3};
  c.set_global_rotation(r);
  const auto rotated = decode(assets, c);
  const auto rest = blend_shapes(assets, c.beta, c.psi);
  const Vec3 root = regress_joints(assets, rest)[kRoot];
  const auto q = testing::quaternion_rotation(r[0], r[1], r[2]);
  double worst = 0.0;
  for (std::size_t v = 0; v < base.vertices.size(); ++v) {
    const Vec3 x = base.vertices[v] - root;
    for (int i = 0; i < 3; ++i) {
      const double want = root[i] + q[i][0] * x[0] + q[i][1] * x[1] + q[i][2] * x[2];
      worst = std::max(worst, std::abs(rotated.vertices[v][i] - want));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("jaw rotation on a one-hot toy asset") {
  const ModelAssets assets(jaw_toy());
  ParamCode c = zero_code(assets);
  c.set_jaw_rotation({std::numbers::pi / 2, 0.0, 0.0});
  const auto out = decode(assets, c).vertices;
  // jaw pivots at vertex 1 = origin; a quarter turn about x maps (x, y, z) to (x, -z, y)
  const std::vector<Vec3> want{{0, 1, 0}, {0, 0, 0}, {0, -1, 0}, {1, -1, 0}};
  CHECK(testing::max_abs_diff(out, want) <= 1e-15);
}

TEST_CASE("jaw plus global rotation on the toy asset") {
  const ModelAssets assets(jaw_toy());
  ParamCode c = zero_code(assets);
  c.set_jaw_rotation({std::numbers::pi / 2, 0.0, 0.0});
  c.set_global_rotation({0.0, 0.0, std::numbers::pi});
  const auto out = decode(assets, c).vertices;
  // the half turn about z acts about the root at (0, 1, 0): (x, y, z) -> (-x, 2 - y, z)
  const std::vector<Vec3> want{{0, 1, 0}, {0, 2, 0}, {0, 3, 0}, {-1, 3, 0}};
  CHECK(testing::max_abs_diff(out, want) <= 1e-14);
}

TEST_CASE("decode agrees with the reference decoder on random toy assets") {
  synth::Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto arrays = synth::random_toy_arrays(rng, 2, 3);
    const ModelAssets assets(arrays);
    const auto c = testing::random_code(rng, 2, 3, 0.5, 0.8);
    const auto got = decode(assets, c).vertices;
    const auto want = testing::reference_decode(arrays, c);
    for (std::size_t v = 0; v < 4; ++v) {
      for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(got[v][d] - want[v][d]));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("decode is deterministic") {
  const auto& assets = head().assets;
  std::mt19937_64 rng(13);
  const auto c = testing::random_code(rng, assets.n_beta(), assets.n_psi());
  CHECK(decode(assets, c).vertices == decode(assets, c).vertices);
}

TEST_CASE("codes are validated before decoding") {
  const auto& assets = head().assets;
  ParamCode c = zero_code(assets);
  c.psi.pop_back();
  CHECK_THROWS_AS(decode(assets, c), ValidationError);
  c = zero_code(assets);
  c.pose[4] = std::nan("");
  CHECK_THROWS_AS(decode(assets, c), ValidationError);
}

TEST_CASE("skin rows are renormalized on load") {
  synth::Rng rng(1);
  auto arrays = synth::random_toy_arrays(rng);
  arrays.skin_weights[0] += 5e-6;
  const ModelAssets assets(arrays);
  double sum = 0.0;
  for (std::size_t k = 0; k < kJointCount; ++k) sum += assets.skin_weights()[k];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}
