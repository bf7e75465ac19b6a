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

#include "neutrex/model.hpp"

#include <cmath>
#include <string>

#include "neutrex/error.hpp"

namespace neutrex {
namespace {

constexpr double kSkinSumTolerance = 1e-5;

[[noreturn]] void fail(const std::string& array, const std::string& what) {
  throw ValidationError("assets: '" + array + "': " + what);
}

void require_size(const std::string& array, std::size_t actual, std::size_t expected) {
  if (actual != expected) {
    fail(array, "expected " + std::to_string(expected) + " values, got " +
                    std::to_string(actual));
  }
}

void require_finite(const std::string& array, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) fail(array, "non-finite value at flat index " + std::to_string(i));
  }
}

const nac::Array& require_array(const nac::ArrayMap& arrays, const std::string& name,
                                nac::Dtype dtype, std::size_t rank) {
  const auto it = arrays.find(name);
  if (it == arrays.end()) fail(name, "missing array");
  const nac::Array& a = it->second;
  if (a.dtype != dtype) fail(name, dtype == nac::Dtype::f32 ? "expected dtype f32" : "expected dtype u32");
  if (a.shape.size() != rank) fail(name, "expected rank " + std::to_string(rank));
  return a;
}

void require_dim(const std::string& name, const nac::Array& a, std::size_t axis,
                 std::size_t expected) {
  if (a.shape[axis] != expected) {
    fail(name, "shape mismatch on axis " + std::to_string(axis) + ": expected " +
                   std::to_string(expected) + ", got " + std::to_string(a.shape[axis]));
  }
}

std::vector<double> widen(const nac::Array& a) { return {a.f32.begin(), a.f32.end()}; }

std::vector<float> narrow(std::span<const double> v) { return {v.begin(), v.end()}; }

}  // namespace

ModelAssets::ModelAssets(AssetArrays arrays) : arrays_(std::move(arrays)) {
  const std::size_t nv = arrays_.template_vertices.size();
  if (nv == 0) fail("template", "no vertices");
  for (std::size_t v = 0; v < nv; ++v) {
    require_finite("template", arrays_.template_vertices[v]);
  }

  for (std::size_t f = 0; f < arrays_.faces.size(); ++f) {
    for (auto idx : arrays_.faces[f]) {
      if (idx >= nv) {
        fail("faces", "face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                          " >= " + std::to_string(nv));
      }
    }
  }

  require_size("shape_basis", arrays_.shape_basis.size(), nv * 3 * arrays_.n_beta);
  require_size("expression_basis", arrays_.expression_basis.size(), nv * 3 * arrays_.n_psi);
  require_size("pose_basis", arrays_.pose_basis.size(), nv * 3 * kPoseFeatureCount);
  require_size("joint_regressor", arrays_.joint_regressor.size(), kJointCount * nv);
  require_size("skin_weights", arrays_.skin_weights.size(), nv * kJointCount);
  require_finite("shape_basis", arrays_.shape_basis);
  require_finite("expression_basis", arrays_.expression_basis);
  require_finite("pose_basis", arrays_.pose_basis);
  require_finite("joint_regressor", arrays_.joint_regressor);
  require_finite("skin_weights", arrays_.skin_weights);

  if (arrays_.parents[0] != -1) fail("parents", "joint 0 must be the root");
  for (std::size_t j = 1; j < kJointCount; ++j) {
    const int p = arrays_.parents[j];
    if (p < 0 || static_cast<std::size_t>(p) >= j) {
      fail("parents", "parent of joint " + std::to_string(j) + " must precede it");
    }
  }

  for (std::size_t v = 0; v < nv; ++v) {
    double* row = arrays_.skin_weights.data() + v * kJointCount;
    double sum = 0.0;
    for (std::size_t k = 0; k < kJointCount; ++k) {
      if (row[k] < 0.0) fail("skin_weights", "negative weight in row " + std::to_string(v));
      sum += row[k];
    }
    if (std::abs(sum - 1.0) > kSkinSumTolerance) {
      fail("skin_weights", "row " + std::to_string(v) + " sums to " + std::to_string(sum));
    }
    // Rows are renormalized so the blended transform of a rigid pose stays
    // rigid in double precision even though payloads are stored as f32.
    for (std::size_t k = 0; k < kJointCount; ++k) row[k] /= sum;
  }

  for (std::size_t j = 0; j < kJointCount; ++j) {
    for (std::size_t v = 0; v < nv; ++v) {
      const double w = arrays_.joint_regressor[j * nv + v];
      if (w != 0.0) regressor_rows_[j].push_back({v, w});
    }
  }

  faces_ = std::make_shared<const std::vector<Face>>(arrays_.faces);
}

ModelAssets ModelAssets::from_nac(const nac::ArrayMap& arrays) {
  using nac::Dtype;
  const auto& tmpl = require_array(arrays, "template", Dtype::f32, 2);
  const auto& faces = require_array(arrays, "faces", Dtype::u32, 2);
  const auto& shape = require_array(arrays, "shape_basis", Dtype::f32, 3);
  const auto& expr = require_array(arrays, "expression_basis", Dtype::f32, 3);
  const auto& pose = require_array(arrays, "pose_basis", Dtype::f32, 3);
  const auto& regressor = require_array(arrays, "joint_regressor", Dtype::f32, 2);
  const auto& skin = require_array(arrays, "skin_weights", Dtype::f32, 2);
  const auto& parents = require_array(arrays, "parents", Dtype::u32, 1);

  const std::size_t nv = tmpl.shape[0];
  require_dim("template", tmpl, 1, 3);
  require_dim("faces", faces, 1, 3);
  require_dim("shape_basis", shape, 0, nv);
  require_dim("shape_basis", shape, 1, 3);
  require_dim("expression_basis", expr, 0, nv);
  require_dim("expression_basis", expr, 1, 3);
  require_dim("pose_basis", pose, 0, nv);
  require_dim("pose_basis", pose, 1, 3);
  require_dim("pose_basis", pose, 2, kPoseFeatureCount);
  require_dim("joint_regressor", regressor, 0, kJointCount);
  require_dim("joint_regressor", regressor, 1, nv);
  require_dim("skin_weights", skin, 0, nv);
  require_dim("skin_weights", skin, 1, kJointCount);
  require_dim("parents", parents, 0, kJointCount);

  AssetArrays a;
  a.template_vertices.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t c = 0; c < 3; ++c) a.template_vertices[v][c] = tmpl.f32[v * 3 + c];
  }
  a.faces.resize(faces.shape[0]);
  for (std::size_t f = 0; f < a.faces.size(); ++f) {
    for (std::size_t c = 0; c < 3; ++c) a.faces[f][c] = faces.u32[f * 3 + c];
  }
  a.n_beta = shape.shape[2];
  a.n_psi = expr.shape[2];
  a.shape_basis = widen(shape);
  a.expression_basis = widen(expr);
  a.pose_basis = widen(pose);
  a.joint_regressor = widen(regressor);
  a.skin_weights = widen(skin);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const std::uint32_t p = parents.u32[j];
    if (p != kNoParent && p >= kJointCount) {
      fail("parents", "parent index " + std::to_string(p) + " out of range");
    }
    a.parents[j] = p == kNoParent ? -1 : static_cast<int>(p);
  }
  return ModelAssets(std::move(a));
}

ModelAssets ModelAssets::load(const std::filesystem::path& path) {
  return from_nac(nac::read_file(path));
}

nac::ArrayMap ModelAssets::to_nac() const {
  const std::size_t nv = vertex_count();
  const auto& a = arrays_;
  std::vector<float> tmpl(nv * 3);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t c = 0; c < 3; ++c) tmpl[v * 3 + c] = static_cast<float>(a.template_vertices[v][c]);
  }
  std::vector<std::uint32_t> faces(a.faces.size() * 3);
  for (std::size_t f = 0; f < a.faces.size(); ++f) {
    for (std::size_t c = 0; c < 3; ++c) faces[f * 3 + c] = a.faces[f][c];
  }
  std::vector<std::uint32_t> parents(kJointCount);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    parents[j] = a.parents[j] < 0 ? kNoParent : static_cast<std::uint32_t>(a.parents[j]);
  }

  nac::ArrayMap out;
  out["template"] = nac::Array::make_f32({nv, 3}, std::move(tmpl));
  out["faces"] = nac::Array::make_u32({a.faces.size(), 3}, std::move(faces));
  out["shape_basis"] = nac::Array::make_f32({nv, 3, a.n_beta}, narrow(a.shape_basis));
  out["expression_basis"] = nac::Array::make_f32({nv, 3, a.n_psi}, narrow(a.expression_basis));
  out["pose_basis"] = nac::Array::make_f32({nv, 3, kPoseFeatureCount}, narrow(a.pose_basis));
  out["joint_regressor"] = nac::Array::make_f32({kJointCount, nv}, narrow(a.joint_regressor));
  out["skin_weights"] = nac::Array::make_f32({nv, kJointCount}, narrow(a.skin_weights));
  out["parents"] = nac::Array::make_u32({kJointCount}, std::move(parents));
  return out;
}

void ModelAssets::save(const std::filesystem::path& path) const { nac::write_file(path, to_nac()); }

void validate_code(const ModelAssets& assets, const ParamCode& code) {
  const std::string who = "code '" + code.sample_id + "': ";
  if (code.beta.size() != assets.n_beta()) {
    throw ValidationError(who + "beta has " + std::to_string(code.beta.size()) +
                          " entries, assets expect " + std::to_string(assets.n_beta()));
  }
  if (code.psi.size() != assets.n_psi()) {
    throw ValidationError(who + "psi has " + std::to_string(code.psi.size()) +
                          " entries, assets expect " + std::to_string(assets.n_psi()));
  }
  auto finite = [](std::span<const double> values) {
    for (double x : values) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  if (!finite(code.beta) || !finite(code.psi) || !finite(code.pose)) {
    throw ValidationError(who + "non-finite entry");
  }
}

std::vector<Vec3> blend_shapes(const ModelAssets& assets, std::span<const double> beta,
                               std::span<const double> psi) {
  if (beta.size() != assets.n_beta() || psi.size() != assets.n_psi()) {
    throw ValidationError("blend_shapes: code dimensions do not match assets");
  }
  std::vector<Vec3> out = assets.template_vertices();
  const std::size_t nv = out.size();

  auto accumulate = [&](std::span<const double> basis, std::span<const double> coeffs) {
    const std::size_t n = coeffs.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double w = coeffs[k];
      if (w == 0.0) continue;
      for (std::size_t v = 0; v < nv; ++v) {
        const double* col = basis.data() + v * 3 * n + k;
        out[v][0] += w * col[0];
        out[v][1] += w * col[n];
        out[v][2] += w * col[2 * n];
      }
    }
  };
  accumulate(assets.shape_basis(), beta);
  accumulate(assets.expression_basis(), psi);
  return out;
}

JointPositions regress_joints(const ModelAssets& assets, std::span<const Vec3> rest_vertices) {
  if (rest_vertices.size() != assets.vertex_count()) {
    throw ValidationError("regress_joints: vertex count mismatch");
  }
  JointPositions joints{};
  for (std::size_t j = 0; j < kJointCount; ++j) {
    Vec3 acc{0.0, 0.0, 0.0};
    for (const auto& e : assets.regressor_row(j)) {
      const Vec3& p = rest_vertices[e.vertex];
      acc[0] += e.weight * p[0];
      acc[1] += e.weight * p[1];
      acc[2] += e.weight * p[2];
    }
    joints[j] = acc;
  }
  return joints;
}

std::array<Mat3, kJointCount> joint_rotations(const PoseCode& pose) {
  std::array<Mat3, kJointCount> rot;
  rot.fill(identity3());
  rot[kRoot] = rodrigues({pose[0], pose[1], pose[2]});
  rot[kJaw] = rodrigues({pose[3], pose[4], pose[5]});
  return rot;
}

std::vector<Vec3> pose_correctives(const ModelAssets& assets, const PoseCode& pose) {
  const auto rot = joint_rotations(pose);
  std::array<double, kPoseFeatureCount> features{};
  for (std::size_t j = 1; j < kJointCount; ++j) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        features[(j - 1) * 9 + r * 3 + c] = rot[j][r][c] - (r == c ? 1.0 : 0.0);
      }
    }
  }

  const std::size_t nv = assets.vertex_count();
  std::vector<Vec3> out(nv, Vec3{0.0, 0.0, 0.0});
  const auto basis = assets.pose_basis();
  for (std::size_t p = 0; p < kPoseFeatureCount; ++p) {
    const double f = features[p];
    if (f == 0.0) continue;
    for (std::size_t v = 0; v < nv; ++v) {
      const double* col = basis.data() + v * 3 * kPoseFeatureCount + p;
      out[v][0] += f * col[0];
      out[v][1] += f * col[kPoseFeatureCount];
      out[v][2] += f * col[2 * kPoseFeatureCount];
    }
  }
  return out;
}

std::vector<Vec3> lbs(const ModelAssets& assets, std::span<const Vec3> rest_vertices,
                      const JointPositions& joints, const PoseCode& pose) {
  const std::size_t nv = assets.vertex_count();
  if (rest_vertices.size() != nv) throw ValidationError("lbs: vertex count mismatch");

  // Each joint's world transform is kept as A_k(x) = x + M_k (x - J_k) + d_k
  // with M_k = R_k - I, so identity rotations contribute exactly zero.
  const auto local = joint_rotations(pose);
  const auto& parents = assets.parents();
  std::array<Mat3, kJointCount> world_rot;
  std::array<Mat3, kJointCount> delta_rot;
  std::array<Vec3, kJointCount> delta_t;
  world_rot[kRoot] = local[kRoot];
  delta_t[kRoot] = {0.0, 0.0, 0.0};
  for (std::size_t j = 1; j < kJointCount; ++j) {
    const auto p = static_cast<std::size_t>(parents[j]);
    world_rot[j] = mul(world_rot[p], local[j]);
    Mat3 parent_delta = world_rot[p];
    for (int d = 0; d < 3; ++d) parent_delta[d][d] -= 1.0;
    delta_t[j] = mul(parent_delta, joints[j] - joints[p]) + delta_t[p];
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    delta_rot[j] = world_rot[j];
    for (int d = 0; d < 3; ++d) delta_rot[j][d][d] -= 1.0;
  }

  const auto weights = assets.skin_weights();
  std::vector<Vec3> out(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const Vec3& x = rest_vertices[v];
    Vec3 disp{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < kJointCount; ++k) {
      const double w = weights[v * kJointCount + k];
      if (w == 0.0) continue;
      const Vec3 d = mul(delta_rot[k], x - joints[k]) + delta_t[k];
      disp[0] += w * d[0];
      disp[1] += w * d[1];
      disp[2] += w * d[2];
    }
    out[v] = x + disp;
    if (!std::isfinite(out[v][0]) || !std::isfinite(out[v][1]) || !std::isfinite(out[v][2])) {
      throw ValidationError("lbs: non-finite vertex " + std::to_string(v));
    }
  }
  return out;
}

FaceMesh decode(const ModelAssets& assets, const ParamCode& code) {
  validate_code(assets, code);
  std::vector<Vec3> rest = blend_shapes(assets, code.beta, code.psi);
  const JointPositions joints = regress_joints(assets, rest);
  const std::vector<Vec3> correctives = pose_correctives(assets, code.pose);
  for (std::size_t v = 0; v < rest.size(); ++v) rest[v] = rest[v] + correctives[v];

  FaceMesh mesh;
  mesh.vertices = lbs(assets, rest, joints, code.pose);
  mesh.faces = assets.faces();
  return mesh;
}

}  // namespace neutrex
