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

// FLAME-compatible blendshape face model: asset container and the decoder
// (shape/expression blendshapes, joint regression, pose correctives and
// linear blend skinning).

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neutrex/geometry.hpp"
#include "neutrex/nac.hpp"

namespace neutrex {

inline constexpr std::size_t kJointCount = 5;
/// 4 non-root joints x 9 entries of (R - I).
inline constexpr std::size_t kPoseFeatureCount = 36;
inline constexpr std::size_t kPoseCodeSize = 6;
/// Sentinel stored in the container's `parents` array for the root joint.
inline constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

enum Joint : std::size_t { kRoot = 0, kNeck = 1, kJaw = 2, kLeftEye = 3, kRightEye = 4 };

using Face = std::array<std::uint32_t, 3>;
using JointPositions = std::array<Vec3, kJointCount>;
/// [global axis-angle (3), jaw axis-angle (3)], radians.
using PoseCode = std::array<double, kPoseCodeSize>;

/// Plain arrays describing a model, in double precision. Tensor layouts are
/// row-major: shape/expression/pose bases are [vertex][xyz][component], the
/// joint regressor is [joint][vertex], skin weights are [vertex][joint].
struct AssetArrays {
  std::vector<Vec3> template_vertices;
  std::vector<Face> faces;
  std::size_t n_beta = 0;
  std::size_t n_psi = 0;
  std::vector<double> shape_basis;
  std::vector<double> expression_basis;
  std::vector<double> pose_basis;
  std::vector<double> joint_regressor;
  std::vector<double> skin_weights;
  std::array<int, kJointCount> parents{-1, 0, 1, 1, 1};
};

/// Immutable, validated model. Safe to share across threads.
class ModelAssets {
 public:
  /// Validates every invariant and throws ValidationError naming the
  /// offending array on failure.
  explicit ModelAssets(AssetArrays arrays);

  static ModelAssets from_nac(const nac::ArrayMap& arrays);
  static ModelAssets load(const std::filesystem::path& path);
  /// Narrows to the 32-bit container representation.
  nac::ArrayMap to_nac() const;
  void save(const std::filesystem::path& path) const;

  std::size_t vertex_count() const { return arrays_.template_vertices.size(); }
  std::size_t n_beta() const { return arrays_.n_beta; }
  std::size_t n_psi() const { return arrays_.n_psi; }

  const std::vector<Vec3>& template_vertices() const { return arrays_.template_vertices; }
  const std::shared_ptr<const std::vector<Face>>& faces() const { return faces_; }
  std::span<const double> shape_basis() const { return arrays_.shape_basis; }
  std::span<const double> expression_basis() const { return arrays_.expression_basis; }
  std::span<const double> pose_basis() const { return arrays_.pose_basis; }
  std::span<const double> joint_regressor() const { return arrays_.joint_regressor; }
  std::span<const double> skin_weights() const { return arrays_.skin_weights; }
  const std::array<int, kJointCount>& parents() const { return arrays_.parents; }

  struct RegressorEntry {
    std::size_t vertex;
    double weight;
  };
  /// Nonzero regressor weights of one joint in vertex order.
  const std::vector<RegressorEntry>& regressor_row(std::size_t joint) const {
    return regressor_rows_[joint];
  }

 private:
  AssetArrays arrays_;
  std::shared_ptr<const std::vector<Face>> faces_;
  std::array<std::vector<RegressorEntry>, kJointCount> regressor_rows_;
};

struct ParamCode {
  std::string sample_id;
  std::vector<double> beta;
  PoseCode pose{};
  std::vector<double> psi;

  Vec3 global_rotation() const { return {pose[0], pose[1], pose[2]}; }
  Vec3 jaw_rotation() const { return {pose[3], pose[4], pose[5]}; }
  void set_global_rotation(const Vec3& r) { pose[0] = r[0], pose[1] = r[1], pose[2] = r[2]; }
  void set_jaw_rotation(const Vec3& r) { pose[3] = r[0], pose[4] = r[1], pose[5] = r[2]; }
};

/// Throws ValidationError when vector lengths do not match the assets or an
/// entry is non-finite.
void validate_code(const ModelAssets& assets, const ParamCode& code);

struct FaceMesh {
  std::vector<Vec3> vertices;
  std::optional<std::vector<double>> per_vertex_scalar;
  std::shared_ptr<const std::vector<Face>> faces;
};

/// template + shape_basis * beta + expression_basis * psi.
std::vector<Vec3> blend_shapes(const ModelAssets& assets, std::span<const double> beta,
                               std::span<const double> psi);

JointPositions regress_joints(const ModelAssets& assets, std::span<const Vec3> rest_vertices);

/// Per-joint local rotations implied by a pose code. Neck and eyes are
/// pinned to identity.
std::array<Mat3, kJointCount> joint_rotations(const PoseCode& pose);

/// pose_basis applied to the stacked (R_j - I) of the four non-root joints.
std::vector<Vec3> pose_correctives(const ModelAssets& assets, const PoseCode& pose);

/// Linear blend skinning of `rest_vertices` (which should already carry the
/// pose correctives) around `joints`.
std::vector<Vec3> lbs(const ModelAssets& assets, std::span<const Vec3> rest_vertices,
                      const JointPositions& joints, const PoseCode& pose);

FaceMesh decode(const ModelAssets& assets, const ParamCode& code);

}  // namespace neutrex
