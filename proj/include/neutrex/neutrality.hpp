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

// Expression-neutrality quality component: code normalization, neutral
// anchor, mesh-to-anchor distance, calibration and the [0,100] mapping.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neutrex/model.hpp"

namespace neutrex {

/// What normalization does with the jaw rotation. Global rotation and shape
/// are always zeroed.
enum class JawHandling { retain, zero };
/// Jaw rotation used when decoding the anchor (only meaningful when the jaw
/// is retained by normalization).
enum class AnchorJaw { mean, zero };
enum class DistanceReduction { mean, sum, frobenius };

struct JawPolicy {
  JawHandling normalization = JawHandling::retain;
  AnchorJaw anchor = AnchorJaw::mean;
};

std::string_view to_string(JawHandling v);
std::string_view to_string(AnchorJaw v);
std::string_view to_string(DistanceReduction v);
JawHandling parse_jaw_handling(std::string_view s);
AnchorJaw parse_anchor_jaw(std::string_view s);
DistanceReduction parse_distance_reduction(std::string_view s);

/// beta <- 0, global rotation <- 0, jaw per policy; psi and id untouched.
ParamCode normalize_code(const ParamCode& code, JawHandling jaw = JawHandling::retain);

struct NeutralAnchor {
  std::vector<double> psi_a;
  Vec3 jaw{0.0, 0.0, 0.0};
  FaceMesh mesh;
  std::size_t source_count = 0;
  JawPolicy jaw_policy;

  /// The normalized code the anchor mesh is decoded from.
  ParamCode code(std::size_t n_beta) const;
};

NeutralAnchor build_anchor(const ModelAssets& assets, std::span<const ParamCode> neutral_codes,
                           JawPolicy policy = {});

/// Reassembles an anchor from a stored expression code and jaw (decodes the
/// mesh again).
NeutralAnchor make_anchor(const ModelAssets& assets, std::vector<double> psi_a, const Vec3& jaw,
                          std::size_t source_count, JawPolicy policy);

/// Euclidean norm of every vertex offset to the anchor.
std::vector<double> per_vertex_residuals(const FaceMesh& mesh, const NeutralAnchor& anchor);

/// Reduction of the per-vertex residuals: mean of norms (default), their sum,
/// or the Frobenius norm of the full offset matrix.
double distance(const FaceMesh& mesh, const NeutralAnchor& anchor,
                DistanceReduction reduction = DistanceReduction::mean);

struct CalibrationMethod {
  enum class Kind { exact_extrema, percentile } kind = Kind::exact_extrema;
  double p_lo = 0.0;  // percent, percentile mode only
  double p_hi = 100.0;

  static CalibrationMethod exact() { return {}; }
  static CalibrationMethod percentile(double lo, double hi) {
    return {Kind::percentile, lo, hi};
  }
  /// "exact-extrema" or "percentile(p_lo,p_hi)".
  std::string to_string() const;
  static CalibrationMethod parse(std::string_view s);
};

struct Calibration {
  double d_min = 0.0;
  double d_max = 1.0;
  CalibrationMethod method;
  std::size_t training_sample_count = 0;

  /// Throws unless d_min < d_max, both finite and nonnegative.
  void validate() const;
};

/// Nearest-rank empirical quantile of already sorted values, p in percent.
double nearest_rank(std::span<const double> sorted, double p);

/// Range of `values` per `method`; rejects inputs with fewer than two
/// distinct values and ranges that collapse. Shared with the SVM baseline.
std::pair<double, double> empirical_range(std::span<const double> values,
                                          const CalibrationMethod& method);

Calibration calibrate(std::span<const double> training_distances,
                      const CalibrationMethod& method = CalibrationMethod::exact());

/// 100 * (1 - (d - d_min) / (d_max - d_min)), clipped to [0, 100].
double neutrex_score(double d, const Calibration& calib);

struct QualityScore {
  std::string sample_id;
  double raw_distance = 0.0;
  double neutrex = 0.0;
};

struct ScoringOptions {
  DistanceReduction reduction = DistanceReduction::mean;
};

QualityScore score_sample(const ModelAssets& assets, const NeutralAnchor& anchor,
                          const Calibration& calib, const ParamCode& code,
                          const ScoringOptions& options = {});

/// Raw distance of one code to the anchor, after normalization.
double code_distance(const ModelAssets& assets, const NeutralAnchor& anchor,
                     const ParamCode& code, DistanceReduction reduction = DistanceReduction::mean);

/// Scores codes on `workers` threads (0 = hardware concurrency). Output order
/// matches input order and is independent of the worker count.
std::vector<QualityScore> score_batch(const ModelAssets& assets, const NeutralAnchor& anchor,
                                      const Calibration& calib, std::span<const ParamCode> codes,
                                      const ScoringOptions& options = {}, unsigned workers = 1);

}  // namespace neutrex
