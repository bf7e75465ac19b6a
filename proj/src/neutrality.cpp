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

#include "neutrex/neutrality.hpp"

#include <algorithm>
#include <cmath>

#include "neutrex/error.hpp"
#include "neutrex/format.hpp"
#include "neutrex/parallel.hpp"

namespace neutrex {

std::string_view to_string(JawHandling v) { return v == JawHandling::retain ? "retain" : "zero"; }
std::string_view to_string(AnchorJaw v) { return v == AnchorJaw::mean ? "mean" : "zero"; }
std::string_view to_string(DistanceReduction v) {
  switch (v) {
    case DistanceReduction::mean: return "mean";
    case DistanceReduction::sum: return "sum";
    case DistanceReduction::frobenius: return "frobenius";
  }
  return "mean";
}

JawHandling parse_jaw_handling(std::string_view s) {
  if (s == "retain") return JawHandling::retain;
  if (s == "zero") return JawHandling::zero;
  throw ValidationError("unknown jaw handling '" + std::string(s) + "' (expected retain|zero)");
}

AnchorJaw parse_anchor_jaw(std::string_view s) {
  if (s == "mean") return AnchorJaw::mean;
  if (s == "zero") return AnchorJaw::zero;
  throw ValidationError("unknown anchor jaw '" + std::string(s) + "' (expected mean|zero)");
}

DistanceReduction parse_distance_reduction(std::string_view s) {
  if (s == "mean") return DistanceReduction::mean;
  if (s == "sum") return DistanceReduction::sum;
  if (s == "frobenius") return DistanceReduction::frobenius;
  throw ValidationError("unknown distance reduction '" + std::string(s) +
                        "' (expected mean|sum|frobenius)");
}

ParamCode normalize_code(const ParamCode& code, JawHandling jaw) {
  ParamCode out = code;
  std::fill(out.beta.begin(), out.beta.end(), 0.0);
  out.set_global_rotation({0.0, 0.0, 0.0});
  if (jaw == JawHandling::zero) out.set_jaw_rotation({0.0, 0.0, 0.0});
  return out;
}

ParamCode NeutralAnchor::code(std::size_t n_beta) const {
  ParamCode c;
  c.sample_id = "anchor";
  c.beta.assign(n_beta, 0.0);
  c.psi = psi_a;
  c.set_jaw_rotation(jaw);
  return c;
}

NeutralAnchor make_anchor(const ModelAssets& assets, std::vector<double> psi_a, const Vec3& jaw,
                          std::size_t source_count, JawPolicy policy) {
  if (source_count < 1) throw ValidationError("anchor: source_count must be >= 1");
  if (psi_a.size() != assets.n_psi()) {
    throw ValidationError("anchor: psi_a has " + std::to_string(psi_a.size()) +
                          " entries, assets expect " + std::to_string(assets.n_psi()));
  }
  NeutralAnchor anchor;
  anchor.psi_a = std::move(psi_a);
  const bool jaw_free =
      policy.normalization == JawHandling::retain && policy.anchor == AnchorJaw::mean;
  anchor.jaw = jaw_free ? jaw : Vec3{0.0, 0.0, 0.0};
  anchor.source_count = source_count;
  anchor.jaw_policy = policy;
  anchor.mesh = decode(assets, anchor.code(assets.n_beta()));
  return anchor;
}

NeutralAnchor build_anchor(const ModelAssets& assets, std::span<const ParamCode> neutral_codes,
                           JawPolicy policy) {
  if (neutral_codes.empty()) throw ValidationError("anchor: no neutral codes given");
  const std::size_t n_psi = assets.n_psi();
  std::vector<double> psi_sum(n_psi, 0.0);
  Vec3 jaw_sum{0.0, 0.0, 0.0};
  for (const auto& code : neutral_codes) {
    validate_code(assets, code);
    for (std::size_t k = 0; k < n_psi; ++k) psi_sum[k] += code.psi[k];
    jaw_sum = jaw_sum + code.jaw_rotation();
  }
  const double n = static_cast<double>(neutral_codes.size());
  for (auto& x : psi_sum) x /= n;
  const Vec3 jaw_mean{jaw_sum[0] / n, jaw_sum[1] / n, jaw_sum[2] / n};
  return make_anchor(assets, std::move(psi_sum), jaw_mean, neutral_codes.size(), policy);
}

std::vector<double> per_vertex_residuals(const FaceMesh& mesh, const NeutralAnchor& anchor) {
  const auto& a = anchor.mesh.vertices;
  if (mesh.vertices.size() != a.size()) {
    throw ValidationError("distance: mesh has " + std::to_string(mesh.vertices.size()) +
                          " vertices, anchor has " + std::to_string(a.size()));
  }
  std::vector<double> out(a.size());
  for (std::size_t v = 0; v < a.size(); ++v) out[v] = norm(mesh.vertices[v] - a[v]);
  return out;
}

double distance(const FaceMesh& mesh, const NeutralAnchor& anchor, DistanceReduction reduction) {
  const auto residuals = per_vertex_residuals(mesh, anchor);
  double acc = 0.0;
  switch (reduction) {
    case DistanceReduction::mean:
      for (double r : residuals) acc += r;
      return acc / static_cast<double>(residuals.size());
    case DistanceReduction::sum:
      for (double r : residuals) acc += r;
      return acc;
    case DistanceReduction::frobenius:
      for (double r : residuals) acc += r * r;
      return std::sqrt(acc);
  }
  return acc;
}

std::string CalibrationMethod::to_string() const {
  if (kind == Kind::exact_extrema) return "exact-extrema";
  return "percentile(" + format_double(p_lo) + "," + format_double(p_hi) + ")";
}

CalibrationMethod CalibrationMethod::parse(std::string_view s) {
  if (s == "exact-extrema" || s == "exact") return exact();
  constexpr std::string_view prefix = "percentile(";
  if (s.starts_with(prefix) && s.ends_with(")")) {
    const auto body = s.substr(prefix.size(), s.size() - prefix.size() - 1);
    const auto comma = body.find(',');
    if (comma != std::string_view::npos) {
      const double lo = parse_double(body.substr(0, comma), "calibration method");
      const double hi = parse_double(body.substr(comma + 1), "calibration method");
      if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) {
        throw ValidationError("calibration method: need 0 <= p_lo < p_hi <= 100");
      }
      return percentile(lo, hi);
    }
  }
  throw ValidationError("unknown calibration method '" + std::string(s) +
                        "' (expected exact-extrema or percentile(lo,hi))");
}

void Calibration::validate() const {
  if (!std::isfinite(d_min) || !std::isfinite(d_max)) {
    throw ValidationError("calibration: d_min and d_max must be finite");
  }
  if (d_min < 0.0 || d_max < 0.0) throw ValidationError("calibration: bounds must be nonnegative");
  if (!(d_min < d_max)) throw ValidationError("calibration: d_min must be < d_max");
}

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty list");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::pair<double, double> empirical_range(std::span<const double> values,
                                          const CalibrationMethod& method) {
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ValidationError("calibration: non-finite training value");
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2 || sorted.front() == sorted.back()) {
    throw ValidationError("calibration: degenerate range (fewer than 2 distinct values)");
  }
  if (method.kind == CalibrationMethod::Kind::exact_extrema) {
    return {sorted.front(), sorted.back()};
  }
  if (!(method.p_lo >= 0.0 && method.p_lo < method.p_hi && method.p_hi <= 100.0)) {
    throw ValidationError("calibration: need 0 <= p_lo < p_hi <= 100");
  }
  const double lo = nearest_rank(sorted, method.p_lo);
  const double hi = nearest_rank(sorted, method.p_hi);
  if (!(lo < hi)) throw ValidationError("calibration: percentile range collapsed");
  return {lo, hi};
}

Calibration calibrate(std::span<const double> training_distances, const CalibrationMethod& method) {
  const auto [lo, hi] = empirical_range(training_distances, method);
  Calibration c{lo, hi, method, training_distances.size()};
  c.validate();
  return c;
}

double neutrex_score(double d, const Calibration& calib) {
  if (!std::isfinite(d)) throw ValidationError("neutrex_score: non-finite distance");
  const double q = 100.0 * (1.0 - (d - calib.d_min) / (calib.d_max - calib.d_min));
  return std::clamp(q, 0.0, 100.0);
}

double code_distance(const ModelAssets& assets, const NeutralAnchor& anchor,
                     const ParamCode& code, DistanceReduction reduction) {
  const ParamCode normalized = normalize_code(code, anchor.jaw_policy.normalization);
  return distance(decode(assets, normalized), anchor, reduction);
}

QualityScore score_sample(const ModelAssets& assets, const NeutralAnchor& anchor,
                          const Calibration& calib, const ParamCode& code,
                          const ScoringOptions& options) {
  const double d = code_distance(assets, anchor, code, options.reduction);
  return {code.sample_id, d, neutrex_score(d, calib)};
}

std::vector<QualityScore> score_batch(const ModelAssets& assets, const NeutralAnchor& anchor,
                                      const Calibration& calib, std::span<const ParamCode> codes,
                                      const ScoringOptions& options, unsigned workers) {
  calib.validate();
  std::vector<QualityScore> out(codes.size());
  parallel_for(codes.size(), workers, [&](std::size_t i) {
    out[i] = score_sample(assets, anchor, calib, codes[i], options);
  });
  return out;
}

}  // namespace neutrex
