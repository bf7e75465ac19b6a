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

#include "neutrex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neutrex/error.hpp"

namespace neutrex::synth {
namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

/// Hermite step from 0 at e0 to 1 at e1 (e0 > e1 gives a falling step).
double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

Vec3 unit(const Vec3& v) {
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : Vec3{0.0, 0.0, 1.0};
}

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return unit({g(rng), g(rng), g(rng)});
}

// Procedural head: a top pole plus kRings x kSegments latitude rings, open at
// the neck. 1 + 54 * 93 = 5,023 vertices. y is up, z faces forward.
constexpr std::size_t kRings = 54;
constexpr std::size_t kSegments = 93;
constexpr double kSemiX = 0.075;
constexpr double kSemiY = 0.100;
constexpr double kSemiZ = 0.090;

struct HeadVertex {
  Vec3 p;
  Vec3 normal;
  double polar = 0.0;    // radians from the crown
  double facing = 0.0;   // cosine of azimuth, 1 = straight ahead
};

std::vector<HeadVertex> head_geometry() {
  std::vector<HeadVertex> out;
  out.reserve(kHeadVertexCount);
  out.push_back({{0.0, kSemiY, 0.0}, {0.0, 1.0, 0.0}, 0.0, 0.0});
  for (std::size_t i = 0; i < kRings; ++i) {
    const double polar = deg(4.0 + 151.0 * static_cast<double>(i) / (kRings - 1));
    const double neck = 1.0 - 0.45 * smoothstep(deg(135.0), deg(155.0), polar);
    for (std::size_t j = 0; j < kSegments; ++j) {
      const double az = 2.0 * kPi * static_cast<double>(j) / kSegments;
      HeadVertex v;
      v.polar = polar;
      v.facing = std::cos(az);
      v.p = {kSemiX * neck * std::sin(polar) * std::sin(az), kSemiY * std::cos(polar),
             kSemiZ * neck * std::sin(polar) * std::cos(az)};
      v.normal = unit({v.p[0] / (kSemiX * kSemiX), v.p[1] / (kSemiY * kSemiY),
                       v.p[2] / (kSemiZ * kSemiZ)});
      // nose
      const double dn = (v.p[0] * v.p[0] + (v.p[1] + 0.005) * (v.p[1] + 0.005)) / (2 * 0.012 * 0.012);
      if (v.facing > 0.0) v.p[2] += 0.02 * std::exp(-dn) * v.facing;
      out.push_back(v);
    }
  }
  return out;
}

std::size_t ring_vertex(std::size_t ring, std::size_t segment) {
  return 1 + ring * kSegments + segment;
}

/// Gaussian falloff around a point (x0, y0) on the front of the face.
double front_patch(const HeadVertex& v, double x0, double y0, double width) {
  if (v.facing <= 0.0) return 0.0;
  const double dx = v.p[0] - x0;
  const double dy = v.p[1] - y0;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width)) * smoothstep(0.0, 0.4, v.facing);
}

/// Lower-face region driven by the jaw.
double jaw_region(const HeadVertex& v) {
  return smoothstep(-0.018, -0.030, v.p[1]) * smoothstep(0.0, 0.35, v.facing) *
         (1.0 - smoothstep(deg(138.0), deg(148.0), v.polar));
}

constexpr Vec3 kLeftEyeCenter{0.032, 0.025, 0.0};
constexpr Vec3 kRightEyeCenter{-0.032, 0.025, 0.0};

double eye_patch(const HeadVertex& v, const Vec3& eye) {
  if (v.facing <= 0.3) return 0.0;
  const double dx = v.p[0] - eye[0];
  const double dy = v.p[1] - eye[1];
  const double d2 = dx * dx + dy * dy;
  if (d2 > 0.012 * 0.012) return 0.0;
  return 0.9 * std::exp(-d2 / (2.0 * 0.006 * 0.006));
}

void set_basis(std::vector<double>& basis, std::size_t n, std::size_t v, std::size_t k,
               const Vec3& d) {
  for (std::size_t c = 0; c < 3; ++c) basis[(v * 3 + c) * n + k] = d[c];
}

}  // namespace

AssetArrays random_toy_arrays(Rng& rng, std::size_t n_beta, std::size_t n_psi) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  constexpr std::size_t nv = 4;
  AssetArrays a;
  a.template_vertices.resize(nv);
  for (auto& p : a.template_vertices) p = {g(rng), g(rng), g(rng)};
  a.faces = {{0, 1, 2}, {0, 2, 3}};
  a.n_beta = n_beta;
  a.n_psi = n_psi;
  auto fill = [&](std::vector<double>& v, std::size_t n, double scale) {
    v.resize(n);
    for (auto& x : v) x = scale * g(rng);
  };
  fill(a.shape_basis, nv * 3 * n_beta, 0.1);
  fill(a.expression_basis, nv * 3 * n_psi, 0.1);
  fill(a.pose_basis, nv * 3 * kPoseFeatureCount, 0.05);
  a.joint_regressor.resize(kJointCount * nv);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    double sum = 0.0;
    for (std::size_t v = 0; v < nv; ++v) sum += a.joint_regressor[j * nv + v] = u(rng);
    for (std::size_t v = 0; v < nv; ++v) a.joint_regressor[j * nv + v] /= sum;
  }
  a.skin_weights.resize(nv * kJointCount);
  for (std::size_t v = 0; v < nv; ++v) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kJointCount; ++k) sum += a.skin_weights[v * kJointCount + k] = u(rng);
    for (std::size_t k = 0; k < kJointCount; ++k) a.skin_weights[v * kJointCount + k] /= sum;
  }
  return a;
}

HeadModel make_head_model(const HeadOptions& options) {
  Rng rng(options.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const auto geo = head_geometry();
  const std::size_t nv = geo.size();
  AssetArrays a;
  a.n_beta = options.n_beta;
  a.n_psi = options.n_psi;
  a.template_vertices.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) a.template_vertices[v] = geo[v].p;

  for (std::size_t j = 0; j < kSegments; ++j) {
    const auto next = static_cast<std::uint32_t>((j + 1) % kSegments);
    a.faces.push_back({0, static_cast<std::uint32_t>(ring_vertex(0, next)),
                       static_cast<std::uint32_t>(ring_vertex(0, j))});
  }
  for (std::size_t i = 0; i + 1 < kRings; ++i) {
    for (std::size_t j = 0; j < kSegments; ++j) {
      const std::size_t jn = (j + 1) % kSegments;
      const auto p00 = static_cast<std::uint32_t>(ring_vertex(i, j));
      const auto p01 = static_cast<std::uint32_t>(ring_vertex(i, jn));
      const auto p10 = static_cast<std::uint32_t>(ring_vertex(i + 1, j));
      const auto p11 = static_cast<std::uint32_t>(ring_vertex(i + 1, jn));
      a.faces.push_back({p00, p01, p10});
      a.faces.push_back({p01, p11, p10});
    }
  }

  // Identity shape: smooth low-frequency fields along the normal.
  a.shape_basis.assign(nv * 3 * a.n_beta, 0.0);
  for (std::size_t k = 0; k < a.n_beta; ++k) {
    const double m = std::floor(u(rng) * 4.0);
    const double l = std::floor(u(rng) * 4.0);
    const double ph1 = 2 * kPi * u(rng);
    const double ph2 = 2 * kPi * u(rng);
    const double amp = 0.004 / (1.0 + static_cast<double>(k) / 10.0);
    for (std::size_t v = 0; v < nv; ++v) {
      const double az = std::acos(std::clamp(geo[v].facing, -1.0, 1.0)) * (geo[v].p[0] < 0 ? -1 : 1);
      const double f = amp * std::cos(m * geo[v].polar + ph1) * std::cos(l * az + ph2);
      set_basis(a.shape_basis, a.n_beta, v, k, f * geo[v].normal);
    }
  }

  // Expression: five semantic components, then random local bumps.
  a.expression_basis.assign(nv * 3 * a.n_psi, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto& hv = geo[v];
    const Vec3 fields[5] = {
        // mouth open: lower lip and chin drop
        front_patch(hv, 0.0, -0.052, 0.02) * Vec3{0.0, -0.006, -0.002},
        // smile: lip corners pulled up and out
        front_patch(hv, 0.025, -0.035, 0.01) * Vec3{0.004, 0.003, -0.001} +
            front_patch(hv, -0.025, -0.035, 0.01) * Vec3{-0.004, 0.003, -0.001},
        // brow raise
        (front_patch(hv, 0.03, 0.045, 0.012) + front_patch(hv, -0.03, 0.045, 0.012)) *
            Vec3{0.0, 0.004, 0.0},
        // squint
        (front_patch(hv, kLeftEyeCenter[0], kLeftEyeCenter[1] - 0.006, 0.007) +
         front_patch(hv, kRightEyeCenter[0], kRightEyeCenter[1] - 0.006, 0.007)) * Vec3{0.0, 0.002, 0.0005},
        // nose wrinkle
        front_patch(hv, 0.0, 0.005, 0.01) * Vec3{0.0, 0.002, 0.001},
    };
    for (std::size_t k = 0; k < std::min<std::size_t>(5, a.n_psi); ++k) {
      set_basis(a.expression_basis, a.n_psi, v, k, fields[k]);
    }
  }
  for (std::size_t k = 5; k < a.n_psi; ++k) {
    const double x0 = -0.05 + 0.1 * u(rng);
    const double y0 = -0.06 + 0.11 * u(rng);
    const double width = 0.008 + 0.012 * u(rng);
    const double amp = 0.0015 * g(rng);
    for (std::size_t v = 0; v < nv; ++v) {
      const double f = amp * front_patch(geo[v], x0, y0, width);
      if (f != 0.0) set_basis(a.expression_basis, a.n_psi, v, k, f * geo[v].normal);
    }
  }

  // Pose correctives: jaw features act on the lower face, the rest near the
  // neck and eyes.
  a.pose_basis.assign(nv * 3 * kPoseFeatureCount, 0.0);
  for (std::size_t p = 0; p < kPoseFeatureCount; ++p) {
    const Vec3 dir = random_unit(rng);
    const bool jaw_feature = p >= 9 && p < 18;
    const bool eye_feature = p >= 18;
    for (std::size_t v = 0; v < nv; ++v) {
      double f = 0.0;
      if (jaw_feature) {
        f = 0.004 * jaw_region(geo[v]);
      } else if (eye_feature) {
        f = 0.001 * eye_patch(geo[v], p < 27 ? kLeftEyeCenter : kRightEyeCenter);
      } else {
        f = 0.001 * smoothstep(deg(120.0), deg(150.0), geo[v].polar);
      }
      if (f != 0.0) set_basis(a.pose_basis, kPoseFeatureCount, v, p, f * dir);
    }
  }

  // Regressor rows are convex combinations of template vertices.
  a.joint_regressor.assign(kJointCount * nv, 0.0);
  auto ring_row = [&](std::size_t joint, std::size_t ring) {
    for (std::size_t j = 0; j < kSegments; ++j) {
      a.joint_regressor[joint * nv + ring_vertex(ring, j)] = 1.0 / kSegments;
    }
  };
  ring_row(kRoot, kRings - 1);
  ring_row(kNeck, 46);
  ring_row(kJaw, 34);
  for (const auto& [joint, eye] : {std::pair{kLeftEye, kLeftEyeCenter}, std::pair{kRightEye, kRightEyeCenter}}) {
    std::vector<std::size_t> patch;
    for (std::size_t v = 0; v < nv; ++v) {
      if (eye_patch(geo[v], eye) > 0.0) patch.push_back(v);
    }
    if (patch.empty()) throw ValidationError("synth: empty eye patch");
    for (auto v : patch) a.joint_regressor[joint * nv + v] = 1.0 / static_cast<double>(patch.size());
  }

  a.skin_weights.assign(nv * kJointCount, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    double* w = a.skin_weights.data() + v * kJointCount;
    w[kRoot] = smoothstep(deg(140.0), deg(155.0), geo[v].polar);
    w[kJaw] = jaw_region(geo[v]);
    w[kLeftEye] = eye_patch(geo[v], kLeftEyeCenter);
    w[kRightEye] = eye_patch(geo[v], kRightEyeCenter);
    const double used = w[kRoot] + w[kJaw] + w[kLeftEye] + w[kRightEye];
    w[kNeck] = std::max(0.0, 1.0 - used);
    const double sum = used + w[kNeck];
    for (std::size_t k = 0; k < kJointCount; ++k) w[k] /= sum;
  }

  std::vector<std::uint32_t> mask;
  for (std::size_t v = 0; v < nv; ++v) {
    if (geo[v].facing > 0.0 && geo[v].p[1] < -0.012 && geo[v].polar < deg(150.0)) {
      mask.push_back(static_cast<std::uint32_t>(v));
    }
  }

  // Round-trip through f32 so in-memory assets equal those loaded from disk.
  ModelAssets exact(std::move(a));
  return {ModelAssets::from_nac(exact.to_nac()), std::move(mask)};
}

std::string_view to_string(Expression e) {
  switch (e) {
    case Expression::neutral: return "neutral";
    case Expression::happy: return "happy";
    case Expression::surprise: return "surprise";
    case Expression::squint: return "squint";
    case Expression::disgust: return "disgust";
    case Expression::scream: return "scream";
  }
  return "neutral";
}

namespace {

struct ClassProfile {
  double psi[5];
  double jaw;
  double severity;  // drives synthetic mated similarity loss
};

ClassProfile profile(Expression e) {
  switch (e) {
    case Expression::neutral: return {{0, 0, 0, 0, 0}, 0.0, 0.0};
    case Expression::happy: return {{0.3, 2.5, 0.2, 0.8, 0}, 0.04, 0.45};
    case Expression::surprise: return {{1.5, 0, 2.5, -0.5, 0}, 0.2, 0.8};
    case Expression::squint: return {{0, 0.3, -0.5, 2.5, 0.5}, 0.0, 0.3};
    case Expression::disgust: return {{0.2, -1.0, -1.0, 1.0, 2.5}, 0.03, 0.5};
    case Expression::scream: return {{3.0, 0.5, 1.0, 1.0, 0.5}, 0.35, 1.0};
  }
  return {};
}

}  // namespace

ParamCode sample_code(const ModelAssets& assets, Expression e, double intensity, Rng& rng,
                      std::string sample_id) {
  std::normal_distribution<double> g(0.0, 1.0);
  const ClassProfile prof = profile(e);
  ParamCode c;
  c.sample_id = std::move(sample_id);
  c.beta.resize(assets.n_beta());
  for (auto& b : c.beta) b = g(rng);
  c.psi.resize(assets.n_psi());
  for (std::size_t k = 0; k < c.psi.size(); ++k) {
    const double base = k < 5 ? prof.psi[k] * intensity : 0.0;
    c.psi[k] = base + 0.15 * g(rng);
  }
  c.set_global_rotation({0.15 * g(rng), 0.3 * g(rng), 0.1 * g(rng)});
  c.set_jaw_rotation({prof.jaw * intensity + 0.01 * g(rng), 0.005 * g(rng), 0.005 * g(rng)});
  return c;
}

ParamCode scream_code(const ModelAssets& assets, std::string sample_id) {
  ParamCode c;
  c.sample_id = std::move(sample_id);
  c.beta.assign(assets.n_beta(), 0.0);
  c.psi.assign(assets.n_psi(), 0.0);
  const ClassProfile prof = profile(Expression::scream);
  for (std::size_t k = 0; k < std::min<std::size_t>(5, c.psi.size()); ++k) c.psi[k] = prof.psi[k];
  c.set_jaw_rotation({prof.jaw, 0.0, 0.0});
  return c;
}

Dataset make_dataset(const ModelAssets& assets, const DatasetOptions& options) {
  if (options.subjects < 2 || options.samples_per_subject < 2) {
    throw ValidationError("synth: need at least 2 subjects with 2 samples each");
  }
  Rng rng(options.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto pick_class = [&]() {
    const double r = u(rng);
    if (r < 0.4) return Expression::neutral;
    const auto idx = 1 + std::min<std::size_t>(4, static_cast<std::size_t>((r - 0.4) / 0.12));
    return kAllExpressions[idx];
  };
  auto id = [](std::string_view prefix, std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(prefix) + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
  };

  Dataset d;
  for (std::size_t i = 0; i < options.neutral_training; ++i) {
    d.neutral_codes.push_back(sample_code(assets, Expression::neutral, 1.0, rng, id("neutral_", i)));
  }
  for (std::size_t i = 0; i < options.mixed_training; ++i) {
    const Expression e = pick_class();
    d.training_codes.push_back(sample_code(assets, e, 0.2 + 0.8 * u(rng), rng, id("train_", i)));
  }

  std::vector<double> severity;
  std::vector<std::size_t> subject_of;
  for (std::size_t s = 0; s < options.subjects; ++s) {
    for (std::size_t k = 0; k < options.samples_per_subject; ++k) {
      const Expression e = k == 0 ? Expression::neutral : pick_class();
      const double intensity = 0.2 + 0.8 * u(rng);
      const std::string sid = "s" + id("", s) + "_" + std::to_string(k);
      d.codes.push_back(sample_code(assets, e, intensity, rng, sid));
      d.labels.emplace_back(sid, std::string(to_string(e)));
      severity.push_back(profile(e).severity * intensity);
      subject_of.push_back(s);
    }
  }

  const std::size_t per = options.samples_per_subject;
  const std::size_t n = d.codes.size();
  std::uniform_int_distribution<std::size_t> subject(0, options.subjects - 1);
  std::uniform_int_distribution<std::size_t> member(0, per - 1);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  for (std::size_t m = 0; m < options.mated; ++m) {
    const std::size_t s = subject(rng);
    const std::size_t a = s * per + member(rng);
    std::size_t b = s * per + member(rng);
    if (b == a) b = s * per + (a - s * per + 1) % per;
    const double sim = 0.75 - 0.45 * (severity[a] + severity[b]) + 0.06 * g(rng);
    d.comparisons.push_back({d.codes[a].sample_id, d.codes[b].sample_id, sim, true});
  }
  for (std::size_t m = 0; m < options.nonmated; ++m) {
    const std::size_t a = any(rng);
    std::size_t b = any(rng);
    while (subject_of[b] == subject_of[a]) b = any(rng);
    d.comparisons.push_back({d.codes[a].sample_id, d.codes[b].sample_id, 0.1 + 0.08 * g(rng), false});
  }
  return d;
}

}  // namespace neutrex::synth
