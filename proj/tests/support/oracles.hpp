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

// Brute-force evaluation oracles used by the unit and acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "neutrex/evaluation.hpp"
#include "neutrex/model.hpp"

namespace neutrex::testing {

/// Recomputes every EDC point from scratch: sort, drop, filter, count.
inline std::vector<double> brute_force_edc(const std::map<std::string, double>& qualities,
                                           const std::vector<eval::ComparisonRecord>& comparisons,
                                           double threshold, const std::vector<double>& grid) {
  std::vector<std::pair<double, std::string>> samples;
  for (const auto& [id, q] : qualities) samples.emplace_back(q, id);
  std::sort(samples.begin(), samples.end());
  std::vector<double> out;
  for (double x : grid) {
    const std::size_t k = eval::discarded_sample_count(x, samples.size());
    std::set<std::string> dropped;
    for (std::size_t i = 0; i < k; ++i) dropped.insert(samples[i].second);
    std::size_t kept = 0;
    std::size_t misses = 0;
    for (const auto& c : comparisons) {
      if (!c.mated || dropped.count(c.probe_id) || dropped.count(c.reference_id)) continue;
      ++kept;
      if (c.similarity < threshold) ++misses;
    }
    out.push_back(kept == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : static_cast<double>(misses) / static_cast<double>(kept));
  }
  return out;
}

/// Exhaustive threshold sweep: every distinct value (plus +inf) is tried and
/// both rates are counted directly.
inline double brute_force_d_eer(const std::vector<eval::LabeledScore>& scores) {
  std::vector<double> thresholds;
  for (const auto& s : scores) thresholds.push_back(s.quality);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  double prev_a = 0.0, prev_b = 0.0;
  bool first = true;
  for (double t : thresholds) {
    double nn = 0, nn_err = 0, ot = 0, ot_err = 0;
    for (const auto& s : scores) {
      if (s.label == eval::Label::neutral) {
        ++nn;
        if (s.quality < t) ++nn_err;
      } else {
        ++ot;
        if (s.quality >= t) ++ot_err;
      }
    }
    const double a = nn_err / nn;  // false non-neutral
    const double b = ot_err / ot;  // false neutral
    if (a >= b) {
      if (a == b || first) return a;
      // intersection of the segments (prev_a, a) and (prev_b, b)
      const double s = (prev_b - prev_a) / ((a - prev_a) - (b - prev_b));
      return prev_a + s * (a - prev_a);
    }
    prev_a = a;
    prev_b = b;
    first = false;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Midpoint Riemann sum of the piecewise-linear curve over [0, upper],
/// divided by upper.
inline double riemann_pauc(const std::vector<double>& x, const std::vector<double>& y, double upper,
                           std::size_t steps = 200000) {
  auto at = [&](double t) {
    std::size_t i = 1;
    while (i < x.size() - 1 && x[i] < t) ++i;
    const double f = (t - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + f * (y[i] - y[i - 1]);
  };
  const double h = upper / static_cast<double>(steps);
  double sum = 0.0;
  for (std::size_t s = 0; s < steps; ++s) sum += at((static_cast<double>(s) + 0.5) * h);
  return sum * h / upper;
}

/// Smallest candidate threshold whose match fraction is within the target,
/// found by counting every candidate.
inline double brute_force_threshold(std::vector<double> scores, double target) {
  std::sort(scores.begin(), scores.end());
  std::vector<double> candidates{scores.front()};
  for (double s : scores) candidates.push_back(std::nextafter(s, std::numeric_limits<double>::infinity()));
  std::sort(candidates.begin(), candidates.end());
  for (double t : candidates) {
    std::size_t at_or_above = 0;
    for (double s : scores) at_or_above += s >= t ? 1 : 0;
    if (static_cast<double>(at_or_above) <= target * static_cast<double>(scores.size()) + 1e-9) return t;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Nearest-rank quantile by full sort.
inline double sorted_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = std::ceil(p / 100.0 * static_cast<double>(v.size()));
  const std::size_t idx = pos < 1.0 ? 0 : std::min(v.size() - 1, static_cast<std::size_t>(pos) - 1);
  return v[idx];
}

inline double max_abs_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(a[v][c] - b[v][c]));
  }
  return m;
}

/// A random code of matching dimensions, entries ~ N(0, scale).
inline ParamCode random_code(std::mt19937_64& rng, std::size_t n_beta, std::size_t n_psi,
                             double scale = 1.0, double pose_scale = 0.5) {
  std::normal_distribution<double> g(0.0, 1.0);
  ParamCode c;
  c.sample_id = "random";
  for (std::size_t i = 0; i < n_beta; ++i) c.beta.push_back(scale * g(rng));
  for (std::size_t i = 0; i < n_psi; ++i) c.psi.push_back(scale * g(rng));
  for (auto& p : c.pose) p = pose_scale * g(rng);
  return c;
}

}  // namespace neutrex::testing
