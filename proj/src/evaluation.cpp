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

#include "neutrex/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "neutrex/error.hpp"
#include "neutrex/neutrality.hpp"

namespace neutrex::eval {

DetCurve det_curve(std::span<const LabeledScore> scores) {
  std::vector<double> neutral;
  std::vector<double> other;
  for (const auto& s : scores) {
    if (!std::isfinite(s.quality)) throw ValidationError("det: non-finite quality for " + s.sample_id);
    (s.label == Label::neutral ? neutral : other).push_back(s.quality);
  }
  if (neutral.empty() || other.empty()) {
    throw ValidationError("det: both neutral and non-neutral samples are required");
  }
  std::sort(neutral.begin(), neutral.end());
  std::sort(other.begin(), other.end());

  std::vector<double> thresholds;
  thresholds.reserve(neutral.size() + other.size() + 1);
  std::merge(neutral.begin(), neutral.end(), other.begin(), other.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const auto n_neutral = static_cast<double>(neutral.size());
  const auto n_other = static_cast<double>(other.size());
  DetCurve curve;
  curve.points.reserve(thresholds.size());
  std::size_t below_neutral = 0;
  std::size_t below_other = 0;
  for (double t : thresholds) {
    while (below_neutral < neutral.size() && neutral[below_neutral] < t) ++below_neutral;
    while (below_other < other.size() && other[below_other] < t) ++below_other;
    curve.points.push_back({t, static_cast<double>(below_neutral) / n_neutral,
                            static_cast<double>(other.size() - below_other) / n_other});
  }

  // First point has fnnr = 0 and the last fnr = 0, so a crossing exists.
  const auto& pts = curve.points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double diff = pts[k].false_non_neutral_rate - pts[k].false_neutral_rate;
    if (diff < 0.0) continue;
    if (diff == 0.0 || k == 0) {
      curve.d_eer = pts[k].false_non_neutral_rate;
    } else {
      const double prev = pts[k - 1].false_non_neutral_rate - pts[k - 1].false_neutral_rate;
      const double alpha = -prev / (diff - prev);
      const double a = pts[k - 1].false_non_neutral_rate;
      const double b = pts[k].false_non_neutral_rate;
      curve.d_eer = a + alpha * (b - a);
    }
    break;
  }
  return curve;
}

double threshold_from_fmr(std::span<const double> nonmated, double target_fmr) {
  if (nonmated.empty()) throw ValidationError("threshold: no non-mated similarities");
  if (!(target_fmr >= 0.0 && target_fmr <= 1.0)) {
    throw ValidationError("threshold: target FMR must lie in [0, 1]");
  }
  std::vector<double> sorted(nonmated.begin(), nonmated.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw ValidationError("threshold: non-finite similarity");
  }
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto allowed = static_cast<std::size_t>(
      std::floor(target_fmr * static_cast<double>(n) + 1e-9));
  if (allowed >= n) return sorted.front();
  return std::nextafter(sorted[n - allowed - 1], std::numeric_limits<double>::infinity());
}

double fnmr_at_threshold(std::span<const double> mated, double threshold) {
  if (mated.empty()) throw DegenerateCurveError("fnmr: no mated comparisons left");
  const auto misses = std::count_if(mated.begin(), mated.end(),
                                    [threshold](double s) { return s < threshold; });
  return static_cast<double>(misses) / static_cast<double>(mated.size());
}

std::size_t discarded_sample_count(double fraction, std::size_t sample_count) {
  const double raw = std::floor(fraction * static_cast<double>(sample_count) + 1e-9);
  return std::min(sample_count, static_cast<std::size_t>(std::max(0.0, raw)));
}

std::vector<double> default_discard_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(i / 100.0);
  return grid;
}

EdcCurve edc(const std::map<std::string, double>& qualities,
             std::span<const ComparisonRecord> comparisons, double threshold,
             std::span<const double> grid, double pauc_upper) {
  if (grid.empty() || grid.front() != 0.0) throw ValidationError("edc: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("edc: grid must be strictly increasing");
  }
  if (grid.back() > kMaxDiscardFraction) {
    throw ValidationError("edc: discard fractions above 0.98 are not allowed");
  }
  if (!std::isfinite(threshold)) throw ValidationError("edc: threshold must be finite");

  // Quality rank of each sample: ascending quality, ties by sample_id (the
  // map is already ordered by id, and stable_sort keeps that order).
  std::vector<std::pair<double, const std::string*>> order;
  order.reserve(qualities.size());
  for (const auto& [id, q] : qualities) {
    if (!std::isfinite(q)) throw ValidationError("edc: non-finite quality for " + id);
    order.emplace_back(q, &id);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::map<std::string_view, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(*order[i].second, i);

  auto rank_of = [&](const std::string& id) {
    const auto it = rank.find(id);
    if (it == rank.end()) throw ValidationError("edc: no quality for sample '" + id + "'");
    return it->second;
  };

  // A mated pair survives discarding k samples iff min(rank) >= k, i.e. the
  // pair quality is min(quality_probe, quality_reference).
  std::vector<std::pair<std::size_t, bool>> pairs;
  for (const auto& c : comparisons) {
    if (!c.mated) continue;
    if (!std::isfinite(c.similarity)) throw ValidationError("edc: non-finite similarity");
    pairs.emplace_back(std::min(rank_of(c.probe_id), rank_of(c.reference_id)),
                       c.similarity < threshold);
  }
  std::sort(pairs.begin(), pairs.end());
  // suffix counts over pairs sorted by pair rank
  std::vector<std::size_t> misses_from(pairs.size() + 1, 0);
  for (std::size_t i = pairs.size(); i-- > 0;) {
    misses_from[i] = misses_from[i + 1] + (pairs[i].second ? 1 : 0);
  }

  EdcCurve curve;
  curve.threshold = threshold;
  curve.pauc_upper = pauc_upper;
  for (double x : grid) {
    const std::size_t k = discarded_sample_count(x, qualities.size());
    const auto first = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(k, false));
    const auto start = static_cast<std::size_t>(first - pairs.begin());
    const std::size_t remaining = pairs.size() - start;
    if (remaining == 0) {
      throw DegenerateCurveError("edc: no mated comparisons left at discard fraction " +
                                 std::to_string(x));
    }
    curve.discard_fractions.push_back(x);
    curve.discarded_samples.push_back(k);
    curve.remaining_comparisons.push_back(remaining);
    curve.fnmr.push_back(static_cast<double>(misses_from[start]) / static_cast<double>(remaining));
  }
  if (pauc_upper > 0.0 && grid.back() >= pauc_upper) curve.pauc = pauc(curve, pauc_upper);
  return curve;
}

Pauc pauc(const EdcCurve& curve, double upper) {
  const auto& x = curve.discard_fractions;
  const auto& y = curve.fnmr;
  if (x.empty() || x.size() != y.size() || x.front() != 0.0) {
    throw ValidationError("pauc: curve must start at discard fraction 0");
  }
  if (!(upper > 0.0) || x.back() < upper) {
    throw ValidationError("pauc: upper bound must be positive and covered by the grid");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < x.size() && x[i - 1] < upper; ++i) {
    double x1 = x[i];
    double y1 = y[i];
    if (x1 > upper) {
      y1 = y[i - 1] + (y[i] - y[i - 1]) * (upper - x[i - 1]) / (x[i] - x[i - 1]);
      x1 = upper;
    }
    area += 0.5 * (y[i - 1] + y1) * (x1 - x[i - 1]);
  }
  return {area / upper, area};
}

std::map<std::string, ClassSummary> class_distributions(
    std::span<const std::pair<std::string, double>> class_and_quality, std::size_t bins) {
  if (bins == 0) throw ValidationError("class_distributions: need at least one bin");
  std::map<std::string, std::vector<double>> grouped;
  for (const auto& [cls, q] : class_and_quality) {
    if (!std::isfinite(q) || q < 0.0 || q > 100.0) {
      throw ValidationError("class_distributions: quality outside [0, 100] for class " + cls);
    }
    grouped[cls].push_back(q);
  }
  std::map<std::string, ClassSummary> out;
  const double width = 100.0 / static_cast<double>(bins);
  for (auto& [cls, values] : grouped) {
    ClassSummary s;
    s.count = values.size();
    s.histogram.assign(bins, 0);
    double sum = 0.0;
    for (double q : values) {
      sum += q;
      const auto b = std::min(bins - 1, static_cast<std::size_t>(q / width));
      ++s.histogram[b];
    }
    s.mean = sum / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    for (int p : kSummaryQuantiles) s.quantiles[p] = nearest_rank(values, p);
    out.emplace(cls, std::move(s));
  }
  return out;
}

}  // namespace neutrex::eval
