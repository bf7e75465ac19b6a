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

// Evaluation harness: neutral/non-neutral DET curves with D-EER, and
// error-vs-discard characteristics with partial area under the curve.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace neutrex::eval {

enum class Label { neutral, non_neutral };

struct LabeledScore {
  std::string sample_id;
  double quality = 0.0;
  Label label = Label::neutral;
};

struct ComparisonRecord {
  std::string probe_id;
  std::string reference_id;
  double similarity = 0.0;
  bool mated = true;
};

struct DetPoint {
  double threshold = 0.0;
  /// Neutral samples with quality < threshold.
  double false_non_neutral_rate = 0.0;
  /// Non-neutral samples with quality >= threshold.
  double false_neutral_rate = 0.0;
};

struct DetCurve {
  std::vector<DetPoint> points;  // thresholds ascending, last one is +inf
  double d_eer = 0.0;
};

/// Sweeps thresholds over the observed quality values. The D-EER is the
/// crossing of the two rate curves, linearly interpolated between adjacent
/// operating points. Throws ValidationError unless both classes are present.
DetCurve det_curve(std::span<const LabeledScore> scores);

/// Smallest threshold t such that the fraction of non-mated similarities
/// >= t is at most target_fmr: the value just above the (n - k)-th smallest
/// score where k = floor(target_fmr * n).
double threshold_from_fmr(std::span<const double> nonmated_similarities, double target_fmr);

/// Fraction of mated similarities strictly below the threshold. Throws
/// DegenerateCurveError on an empty list.
double fnmr_at_threshold(std::span<const double> mated_similarities, double threshold);

/// Number of samples dropped at discard fraction x out of n, floor(x * n)
/// with a small tolerance for grid values such as 0.29.
std::size_t discarded_sample_count(double fraction, std::size_t sample_count);

/// 0.00, 0.01, ..., 0.30.
std::vector<double> default_discard_grid();
inline constexpr double kMaxDiscardFraction = 0.98;
inline constexpr double kDefaultPaucUpper = 0.30;
inline constexpr double kDefaultTargetFmr = 0.001;

struct Pauc {
  double normalized = 0.0;  // area / upper, i.e. average FNMR over [0, upper]
  double raw = 0.0;
};

struct EdcCurve {
  std::vector<double> discard_fractions;
  std::vector<double> fnmr;
  std::vector<std::size_t> discarded_samples;
  std::vector<std::size_t> remaining_comparisons;
  double threshold = 0.0;
  std::optional<Pauc> pauc;  // set when the grid reaches the pAUC bound
  double pauc_upper = kDefaultPaucUpper;
};

/// Drops the lowest-quality fraction of samples (ties broken by sample_id),
/// then every mated comparison touching a dropped sample, and measures FNMR
/// on the survivors. Non-mated records are ignored. The grid must start at
/// 0, increase strictly and stay <= kMaxDiscardFraction.
EdcCurve edc(const std::map<std::string, double>& qualities,
             std::span<const ComparisonRecord> comparisons, double threshold,
             std::span<const double> grid, double pauc_upper = kDefaultPaucUpper);

/// Trapezoidal area of the curve over [0, upper] (the curve is linearly
/// interpolated at `upper` when it falls between grid points).
Pauc pauc(const EdcCurve& curve, double upper = kDefaultPaucUpper);

struct ClassSummary {
  std::size_t count = 0;
  double mean = 0.0;
  std::map<int, double> quantiles;    // percent -> nearest-rank quantile
  std::vector<std::size_t> histogram;  // equal-width bins over [0, 100]
};

inline constexpr int kSummaryQuantiles[] = {5, 25, 50, 75, 95};

/// Per-class histograms and summary statistics of quality values.
std::map<std::string, ClassSummary> class_distributions(
    std::span<const std::pair<std::string, double>> class_and_quality, std::size_t bins = 20);

}  // namespace neutrex::eval
