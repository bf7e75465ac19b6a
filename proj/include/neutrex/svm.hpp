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

// RBF-SVM baselines scored from exported decision functions.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neutrex/neutrality.hpp"

namespace neutrex::svm {

enum class Mode { one_class, two_class };

/// Nu used for the one-class reference models; recorded, never used at
/// inference.
inline constexpr double kReferenceNu = 0.05;

struct SvmModel {
  Mode mode = Mode::one_class;
  double gamma = 1.0;
  std::size_t dimension = 0;
  std::vector<double> support_vectors;  // n_sv x dimension, row-major
  std::vector<double> dual_coefs;
  double intercept = 0.0;
  std::optional<double> nu;

  std::size_t support_count() const { return dual_coefs.size(); }
  std::span<const double> support_vector(std::size_t i) const {
    return std::span<const double>(support_vectors).subspan(i * dimension, dimension);
  }
  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct Embedding {
  std::string sample_id;
  std::vector<double> vector;
};

/// sum_i dual_coefs[i] * exp(-gamma * |x - sv_i|^2) + intercept, summed in
/// support-vector order. Positive means the neutral side.
double decision_value(const SvmModel& model, std::span<const double> x);

/// Decision-value range for the quality mapping.
struct DecisionCalibration {
  double v_min = 0.0;
  double v_max = 1.0;
  CalibrationMethod method;
  std::size_t training_sample_count = 0;

  void validate() const;
};

DecisionCalibration calibrate_decisions(std::span<const double> training_values,
                                        const CalibrationMethod& method = CalibrationMethod::exact());

/// 100 * clip((value - v_min) / (v_max - v_min), 0, 1). Larger decision
/// values (deeper in the neutral cluster) give higher quality.
double svm_quality(double value, const DecisionCalibration& calib);

SvmModel parse_svm(const std::string& json_text);
SvmModel load_svm(const std::filesystem::path& path);

}  // namespace neutrex::svm
