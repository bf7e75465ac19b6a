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

#include "neutrex/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "neutrex/error.hpp"

namespace neutrex::svm {
namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw ValidationError("svm model: field '" + field + "': " + what);
}

double finite_number(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) bad_field(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad_field(field, "non-finite value");
  return v;
}

}  // namespace

void SvmModel::validate() const {
  if (dual_coefs.empty()) bad_field("dual_coefs", "need at least one support vector");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) bad_field("gamma", "must be finite and > 0");
  if (dimension == 0) bad_field("support_vectors", "zero-dimensional support vectors");
  if (support_vectors.size() != dual_coefs.size() * dimension) {
    bad_field("support_vectors", "count does not match dual_coefs");
  }
  for (double v : support_vectors) {
    if (!std::isfinite(v)) bad_field("support_vectors", "non-finite value");
  }
  for (double v : dual_coefs) {
    if (!std::isfinite(v)) bad_field("dual_coefs", "non-finite value");
  }
  if (!std::isfinite(intercept)) bad_field("intercept", "non-finite value");
  if (nu && !(*nu > 0.0 && *nu <= 1.0)) bad_field("nu", "must be in (0, 1]");
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension) {
    throw ValidationError("svm: embedding has " + std::to_string(x.size()) +
                          " dimensions, model expects " + std::to_string(model.dimension));
  }
  double f = 0.0;
  for (std::size_t i = 0; i < model.support_count(); ++i) {
    const auto sv = model.support_vector(i);
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - sv[k];
      sq += d * d;
    }
    f += model.dual_coefs[i] * std::exp(-model.gamma * sq);
  }
  return f + model.intercept;
}

void DecisionCalibration::validate() const {
  if (!std::isfinite(v_min) || !std::isfinite(v_max) || !(v_min < v_max)) {
    throw ValidationError("svm calibration: need finite v_min < v_max");
  }
}

DecisionCalibration calibrate_decisions(std::span<const double> training_values,
                                        const CalibrationMethod& method) {
  const auto [lo, hi] = empirical_range(training_values, method);
  return {lo, hi, method, training_values.size()};
}

double svm_quality(double value, const DecisionCalibration& calib) {
  if (!std::isfinite(value)) throw ValidationError("svm_quality: non-finite decision value");
  const double u = (value - calib.v_min) / (calib.v_max - calib.v_min);
  return 100.0 * std::clamp(u, 0.0, 1.0);
}

SvmModel parse_svm(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("svm model: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("svm model: expected a JSON object");

  SvmModel m;
  for (const char* field : {"mode", "gamma", "support_vectors", "dual_coefs", "intercept"}) {
    if (!j.contains(field)) bad_field(field, "missing");
  }
  if (!j["mode"].is_string()) bad_field("mode", "expected a string");
  const auto mode = j["mode"].get<std::string>();
  if (mode == "one-class") {
    m.mode = Mode::one_class;
  } else if (mode == "two-class") {
    m.mode = Mode::two_class;
  } else {
    bad_field("mode", "expected one-class or two-class, got '" + mode + "'");
  }
  m.gamma = finite_number(j["gamma"], "gamma");
  m.intercept = finite_number(j["intercept"], "intercept");
  if (j.contains("nu") && !j["nu"].is_null()) m.nu = finite_number(j["nu"], "nu");
  if (m.mode == Mode::one_class && !m.nu) m.nu = kReferenceNu;

  const auto& svs = j["support_vectors"];
  if (!svs.is_array() || svs.empty()) bad_field("support_vectors", "expected a non-empty array");
  m.dimension = svs[0].is_array() ? svs[0].size() : 0;
  for (const auto& row : svs) {
    if (!row.is_array() || row.size() != m.dimension) {
      bad_field("support_vectors", "rows must be arrays of equal length");
    }
    for (const auto& v : row) m.support_vectors.push_back(finite_number(v, "support_vectors"));
  }
  const auto& coefs = j["dual_coefs"];
  if (!coefs.is_array()) bad_field("dual_coefs", "expected an array");
  for (const auto& v : coefs) m.dual_coefs.push_back(finite_number(v, "dual_coefs"));
  m.validate();
  return m;
}

SvmModel load_svm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open svm model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_svm(ss.str());
}

}  // namespace neutrex::svm
