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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "neutrex/error.hpp"
#include "neutrex/io.hpp"
#include "neutrex/svm.hpp"

using namespace neutrex;
using namespace neutrex::svm;

namespace {

SvmModel random_model(std::mt19937_64& rng, std::size_t n_sv, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  SvmModel m;
  m.mode = Mode::two_class;
  m.gamma = 0.3;
  m.dimension = dim;
  for (std::size_t i = 0; i < n_sv * dim; ++i) m.support_vectors.push_back(g(rng));
  for (std::size_t i = 0; i < n_sv; ++i) m.dual_coefs.push_back(g(rng));
  m.intercept = g(rng);
  return m;
}

std::string fixture(const std::string& name) { return std::string(NEUTREX_FIXTURE_DIR) + "/" + name; }

}  // namespace

TEST_CASE("kernel at zero distance") {
  for (double gamma : {1e-3, 1.0, 50.0}) {
    SvmModel m{Mode::one_class, gamma, 3, {0.5, -1.0, 2.0}, {1.0}, 0.0, kReferenceNu};
    const std::vector<double> x{0.5, -1.0, 2.0};
    CHECK(decision_value(m, x) == 1.0);
  }
}

TEST_CASE("distant points decay to the intercept") {
  SvmModel m{Mode::one_class, 1.0, 2, {0.0, 0.0}, {2.5}, -0.75, kReferenceNu};
  const std::vector<double> far{1e3, -1e3};
  CHECK(decision_value(m, far) == -0.75);
  // analytic decay for one support vector
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const std::vector<double> x{r, 0.0};
    CHECK(decision_value(m, x) == doctest::Approx(2.5 * std::exp(-r * r) - 0.75).epsilon(1e-15));
  }
}

TEST_CASE("three support vectors in four dimensions match the expanded sum") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_model(rng, 3, 4);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::vector<double> x{g(rng), g(rng), g(rng), g(rng)};
    const auto& s = m.support_vectors;
    auto sq = [&](std::size_t i) {
      return (x[0] - s[i * 4 + 0]) * (x[0] - s[i * 4 + 0]) + (x[1] - s[i * 4 + 1]) * (x[1] - s[i * 4 + 1]) +
             (x[2] - s[i * 4 + 2]) * (x[2] - s[i * 4 + 2]) + (x[3] - s[i * 4 + 3]) * (x[3] - s[i * 4 + 3]);
    };
    const double want = m.dual_coefs[0] * std::exp(-m.gamma * sq(0)) +
                        m.dual_coefs[1] * std::exp(-m.gamma * sq(1)) +
                        m.dual_coefs[2] * std::exp(-m.gamma * sq(2)) + m.intercept;
    CHECK(std::abs(decision_value(m, x) - want) <= 1e-12);
  }
}

TEST_CASE("support vector order does not matter") {
  std::mt19937_64 rng(4);
  const auto m = random_model(rng, 12, 5);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  SvmModel p = m;
  for (std::size_t i = 0; i < 12; ++i) {
    p.dual_coefs[i] = m.dual_coefs[perm[i]];
    std::copy_n(m.support_vectors.begin() + static_cast<long>(perm[i] * 5), 5,
                p.support_vectors.begin() + static_cast<long>(i * 5));
  }
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> x{g(rng), g(rng), g(rng), g(rng), g(rng)};
    CHECK(std::abs(decision_value(m, x) - decision_value(p, x)) <= 1e-12);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  SvmModel m{Mode::one_class, 1.0, 2, {0.0, 0.0}, {1.0}, 0.0, kReferenceNu};
  CHECK_THROWS_AS(decision_value(m, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("svm_quality endpoints, midpoint, clipping, monotonicity") {
  const DecisionCalibration c{-1.0, 3.0, CalibrationMethod::exact(), 10};
  CHECK(svm_quality(3.0, c) == 100.0);
  CHECK(svm_quality(-1.0, c) == 0.0);
  CHECK(svm_quality(1.0, c) == 50.0);
  CHECK(svm_quality(9.0, c) == 100.0);
  CHECK(svm_quality(-9.0, c) == 0.0);
  double prev = 0.0;
  for (int i = -500; i <= 500; ++i) {
    const double q = svm_quality(i / 100.0, c);
    REQUIRE(q >= prev);
    REQUIRE(q <= 100.0);
    prev = q;
  }
}

TEST_CASE("decision calibration from training values") {
  const std::vector<double> v{0.2, -0.4, 1.1, 0.0};
  const auto c = calibrate_decisions(v);
  CHECK(c.v_min == -0.4);
  CHECK(c.v_max == 1.1);
  CHECK(c.training_sample_count == 4);
  CHECK_THROWS_AS(calibrate_decisions(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("model JSON parsing") {
  const auto m = parse_svm(R"({"mode":"two-class","gamma":0.5,"support_vectors":[[1,2],[3,4]],
                               "dual_coefs":[0.25,-0.25],"intercept":0.1})");
  CHECK(m.mode == Mode::two_class);
  CHECK(m.support_count() == 2);
  CHECK(m.dimension == 2);
  CHECK(m.support_vector(1)[0] == 3.0);
  CHECK(!m.nu.has_value());

  const auto one = parse_svm(R"({"mode":"one-class","gamma":0.5,"support_vectors":[[1]],
                                 "dual_coefs":[1],"intercept":0})");
  REQUIRE(one.nu.has_value());
  CHECK(*one.nu == kReferenceNu);

  auto error_of = [](const char* text) {
    try {
      parse_svm(text);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of(R"({"mode":"one-class","gamma":0,"support_vectors":[[1]],"dual_coefs":[1],"intercept":0})")
            .find("gamma") != std::string::npos);
  CHECK(error_of(R"({"mode":"one-class","gamma":-2,"support_vectors":[[1]],"dual_coefs":[1],"intercept":0})")
            .find("gamma") != std::string::npos);
  CHECK(error_of(R"({"mode":"one-class","gamma":1,"support_vectors":[],"dual_coefs":[],"intercept":0})") != "");
  CHECK(error_of(R"({"mode":"one-class","gamma":1,"support_vectors":[[1],[1,2]],"dual_coefs":[1,1],"intercept":0})") != "");
  CHECK(error_of(R"({"mode":"one-class","gamma":1,"support_vectors":[[1]],"dual_coefs":[1,2],"intercept":0})") != "");
  CHECK(error_of(R"({"mode":"three-class","gamma":1,"support_vectors":[[1]],"dual_coefs":[1],"intercept":0})")
            .find("mode") != std::string::npos);
  CHECK(error_of(R"({"mode":"one-class","gamma":1,"support_vectors":[[1]],"dual_coefs":[1]})")
            .find("intercept") != std::string::npos);
  CHECK(error_of("not json") != "");
}

TEST_CASE("exported scikit-learn models reproduce the trainer's decision values") {
  const auto one = load_svm(fixture("svm_one_class.json"));
  const auto two = load_svm(fixture("svm_two_class.json"));
  const auto points = io::read_embeddings_jsonl(fixture("svm_heldout.jsonl"));
  const auto expected = io::read_csv(fixture("svm_expected.csv"));
  REQUIRE(points.size() == 20);
  REQUIRE(expected.rows.size() == 20);
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(points[i].sample_id == expected.rows[i][0]);
    CHECK(std::abs(decision_value(one, points[i].vector) - std::stod(expected.rows[i][1])) <= 1e-8);
    CHECK(std::abs(decision_value(two, points[i].vector) - std::stod(expected.rows[i][2])) <= 1e-8);
  }
}
