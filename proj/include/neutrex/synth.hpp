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

// Seeded synthetic data: toy assets, a procedural head model with FLAME
// topology sizes (5,023 vertices, 5 joints), expression-class codes and
// comparison scores. Everything is a pure function of the seed.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "neutrex/evaluation.hpp"
#include "neutrex/model.hpp"

namespace neutrex::synth {

using Rng = std::mt19937_64;

/// Random 4-vertex asset (two triangles) with the standard 5-joint
/// hierarchy. Bases, regressor and skin weights are dense and random.
AssetArrays random_toy_arrays(Rng& rng, std::size_t n_beta = 2, std::size_t n_psi = 2);

inline constexpr std::size_t kHeadVertexCount = 5023;

struct HeadOptions {
  std::size_t n_beta = 100;
  std::size_t n_psi = 50;
  std::uint64_t seed = 1;
};

struct HeadModel {
  ModelAssets assets;
  /// Vertex indices of the lower front face (mouth and chin), derived from
  /// the template geometry alone.
  std::vector<std::uint32_t> mouth_chin_mask;
};

HeadModel make_head_model(const HeadOptions& options = {});

enum class Expression { neutral, happy, surprise, squint, disgust, scream };
std::string_view to_string(Expression e);
inline constexpr Expression kAllExpressions[] = {Expression::neutral, Expression::happy,
                                                 Expression::surprise, Expression::squint,
                                                 Expression::disgust, Expression::scream};

/// A random code of the given class; `intensity` in [0, 1] scales the class
/// displacement. Shape and global rotation are random. Expression
/// components 0..4 of the head model carry the class semantics (mouth open,
/// smile, brow raise, squint, nose wrinkle); smaller models use what fits.
ParamCode sample_code(const ModelAssets& assets, Expression e, double intensity, Rng& rng,
                      std::string sample_id);

/// Wide-open jaw with the mouth-open and brow components active.
ParamCode scream_code(const ModelAssets& assets, std::string sample_id = "scream");

struct DatasetOptions {
  std::uint64_t seed = 1;
  std::size_t neutral_training = 200;
  std::size_t mixed_training = 300;
  std::size_t subjects = 20;
  std::size_t samples_per_subject = 5;
  std::size_t mated = 500;
  std::size_t nonmated = 2000;
};

struct Dataset {
  std::vector<ParamCode> neutral_codes;
  std::vector<ParamCode> training_codes;
  std::vector<ParamCode> codes;
  std::vector<std::pair<std::string, std::string>> labels;  // sample_id, class
  std::vector<eval::ComparisonRecord> comparisons;
};

Dataset make_dataset(const ModelAssets& assets, const DatasetOptions& options);

}  // namespace neutrex::synth
