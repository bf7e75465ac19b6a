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

// File formats: JSON-Lines inputs, JSON parameter files, CSV tables and the
// ASCII PLY residual export. Readers throw IoError when a file cannot be
// opened and ValidationError (with file and line) on malformed content.

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neutrex/evaluation.hpp"
#include "neutrex/model.hpp"
#include "neutrex/neutrality.hpp"
#include "neutrex/svm.hpp"

namespace neutrex::io {

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate, write, check.
void write_text(const std::filesystem::path& path, std::string_view text);

// --- CSV -------------------------------------------------------------------

/// Splits one CSV record; supports double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);
/// Quotes a field when it contains a separator, quote or newline.
std::string csv_field(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Index of a named column; throws ValidationError when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

// --- Parameter codes (JSONL) -----------------------------------------------

/// {"sample_id": str, "beta": [...], "pose": [6], "psi": [...]} per line;
/// blank lines are skipped.
std::vector<ParamCode> parse_codes_jsonl(std::string_view text, const std::string& source);
std::vector<ParamCode> read_codes_jsonl(const std::filesystem::path& path);
std::string format_code_jsonl(const ParamCode& code);
void write_codes_jsonl(const std::filesystem::path& path, std::span<const ParamCode> codes);

// --- Calibration / anchor files --------------------------------------------

std::string format_calibration(const Calibration& c);
Calibration parse_calibration(std::string_view text, const std::string& source);
Calibration read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const Calibration& c);

std::string format_decision_calibration(const svm::DecisionCalibration& c);
svm::DecisionCalibration read_decision_calibration(const std::filesystem::path& path);

/// Anchor JSON: {"psi_a": [...], "jaw": [3], "jaw_policy": {"normalization",
/// "anchor_jaw"}, "source_count": n, "n_psi": n}.
std::string format_anchor(const NeutralAnchor& anchor);
NeutralAnchor read_anchor(const ModelAssets& assets, const std::filesystem::path& path);

// --- Scores ----------------------------------------------------------------

/// sample_id,raw_distance,neutrex
std::string format_scores_csv(std::span<const QualityScore> scores);

struct SvmScore {
  std::string sample_id;
  double decision_value = 0.0;
  double quality = 0.0;
};
/// sample_id,decision_value,quality
std::string format_svm_scores_csv(std::span<const SvmScore> scores);

/// sample_id -> value of `column` from any CSV with a sample_id column.
std::map<std::string, double> read_quality_column(const std::filesystem::path& path,
                                                  std::string_view column);

std::vector<svm::Embedding> parse_embeddings_jsonl(std::string_view text, const std::string& source);
std::vector<svm::Embedding> read_embeddings_jsonl(const std::filesystem::path& path);
std::string format_embedding_jsonl(const svm::Embedding& e);

// --- Evaluation inputs -----------------------------------------------------

/// probe_id,reference_id,similarity,mated (mated in {0,1}).
std::vector<eval::ComparisonRecord> read_comparisons(const std::filesystem::path& path);
std::string format_comparisons_csv(std::span<const eval::ComparisonRecord> records);

/// sample_id,label; label is kept verbatim (class name).
std::map<std::string, std::string> read_labels(const std::filesystem::path& path);

// --- Mesh export -------------------------------------------------------------

/// ASCII PLY: x y z quality per vertex (quality = per_vertex_scalar, or 0
/// when absent) followed by triangle faces.
std::string format_ply(const FaceMesh& mesh);
void write_ply(const std::filesystem::path& path, const FaceMesh& mesh);

}  // namespace neutrex::io
