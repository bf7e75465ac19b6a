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

#include "neutrex/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "neutrex/error.hpp"
#include "neutrex/format.hpp"

namespace neutrex::io {
namespace {

using nlohmann::json;

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, line_no);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
}

std::vector<double> number_array(const json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field)) throw ValidationError(where + "missing field '" + field + "'");
  const auto& a = j.at(field);
  if (!a.is_array()) throw ValidationError(where + "field '" + field + "' must be an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) {
    if (!v.is_number()) throw ValidationError(where + "field '" + field + "' must contain numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(where + "field '" + field + "' has a non-finite entry");
    out.push_back(x);
  }
  return out;
}

std::string string_field(const json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw ValidationError(where + "field '" + field + "' must be a string");
  }
  return j.at(field).get<std::string>();
}

double number_field(const json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field) || !j.at(field).is_number()) {
    throw ValidationError(where + "field '" + field + "' must be a number");
  }
  const double v = j.at(field).get<double>();
  if (!std::isfinite(v)) throw ValidationError(where + "field '" + field + "' is not finite");
  return v;
}

std::size_t count_field(const json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field) || !j.at(field).is_number_unsigned()) {
    throw ValidationError(where + "field '" + field + "' must be a nonnegative integer");
  }
  return j.at(field).get<std::size_t>();
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(where + "invalid JSON: " + e.what());
  }
}

json doubles(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ValidationError("unterminated quoted CSV field");
  out.push_back(std::move(field));
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ValidationError("CSV has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable table;
  bool have_header = false;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const ValidationError& e) {
      throw ValidationError(at_line(source, line_no) + e.what());
    }
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      return;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError(at_line(source, line_no) + "expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  });
  if (!have_header) throw ValidationError(source + ": empty CSV (no header)");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

std::vector<ParamCode> parse_codes_jsonl(std::string_view text, const std::string& source) {
  std::vector<ParamCode> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const std::string where = at_line(source, line_no);
    const json j = parse_json(line, where);
    if (!j.is_object()) throw ValidationError(where + "expected a JSON object");
    ParamCode code;
    code.sample_id = string_field(j, "sample_id", where);
    code.beta = number_array(j, "beta", where);
    code.psi = number_array(j, "psi", where);
    const auto pose = number_array(j, "pose", where);
    if (pose.size() != kPoseCodeSize) {
      throw ValidationError(where + "field 'pose' must have 6 entries, got " + std::to_string(pose.size()));
    }
    std::copy(pose.begin(), pose.end(), code.pose.begin());
    out.push_back(std::move(code));
  });
  return out;
}

std::vector<ParamCode> read_codes_jsonl(const std::filesystem::path& path) {
  return parse_codes_jsonl(read_text(path), path.string());
}

std::string format_code_jsonl(const ParamCode& code) {
  json j = json::object();
  j["sample_id"] = code.sample_id;
  j["beta"] = doubles(code.beta);
  j["pose"] = doubles(code.pose);
  j["psi"] = doubles(code.psi);
  return j.dump();
}

void write_codes_jsonl(const std::filesystem::path& path, std::span<const ParamCode> codes) {
  std::string text;
  for (const auto& c : codes) {
    text += format_code_jsonl(c);
    text += '\n';
  }
  write_text(path, text);
}

std::string format_calibration(const Calibration& c) {
  nlohmann::ordered_json j;
  j["d_min"] = c.d_min;
  j["d_max"] = c.d_max;
  j["method"] = c.method.to_string();
  j["training_sample_count"] = c.training_sample_count;
  return j.dump(2) + "\n";
}

Calibration parse_calibration(std::string_view text, const std::string& source) {
  const std::string where = source + ": ";
  const json j = parse_json(text, where);
  if (!j.is_object()) throw ValidationError(where + "expected a JSON object");
  Calibration c;
  c.d_min = number_field(j, "d_min", where);
  c.d_max = number_field(j, "d_max", where);
  c.method = CalibrationMethod::parse(string_field(j, "method", where));
  c.training_sample_count = count_field(j, "training_sample_count", where);
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
  return c;
}

Calibration read_calibration(const std::filesystem::path& path) {
  return parse_calibration(read_text(path), path.string());
}

void write_calibration(const std::filesystem::path& path, const Calibration& c) {
  write_text(path, format_calibration(c));
}

std::string format_decision_calibration(const svm::DecisionCalibration& c) {
  nlohmann::ordered_json j;
  j["v_min"] = c.v_min;
  j["v_max"] = c.v_max;
  j["method"] = c.method.to_string();
  j["training_sample_count"] = c.training_sample_count;
  return j.dump(2) + "\n";
}

svm::DecisionCalibration read_decision_calibration(const std::filesystem::path& path) {
  const std::string where = path.string() + ": ";
  const json j = parse_json(read_text(path), where);
  if (!j.is_object()) throw ValidationError(where + "expected a JSON object");
  svm::DecisionCalibration c;
  c.v_min = number_field(j, "v_min", where);
  c.v_max = number_field(j, "v_max", where);
  c.method = CalibrationMethod::parse(string_field(j, "method", where));
  c.training_sample_count = count_field(j, "training_sample_count", where);
  c.validate();
  return c;
}

std::string format_anchor(const NeutralAnchor& anchor) {
  nlohmann::ordered_json j;
  j["psi_a"] = doubles(anchor.psi_a);
  j["jaw"] = doubles(anchor.jaw);
  j["jaw_policy"] = {{"normalization", std::string(to_string(anchor.jaw_policy.normalization))},
                     {"anchor_jaw", std::string(to_string(anchor.jaw_policy.anchor))}};
  j["source_count"] = anchor.source_count;
  j["n_psi"] = anchor.psi_a.size();
  return j.dump(2) + "\n";
}

NeutralAnchor read_anchor(const ModelAssets& assets, const std::filesystem::path& path) {
  const std::string where = path.string() + ": ";
  const json j = parse_json(read_text(path), where);
  if (!j.is_object()) throw ValidationError(where + "expected a JSON object");
  auto psi = number_array(j, "psi_a", where);
  const auto jaw = number_array(j, "jaw", where);
  if (jaw.size() != 3) throw ValidationError(where + "field 'jaw' must have 3 entries");
  JawPolicy policy;
  if (j.contains("jaw_policy")) {
    const auto& p = j.at("jaw_policy");
    if (!p.is_object()) throw ValidationError(where + "field 'jaw_policy' must be an object");
    policy.normalization = parse_jaw_handling(string_field(p, "normalization", where));
    policy.anchor = parse_anchor_jaw(string_field(p, "anchor_jaw", where));
  }
  const std::size_t count = count_field(j, "source_count", where);
  try {
    return make_anchor(assets, std::move(psi), {jaw[0], jaw[1], jaw[2]}, count, policy);
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
}

std::string format_scores_csv(std::span<const QualityScore> scores) {
  std::string out = "sample_id,raw_distance,neutrex\n";
  for (const auto& s : scores) {
    out += csv_field(s.sample_id) + "," + format_double(s.raw_distance) + "," +
           format_double(s.neutrex) + "\n";
  }
  return out;
}

std::string format_svm_scores_csv(std::span<const SvmScore> scores) {
  std::string out = "sample_id,decision_value,quality\n";
  for (const auto& s : scores) {
    out += csv_field(s.sample_id) + "," + format_double(s.decision_value) + "," +
           format_double(s.quality) + "\n";
  }
  return out;
}

std::map<std::string, double> read_quality_column(const std::filesystem::path& path,
                                                  std::string_view column) {
  const CsvTable t = read_csv(path);
  const std::size_t id_col = t.column("sample_id");
  const std::size_t q_col = t.column(column);
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = at_line(path.string(), t.line_numbers[r]);
    const double q = parse_double(t.rows[r][q_col], where + "column " + std::string(column));
    if (!std::isfinite(q)) throw ValidationError(where + "non-finite quality");
    if (!out.emplace(t.rows[r][id_col], q).second) {
      throw ValidationError(where + "duplicate sample_id '" + t.rows[r][id_col] + "'");
    }
  }
  return out;
}

std::vector<svm::Embedding> parse_embeddings_jsonl(std::string_view text, const std::string& source) {
  std::vector<svm::Embedding> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const std::string where = at_line(source, line_no);
    const json j = parse_json(line, where);
    if (!j.is_object()) throw ValidationError(where + "expected a JSON object");
    out.push_back({string_field(j, "sample_id", where), number_array(j, "vector", where)});
  });
  return out;
}

std::vector<svm::Embedding> read_embeddings_jsonl(const std::filesystem::path& path) {
  return parse_embeddings_jsonl(read_text(path), path.string());
}

std::string format_embedding_jsonl(const svm::Embedding& e) {
  json j = json::object();
  j["sample_id"] = e.sample_id;
  j["vector"] = doubles(e.vector);
  return j.dump();
}

std::vector<eval::ComparisonRecord> read_comparisons(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t probe = t.column("probe_id");
  const std::size_t ref = t.column("reference_id");
  const std::size_t sim = t.column("similarity");
  const std::size_t mated = t.column("mated");
  std::vector<eval::ComparisonRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = at_line(path.string(), t.line_numbers[r]);
    if (row[probe].empty() || row[ref].empty()) throw ValidationError(where + "empty id");
    const double s = parse_double(row[sim], where + "similarity");
    if (!std::isfinite(s)) throw ValidationError(where + "non-finite similarity");
    if (row[mated] != "0" && row[mated] != "1") throw ValidationError(where + "mated must be 0 or 1");
    out.push_back({row[probe], row[ref], s, row[mated] == "1"});
  }
  return out;
}

std::string format_comparisons_csv(std::span<const eval::ComparisonRecord> records) {
  std::string out = "probe_id,reference_id,similarity,mated\n";
  for (const auto& c : records) {
    out += csv_field(c.probe_id) + "," + csv_field(c.reference_id) + "," +
           format_double(c.similarity) + "," + (c.mated ? "1" : "0") + "\n";
  }
  return out;
}

std::map<std::string, std::string> read_labels(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t id = t.column("sample_id");
  const std::size_t label = t.column("label");
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!out.emplace(t.rows[r][id], t.rows[r][label]).second) {
      throw ValidationError(at_line(path.string(), t.line_numbers[r]) + "duplicate sample_id");
    }
  }
  return out;
}

std::string format_ply(const FaceMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  const std::size_t nf = mesh.faces ? mesh.faces->size() : 0;
  if (mesh.per_vertex_scalar && mesh.per_vertex_scalar->size() != nv) {
    throw ValidationError("ply: scalar channel length does not match vertex count");
  }
  std::string out;
  out.reserve(64 * (nv + nf) + 256);
  out += "ply\nformat ascii 1.0\ncomment per-vertex quality = residual to the neutral anchor\n";
  out += "element vertex " + std::to_string(nv) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nproperty float quality\n";
  out += "element face " + std::to_string(nf) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  char buf[128];
  for (std::size_t v = 0; v < nv; ++v) {
    const double q = mesh.per_vertex_scalar ? (*mesh.per_vertex_scalar)[v] : 0.0;
    const auto& p = mesh.vertices[v];
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g\n", p[0], p[1], p[2], q);
    out += buf;
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& face = (*mesh.faces)[f];
    std::snprintf(buf, sizeof(buf), "3 %u %u %u\n", face[0], face[1], face[2]);
    out += buf;
  }
  return out;
}

void write_ply(const std::filesystem::path& path, const FaceMesh& mesh) {
  write_text(path, format_ply(mesh));
}

}  // namespace neutrex::io
