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

#include "neutrex/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "neutrex/error.hpp"
#include "neutrex/evaluation.hpp"
#include "neutrex/format.hpp"
#include "neutrex/io.hpp"
#include "neutrex/neutrality.hpp"
#include "neutrex/parallel.hpp"
#include "neutrex/svm.hpp"
#include "neutrex/synth.hpp"

namespace neutrex::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  // shared
  std::string assets;
  std::string anchor;
  std::string calibration;
  std::string codes;
  std::string out;
  unsigned workers = 0;
  std::string jaw = "retain";
  std::string anchor_jaw = "mean";
  std::string reduction = "mean";
  std::string method = "exact-extrema";
  // anchor
  std::string mesh_out;
  // calibrate
  std::string distances;
  std::string svm_model;
  std::string embeddings;
  // residuals
  std::string sample_id;
  // evaluation
  std::string qualities;
  std::string column = "neutrex";
  std::string comparisons;
  std::string labels;
  std::string summary;
  std::string distributions;
  std::size_t bins = 20;
  double target_fmr = eval::kDefaultTargetFmr;
  std::optional<double> threshold;
  std::string grid;
  double pauc_upper = eval::kDefaultPaucUpper;
  // synth
  std::uint64_t seed = 1;
  std::string out_dir;
  std::size_t n_beta = 100;
  std::size_t n_psi = 50;
  synth::DatasetOptions dataset;
};

void require_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError("missing required path for " + what);
  if (!fs::is_regular_file(path)) throw IoError(what + " not found: " + path);
}

void require_output(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError("missing output path for " + what);
  if (path == "-") return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("output directory for " + what + " does not exist: " + parent.string());
  }
}

void emit(const std::string& path, std::string_view text, std::ostream& out) {
  if (path == "-") {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) return eval::default_discard_grid();
  std::vector<double> grid;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto second = text.find(':', colon + 1);
    if (second == std::string::npos) throw ValidationError("--grid: expected start:stop:step");
    const double start = parse_double(text.substr(0, colon), "--grid");
    const double stop = parse_double(text.substr(colon + 1, second - colon - 1), "--grid");
    const double step = parse_double(text.substr(second + 1), "--grid");
    if (!(step > 0.0) || !(stop > start)) throw ValidationError("--grid: need start < stop, step > 0");
    const auto n = static_cast<std::size_t>(std::llround((stop - start) / step));
    for (std::size_t i = 0; i <= n; ++i) {
      grid.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(n));
    }
    return grid;
  }
  for (const auto& field : io::split_csv_line(text)) grid.push_back(parse_double(field, "--grid"));
  return grid;
}

JawPolicy jaw_policy(const RunConfig& c) {
  return {parse_jaw_handling(c.jaw), parse_anchor_jaw(c.anchor_jaw)};
}

fs::path mesh_path_for(const RunConfig& c) {
  if (!c.mesh_out.empty()) return c.mesh_out;
  fs::path p(c.out);
  p.replace_extension(".ply");
  return p;
}

// --- subcommands -------------------------------------------------------------

void cmd_anchor(const RunConfig& c, std::ostream& out) {
  require_input(c.assets, "assets");
  require_input(c.codes, "neutral codes");
  require_output(c.out, "anchor");
  if (c.out == "-" && c.mesh_out.empty()) throw ValidationError("anchor: --mesh-out is required when --out is -");
  const auto policy = jaw_policy(c);
  const ModelAssets assets = ModelAssets::load(c.assets);
  const auto codes = io::read_codes_jsonl(c.codes);
  const NeutralAnchor anchor = build_anchor(assets, codes, policy);
  emit(c.out, io::format_anchor(anchor), out);
  io::write_ply(mesh_path_for(c), anchor.mesh);
}

std::vector<double> decision_values(const svm::SvmModel& model,
                                    std::span<const svm::Embedding> embeddings, unsigned workers) {
  std::vector<double> values(embeddings.size());
  parallel_for(embeddings.size(), workers, [&](std::size_t i) {
    values[i] = svm::decision_value(model, embeddings[i].vector);
  });
  return values;
}

void cmd_calibrate(const RunConfig& c, std::ostream& out) {
  require_output(c.out, "calibration");
  const auto method = CalibrationMethod::parse(c.method);
  if (!c.svm_model.empty()) {
    require_input(c.svm_model, "svm model");
    require_input(c.embeddings, "training embeddings");
    const auto model = svm::load_svm(c.svm_model);
    const auto embeddings = io::read_embeddings_jsonl(c.embeddings);
    const auto values = decision_values(model, embeddings, c.workers);
    emit(c.out, io::format_decision_calibration(svm::calibrate_decisions(values, method)), out);
    return;
  }
  std::vector<double> distances;
  if (!c.distances.empty()) {
    require_input(c.distances, "distances");
    for (const auto& [id, d] : io::read_quality_column(c.distances, "raw_distance")) {
      distances.push_back(d);
    }
  } else {
    require_input(c.assets, "assets");
    require_input(c.anchor, "anchor");
    require_input(c.codes, "training codes");
    const ModelAssets assets = ModelAssets::load(c.assets);
    const NeutralAnchor anchor = io::read_anchor(assets, c.anchor);
    const auto codes = io::read_codes_jsonl(c.codes);
    const auto reduction = parse_distance_reduction(c.reduction);
    distances.resize(codes.size());
    parallel_for(codes.size(), c.workers, [&](std::size_t i) {
      distances[i] = code_distance(assets, anchor, codes[i], reduction);
    });
  }
  emit(c.out, io::format_calibration(calibrate(distances, method)), out);
}

void cmd_score(const RunConfig& c, std::ostream& out) {
  require_input(c.assets, "assets");
  require_input(c.anchor, "anchor");
  require_input(c.calibration, "calibration");
  require_input(c.codes, "codes");
  require_output(c.out, "scores");
  const ScoringOptions options{parse_distance_reduction(c.reduction)};
  const ModelAssets assets = ModelAssets::load(c.assets);
  const NeutralAnchor anchor = io::read_anchor(assets, c.anchor);
  const Calibration calib = io::read_calibration(c.calibration);
  const auto codes = io::read_codes_jsonl(c.codes);
  const auto scores = score_batch(assets, anchor, calib, codes, options, c.workers);
  emit(c.out, io::format_scores_csv(scores), out);
}

void cmd_residuals(const RunConfig& c, std::ostream& out) {
  require_input(c.assets, "assets");
  require_input(c.anchor, "anchor");
  require_input(c.codes, "code");
  require_output(c.out, "residual mesh");
  const ModelAssets assets = ModelAssets::load(c.assets);
  const NeutralAnchor anchor = io::read_anchor(assets, c.anchor);
  const auto codes = io::read_codes_jsonl(c.codes);
  if (codes.empty()) throw ValidationError("residuals: no code in " + c.codes);
  const ParamCode* code = &codes.front();
  if (!c.sample_id.empty()) {
    code = nullptr;
    for (const auto& candidate : codes) {
      if (candidate.sample_id == c.sample_id) {
        code = &candidate;
        break;
      }
    }
    if (!code) throw ValidationError("residuals: no sample '" + c.sample_id + "' in " + c.codes);
  }
  FaceMesh mesh = decode(assets, normalize_code(*code, anchor.jaw_policy.normalization));
  mesh.per_vertex_scalar = per_vertex_residuals(mesh, anchor);
  emit(c.out, io::format_ply(mesh), out);
}

double resolve_threshold(const RunConfig& c, std::span<const eval::ComparisonRecord> records,
                         ordered_json& config) {
  if (c.threshold) {
    config["threshold_policy"] = "explicit";
    return *c.threshold;
  }
  std::vector<double> nonmated;
  for (const auto& r : records) {
    if (!r.mated) nonmated.push_back(r.similarity);
  }
  config["threshold_policy"] = "target_fmr";
  config["target_fmr"] = c.target_fmr;
  return eval::threshold_from_fmr(nonmated, c.target_fmr);
}

void cmd_edc(const RunConfig& c, std::ostream& out) {
  require_input(c.qualities, "qualities");
  require_input(c.comparisons, "comparisons");
  require_output(c.out, "edc curve");
  if (!c.summary.empty()) require_output(c.summary, "edc summary");
  const auto grid = parse_grid(c.grid);
  const auto qualities = io::read_quality_column(c.qualities, c.column);
  const auto records = io::read_comparisons(c.comparisons);

  ordered_json config;
  config["quality_column"] = c.column;
  const double threshold = resolve_threshold(c, records, config);
  const auto curve = eval::edc(qualities, records, threshold, grid, c.pauc_upper);

  std::string csv = "discard_fraction,fnmr,discarded_samples,remaining_comparisons\n";
  for (std::size_t i = 0; i < curve.fnmr.size(); ++i) {
    csv += format_double(curve.discard_fractions[i]) + "," + format_double(curve.fnmr[i]) + "," +
           std::to_string(curve.discarded_samples[i]) + "," +
           std::to_string(curve.remaining_comparisons[i]) + "\n";
  }
  emit(c.out, csv, out);

  if (!c.summary.empty()) {
    config["pauc_upper"] = c.pauc_upper;
    config["grid"] = grid;
    config["pair_quality"] = "min";
    ordered_json s;
    if (curve.pauc) {
      s["pauc"] = curve.pauc->normalized;
      s["pauc_raw"] = curve.pauc->raw;
    } else {
      s["pauc"] = nullptr;
      s["pauc_raw"] = nullptr;
    }
    s["threshold"] = threshold;
    s["samples"] = qualities.size();
    s["config"] = config;
    emit(c.summary, s.dump(2) + "\n", out);
  }
}

void cmd_det(const RunConfig& c, std::ostream& out) {
  require_input(c.qualities, "qualities");
  require_input(c.labels, "labels");
  require_output(c.out, "det curve");
  if (!c.summary.empty()) require_output(c.summary, "det summary");
  if (!c.distributions.empty()) require_output(c.distributions, "class distributions");
  const auto qualities = io::read_quality_column(c.qualities, c.column);
  const auto labels = io::read_labels(c.labels);

  std::vector<eval::LabeledScore> scores;
  std::vector<std::pair<std::string, double>> by_class;
  for (const auto& [id, q] : qualities) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw ValidationError("det: no label for sample '" + id + "'");
    const auto label = it->second == "neutral" ? eval::Label::neutral : eval::Label::non_neutral;
    scores.push_back({id, q, label});
    by_class.emplace_back(it->second, q);
  }
  const auto curve = eval::det_curve(scores);

  std::string csv = "threshold,false_non_neutral_rate,false_neutral_rate\n";
  for (const auto& p : curve.points) {
    csv += format_double(p.threshold) + "," + format_double(p.false_non_neutral_rate) + "," +
           format_double(p.false_neutral_rate) + "\n";
  }
  emit(c.out, csv, out);

  if (!c.summary.empty()) {
    std::size_t neutral = 0;
    for (const auto& s : scores) neutral += s.label == eval::Label::neutral ? 1 : 0;
    ordered_json s;
    s["d_eer"] = curve.d_eer;
    s["neutral_count"] = neutral;
    s["non_neutral_count"] = scores.size() - neutral;
    s["config"] = {{"quality_column", c.column}};
    emit(c.summary, s.dump(2) + "\n", out);
  }
  if (!c.distributions.empty()) {
    ordered_json d = ordered_json::object();
    for (const auto& [cls, summary] : eval::class_distributions(by_class, c.bins)) {
      ordered_json q = ordered_json::object();
      for (const auto& [p, v] : summary.quantiles) q[std::to_string(p)] = v;
      d[cls] = {{"count", summary.count},
                {"mean", summary.mean},
                {"quantiles", q},
                {"histogram", summary.histogram}};
    }
    emit(c.distributions, d.dump(2) + "\n", out);
  }
}

void cmd_svm_score(const RunConfig& c, std::ostream& out) {
  require_input(c.svm_model, "svm model");
  require_input(c.embeddings, "embeddings");
  require_input(c.calibration, "svm calibration");
  require_output(c.out, "svm scores");
  const auto model = svm::load_svm(c.svm_model);
  const auto calib = io::read_decision_calibration(c.calibration);
  const auto embeddings = io::read_embeddings_jsonl(c.embeddings);
  const auto values = decision_values(model, embeddings, c.workers);
  std::vector<io::SvmScore> scores;
  scores.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    scores.push_back({embeddings[i].sample_id, values[i], svm::svm_quality(values[i], calib)});
  }
  emit(c.out, io::format_svm_scores_csv(scores), out);
}

void cmd_synth(const RunConfig& c) {
  if (c.out_dir.empty()) throw ValidationError("synth: --out-dir is required");
  fs::create_directories(c.out_dir);
  const fs::path dir(c.out_dir);
  std::optional<ModelAssets> assets;
  if (!c.assets.empty()) {
    require_input(c.assets, "assets");
    assets.emplace(ModelAssets::load(c.assets));
  } else {
    auto head = synth::make_head_model({c.n_beta, c.n_psi, c.seed});
    head.assets.save(dir / "assets.nac");
    std::string mask;
    for (auto v : head.mouth_chin_mask) mask += std::to_string(v) + "\n";
    io::write_text(dir / "mouth_chin_mask.txt", mask);
    assets.emplace(std::move(head.assets));
  }
  synth::DatasetOptions options = c.dataset;
  options.seed = c.seed;
  const auto data = synth::make_dataset(*assets, options);
  io::write_codes_jsonl(dir / "neutral_codes.jsonl", data.neutral_codes);
  io::write_codes_jsonl(dir / "train_codes.jsonl", data.training_codes);
  io::write_codes_jsonl(dir / "codes.jsonl", data.codes);
  std::string labels = "sample_id,label\n";
  for (const auto& [id, cls] : data.labels) labels += io::csv_field(id) + "," + cls + "\n";
  io::write_text(dir / "labels.csv", labels);
  io::write_text(dir / "comparisons.csv", io::format_comparisons_csv(data.comparisons));
}

// --- option wiring -------------------------------------------------------------

void add_assets(CLI::App* sub, RunConfig& c) {
  sub->add_option("--assets", c.assets, "Model asset container (.nac)")->envname(kAssetsEnv);
}

void add_workers(CLI::App* sub, RunConfig& c) {
  sub->add_option("--workers", c.workers, "Worker threads (0 = available parallelism)");
}

void add_reduction(CLI::App* sub, RunConfig& c) {
  sub->add_option("--reduction", c.reduction, "Distance reduction: mean|sum|frobenius")
      ->check(CLI::IsMember({"mean", "sum", "frobenius"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Expression-neutrality quality components from 3D face model codes", "neutrex"};
  app.require_subcommand(1);

  auto* anchor = app.add_subcommand("anchor", "Average neutral codes into a neutral anchor");
  add_assets(anchor, c);
  anchor->add_option("--codes", c.codes, "Neutral training codes (JSONL)")->required();
  anchor->add_option("--out", c.out, "Anchor JSON output")->required();
  anchor->add_option("--mesh-out", c.mesh_out, "Anchor mesh PLY (default: --out with .ply)");
  anchor->add_option("--jaw", c.jaw, "Jaw under normalization: retain|zero")
      ->check(CLI::IsMember({"retain", "zero"}));
  anchor->add_option("--anchor-jaw", c.anchor_jaw, "Anchor jaw: mean|zero")
      ->check(CLI::IsMember({"mean", "zero"}));

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Derive the min-max quality mapping");
  add_assets(calibrate_cmd, c);
  calibrate_cmd->add_option("--anchor", c.anchor, "Anchor JSON");
  auto* cal_codes = calibrate_cmd->add_option("--codes", c.codes, "Training codes (JSONL)");
  auto* cal_dist =
      calibrate_cmd->add_option("--distances", c.distances, "CSV with a raw_distance column");
  auto* cal_svm = calibrate_cmd->add_option("--svm", c.svm_model, "SVM model JSON (baseline mode)");
  calibrate_cmd->add_option("--embeddings", c.embeddings, "Training embeddings (JSONL, with --svm)")
      ->needs(cal_svm);
  cal_codes->excludes(cal_dist)->excludes(cal_svm);
  cal_dist->excludes(cal_svm);
  calibrate_cmd->add_option("--method", c.method, "exact-extrema | percentile(lo,hi)");
  calibrate_cmd->add_option("--out", c.out, "Calibration JSON output")->required();
  add_reduction(calibrate_cmd, c);
  add_workers(calibrate_cmd, c);

  auto* score = app.add_subcommand("score", "Score codes against the anchor");
  add_assets(score, c);
  score->add_option("--anchor", c.anchor, "Anchor JSON")->required();
  score->add_option("--calibration", c.calibration, "Calibration JSON")->required();
  score->add_option("--codes", c.codes, "Codes to score (JSONL)")->required();
  score->add_option("--out", c.out, "Scores CSV output")->required();
  add_reduction(score, c);
  add_workers(score, c);

  auto* residuals = app.add_subcommand("residuals", "Export per-vertex residuals as PLY");
  add_assets(residuals, c);
  residuals->add_option("--anchor", c.anchor, "Anchor JSON")->required();
  residuals->add_option("--codes", c.codes, "Codes (JSONL); first line unless --sample-id")->required();
  residuals->add_option("--sample-id", c.sample_id, "Sample to export");
  residuals->add_option("--out", c.out, "PLY output")->required();

  auto add_eval_inputs = [&](CLI::App* sub) {
    sub->add_option("--qualities", c.qualities, "CSV with sample_id and a quality column")->required();
    sub->add_option("--column", c.column, "Quality column name (default neutrex)");
    sub->add_option("--out", c.out, "Curve CSV output")->required();
    sub->add_option("--summary", c.summary, "Summary JSON output");
  };

  auto* edc_cmd = app.add_subcommand("edc", "Error-vs-discard characteristic and pAUC");
  add_eval_inputs(edc_cmd);
  edc_cmd->add_option("--comparisons", c.comparisons, "probe_id,reference_id,similarity,mated CSV")
      ->required();
  auto* fmr = edc_cmd->add_option("--target-fmr", c.target_fmr, "Target FMR for the threshold");
  auto* thr = edc_cmd->add_option("--threshold", c.threshold, "Explicit decision threshold");
  fmr->excludes(thr);
  edc_cmd->add_option("--grid", c.grid, "Discard grid: start:stop:step or comma list");
  edc_cmd->add_option("--pauc-upper", c.pauc_upper, "Upper discard bound of the pAUC");

  auto* det = app.add_subcommand("det", "Neutral/non-neutral DET curve and D-EER");
  add_eval_inputs(det);
  det->add_option("--labels", c.labels, "sample_id,label CSV")->required();
  det->add_option("--distributions", c.distributions, "Per-class distribution JSON output");
  det->add_option("--bins", c.bins, "Histogram bins over [0,100]")->check(CLI::PositiveNumber);

  auto* svm_score = app.add_subcommand("svm-score", "Score embeddings with an SVM baseline");
  svm_score->add_option("--model", c.svm_model, "SVM model JSON")->required();
  svm_score->add_option("--embeddings", c.embeddings, "Embeddings (JSONL)")->required();
  svm_score->add_option("--calibration", c.calibration, "Decision-value calibration JSON")->required();
  svm_score->add_option("--out", c.out, "Scores CSV output")->required();
  add_workers(svm_score, c);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  synth_cmd->add_option("--seed", c.seed, "Random seed");
  synth_cmd->add_option("--out-dir", c.out_dir, "Output directory")->required();
  synth_cmd->add_option("--assets", c.assets, "Use these assets instead of generating a head model");
  synth_cmd->add_option("--n-beta", c.n_beta, "Shape components of the generated model");
  synth_cmd->add_option("--n-psi", c.n_psi, "Expression components of the generated model");
  synth_cmd->add_option("--neutral", c.dataset.neutral_training, "Neutral training codes");
  synth_cmd->add_option("--train", c.dataset.mixed_training, "Mixed training codes");
  synth_cmd->add_option("--subjects", c.dataset.subjects, "Test subjects");
  synth_cmd->add_option("--samples-per-subject", c.dataset.samples_per_subject, "Samples per subject");
  synth_cmd->add_option("--mated", c.dataset.mated, "Mated comparisons");
  synth_cmd->add_option("--nonmated", c.dataset.nonmated, "Non-mated comparisons");

  std::vector<const char*> argv{"neutrex"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (anchor->parsed()) cmd_anchor(c, out);
    if (calibrate_cmd->parsed()) cmd_calibrate(c, out);
    if (score->parsed()) cmd_score(c, out);
    if (residuals->parsed()) cmd_residuals(c, out);
    if (edc_cmd->parsed()) cmd_edc(c, out);
    if (det->parsed()) cmd_det(c, out);
    if (svm_score->parsed()) cmd_svm_score(c, out);
    if (synth_cmd->parsed()) cmd_synth(c);
  } catch (const IoError& e) {
    err << "neutrex: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "neutrex: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "neutrex: I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace neutrex::cli
