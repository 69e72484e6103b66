// Copyright 2026 The deepen authors
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

#include "deepen/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepen/defense.hpp"
#include "deepen/evaluation.hpp"
#include "deepen/io_util.hpp"
#include "deepen/pipeline.hpp"
#include "deepen/scorer.hpp"
#include "deepen/synth.hpp"

namespace deepen {

namespace fs = std::filesystem;

namespace {

/// Flag combinations CLI11 cannot express; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliState {
  // derive / attack / evaluate / demo
  std::string index_path;
  size_t n_per_class = 0;
  uint64_t seed = 0;
  std::string registry_path;
  std::string out_dir;
  double split_ratio = 0.5;
  int rate = 16000;
  int jobs = 1;
  std::string music_dir;
  std::string noise_dir;

  // attack
  std::string attack_name;
  std::string in_wav;
  std::string out_wav;
  std::vector<std::string> overrides;
  bool list_attacks = false;

  // evaluate
  std::string manifest_path;
  std::string scorer_spec;
  std::string scorer_name;
  std::string split = "test";
  double threshold = 0.5;
  size_t batch_size = 16;
  int retries = 2;
  std::string out_scores;
  std::string out_matrix;

  // report
  std::string matrix_path;
  std::string format = "csv";
  std::string out_file;

  // delta
  std::vector<std::string> defended_paths;
  std::string baseline_path;
  std::vector<std::string> scenario_names;

  // select-defenses
  std::string delta_path;
  double min_gain = 5.0;
  std::string tie_rule = "row-mean";
  bool json_output = false;
};

AttackRegistry load_registry(const std::string& path) {
  return path.empty() ? AttackRegistry::built_in() : AttackRegistry::from_json_file(path);
}

AssetStore load_assets(const CliState& state) {
  return AssetStore::from_dirs(state.music_dir, state.noise_dir);
}

uint64_t read_meta_seed(const std::string& manifest_path) {
  const fs::path meta = fs::path(manifest_path).parent_path() / "meta.json";
  if (!fs::exists(meta)) return 0;
  std::ifstream in(meta);
  nlohmann::json doc;
  in >> doc;
  return doc.value("master_seed", uint64_t{0});
}

int cmd_derive(const CliState& state, std::ostream& out) {
  DerivationConfig config;
  config.index_path = state.index_path;
  config.n_per_class = state.n_per_class;
  config.master_seed = state.seed;
  config.output_dir = state.out_dir;
  config.split_ratio = state.split_ratio;
  config.normalize_rate_hz = state.rate;
  config.jobs = state.jobs;

  const auto registry = load_registry(state.registry_path);
  const auto manifest = derive(config, registry, load_assets(state));
  out << "derived " << manifest.entries.size() << " files into " << state.out_dir << "\n";
  return 0;
}

int cmd_attack(const CliState& state, std::ostream& out) {
  const auto registry = load_registry(state.registry_path);
  if (state.list_attacks) {
    for (const auto& spec : registry.all()) {
      out << spec.name << (spec.enabled ? "" : " (disabled)") << " ["
          << to_string(spec.provenance) << "]\n";
    }
    return 0;
  }

  if (state.attack_name.empty() || state.in_wav.empty() || state.out_wav.empty()) {
    throw UsageError("attack requires --name, --in, and --out (or --list)");
  }
  const AttackSpec* spec = registry.find(state.attack_name);
  if (spec == nullptr) throw RegistryError("unknown attack: " + state.attack_name);

  AttackParams params = sample_params(*spec, state.seed);
  for (const auto& override_kv : state.overrides) {
    const auto eq = override_kv.find('=');
    if (eq == std::string::npos) {
      throw RegistryError("bad --set (expected key=value): " + override_kv);
    }
    params.values[override_kv.substr(0, eq)] = std::stod(override_kv.substr(eq + 1));
  }

  const AudioClip clip = read_wav(state.in_wav);
  const ApplyResult result = apply_attack(params, clip, load_assets(state));
  write_wav(result.clip, state.out_wav);

  out << state.attack_name << " applied (seed " << state.seed << ")";
  for (const auto& [k, v] : params.values) out << " " << k << "=" << v;
  if (result.degenerate) out << " [degenerate: input returned unchanged]";
  out << "\n";
  return 0;
}

int cmd_evaluate(const CliState& state, std::ostream& out) {
  ScorerConfig config = parse_scorer_spec(state.scorer_spec);
  if (!state.scorer_name.empty()) config.name = state.scorer_name;
  config.threshold = state.threshold;
  config.batch_size = state.batch_size;
  config.max_retries = state.retries;
  config.parallelism = state.jobs;

  const Manifest manifest = read_manifest_jsonl(state.manifest_path);
  const Split split = split_from_string(state.split);
  const std::string audio_root = fs::path(state.manifest_path).parent_path().string();

  const auto records = score_batch(manifest, split, config, audio_root);
  if (!state.out_scores.empty()) write_scores_csv(records, config, split, state.out_scores);

  AccuracyMatrix matrix = accuracy_matrix(manifest, records, config.threshold, config.name, split);
  matrix.seed = read_meta_seed(state.manifest_path);
  if (!state.out_matrix.empty()) write_accuracy_csv(matrix, state.out_matrix);

  out << "scored " << records.size() << " files with " << config.name << "\n";
  return 0;
}

int cmd_report(const CliState& state, std::ostream& out) {
  const ReportFormat format = report_format_from_string(state.format);
  // Accuracy files declare themselves via the header block or the
  // attack,label column pair; anything else is a scenario-by-attack table.
  const std::string head = read_file(state.matrix_path).substr(0, 256);
  const bool accuracy =
      head.rfind("# type=accuracy", 0) == 0 ||
      (head.rfind("# type=delta", 0) != 0 && head.find("attack,label") != std::string::npos);
  std::string rendered;
  if (accuracy) {
    rendered = render_report(read_accuracy_csv(state.matrix_path), format);
  } else {
    rendered = render_report(read_delta_csv(state.matrix_path), format);
  }
  if (state.out_file.empty()) {
    out << rendered;
  } else {
    atomic_write_file(state.out_file, rendered);
  }
  return 0;
}

int cmd_delta(const CliState& state, std::ostream& out) {
  const AccuracyMatrix baseline = read_accuracy_csv(state.baseline_path);
  DeltaMatrix combined;
  for (size_t i = 0; i < state.defended_paths.size(); ++i) {
    AccuracyMatrix defended = read_accuracy_csv(state.defended_paths[i]);
    if (i < state.scenario_names.size()) {
      for (auto& col : defended.cols) col = state.scenario_names[i];
    }
    append_scenarios(combined, delta_matrix(defended, baseline));
  }
  write_delta_csv(combined, state.out_file);
  out << "wrote " << combined.rows.size() << " scenario deltas to " << state.out_file << "\n";
  return 0;
}

int cmd_select_defenses(const CliState& state, std::ostream& out) {
  const PerformanceMatrix matrix =
      performance_matrix_from_delta(read_delta_csv(state.delta_path));
  const TieRule rule = tie_rule_from_string(state.tie_rule);
  const DefenseSubset subset = select_defenses(matrix, state.min_gain, rule);

  const auto check = verify_subset(matrix, subset.selected, state.min_gain, rule);
  if (!check.ok) {
    throw DefenseError("internal: selection failed self-verification: " + check.violations[0]);
  }

  if (state.json_output || !state.out_file.empty()) {
    const std::string json = subset_to_json(matrix, subset, state.min_gain);
    if (!state.out_file.empty()) {
      atomic_write_file(state.out_file, json);
    }
    if (state.json_output) out << json;
    if (!state.json_output && !state.out_file.empty()) {
      out << "wrote selection to " << state.out_file << "\n";
    }
    return 0;
  }

  out << "selected " << subset.selected.size() << " of " << matrix.m() << " defenses (L="
      << state.min_gain << ")\n";
  for (size_t i : subset.selected) {
    out << "  " << matrix.defense_names[i] << " — best against:";
    for (size_t j : subset.justification.at(i)) {
      out << " " << matrix.attack_names[j] << " (+" << matrix.a[i][j] << ")";
    }
    out << "\n";
  }
  return 0;
}

int cmd_demo(const CliState& state, std::ostream& out) {
  const fs::path root(state.out_dir);
  fs::create_directories(root);

  // A 20-file corpus plus background assets, all synthesized from the seed.
  const std::string index =
      generate_synthetic_corpus((root / "corpus").string(), 10, state.seed);
  generate_synthetic_assets((root / "assets/music").string(), (root / "assets/noise").string(),
                            state.seed);
  out << "corpus: " << index << "\n";

  DerivationConfig config;
  config.index_path = index;
  config.n_per_class = 10;
  config.master_seed = state.seed;
  config.output_dir = (root / "derived").string();
  config.jobs = state.jobs;
  const auto registry = AttackRegistry::built_in();
  const auto assets = AssetStore::from_dirs((root / "assets/music").string(),
                                            (root / "assets/noise").string());
  const Manifest manifest = derive(config, registry, assets);
  out << "derived: " << manifest.entries.size() << " files\n";

  // Score the test split once; two decision thresholds act as two scenarios.
  ScorerConfig strict;
  strict.name = "reference";
  strict.threshold = 0.5;
  strict.parallelism = state.jobs;
  const auto records = score_batch(manifest, Split::Test, strict, config.output_dir);
  write_scores_csv(records, strict, Split::Test, (root / "scores.csv").string());

  AccuracyMatrix base = accuracy_matrix(manifest, records, 0.5, "reference");
  base.seed = state.seed;
  write_accuracy_csv(base, (root / "matrix_baseline.csv").string());
  atomic_write_file((root / "report.html").string(), render_report(base, ReportFormat::Html));
  atomic_write_file((root / "report.md").string(), render_report(base, ReportFormat::Markdown));

  AccuracyMatrix lenient = accuracy_matrix(manifest, records, 0.65, "reference_lenient");
  lenient.seed = state.seed;
  AccuracyMatrix eager = accuracy_matrix(manifest, records, 0.35, "reference_eager");
  eager.seed = state.seed;
  write_accuracy_csv(lenient, (root / "matrix_lenient.csv").string());
  write_accuracy_csv(eager, (root / "matrix_eager.csv").string());

  DeltaMatrix deltas = delta_matrix(lenient, base);
  append_scenarios(deltas, delta_matrix(eager, base));
  write_delta_csv(deltas, (root / "delta.csv").string());
  atomic_write_file((root / "delta_report.html").string(),
                    render_report(deltas, ReportFormat::Html));

  const PerformanceMatrix perf = performance_matrix_from_delta(deltas);
  const DefenseSubset subset = select_defenses(perf, 5.0);
  atomic_write_file((root / "defense_selection.json").string(),
                    subset_to_json(perf, subset, 5.0));

  out << "report: " << (root / "report.html").string() << "\n";
  out << "delta: " << (root / "delta.csv").string() << "\n";
  out << "selection: " << (root / "defense_selection.json").string() << " ("
      << subset.selected.size() << " scenarios qualify)\n";
  return 0;
}

std::unique_ptr<CLI::App> build_app(CliState& state) {
  auto app = std::make_unique<CLI::App>("penetration testing for audio deepfake detectors");
  app->name("deepen");
  app->require_subcommand(0, 1);

  auto* derive_cmd = app->add_subcommand(
      "derive", "derive an attack-perturbed dataset from a labeled corpus");
  derive_cmd->add_option("--index", state.index_path, "corpus index (CSV path,label or protocol file)")
      ->required();
  derive_cmd->add_option("--n", state.n_per_class, "source files per class (N)")->required();
  derive_cmd->add_option("--seed", state.seed, "master seed")->default_val(0);
  derive_cmd->add_option("--registry", state.registry_path,
                         "attack registry config JSON (default: built-in suite)");
  derive_cmd->add_option("--out", state.out_dir, "output directory")->required();
  derive_cmd->add_option("--split-ratio", state.split_ratio, "train fraction per cell")
      ->default_val(0.5)
      ->check(CLI::Range(0.0, 1.0));
  derive_cmd->add_option("--rate", state.rate, "normalize sources to this rate (0 keeps native)")
      ->default_val(16000);
  derive_cmd->add_option("--jobs", state.jobs, "worker threads")->default_val(1);
  derive_cmd->add_option("--music-dir", state.music_dir, "background music WAV directory")
      ->envname("DEEPEN_MUSIC_DIR");
  derive_cmd->add_option("--noise-dir", state.noise_dir, "background noise WAV directory")
      ->envname("DEEPEN_NOISE_DIR");

  auto* attack_cmd =
      app->add_subcommand("attack", "apply one named attack to one file for inspection");
  attack_cmd->add_option("--name", state.attack_name, "attack name");
  attack_cmd->add_option("--in", state.in_wav, "input WAV");
  attack_cmd->add_option("--out", state.out_wav, "output WAV");
  attack_cmd->add_option("--seed", state.seed, "parameter sampling seed")->default_val(0);
  attack_cmd->add_option("--registry", state.registry_path, "attack registry config JSON");
  attack_cmd->add_option("--set", state.overrides, "override a sampled parameter (key=value)");
  attack_cmd->add_flag("--list", state.list_attacks, "list registered attacks and exit");
  attack_cmd->add_option("--music-dir", state.music_dir, "background music WAV directory")
      ->envname("DEEPEN_MUSIC_DIR");
  attack_cmd->add_option("--noise-dir", state.noise_dir, "background noise WAV directory")
      ->envname("DEEPEN_NOISE_DIR");

  auto* eval_cmd =
      app->add_subcommand("evaluate", "score derived audio through a detector");
  eval_cmd->add_option("--manifest", state.manifest_path, "manifest.jsonl from derive")
      ->required();
  eval_cmd
      ->add_option("--scorer", state.scorer_spec,
                   "reference | subprocess:CMD | http://host:port")
      ->required();
  eval_cmd->add_option("--name", state.scorer_name, "scorer column name in the matrix");
  eval_cmd->add_option("--split", state.split, "train or test")->default_val("test");
  eval_cmd->add_option("--threshold", state.threshold, "spoof decision threshold in (0,1)")
      ->default_val(0.5);
  eval_cmd->add_option("--batch-size", state.batch_size, "files per scorer request")
      ->default_val(16);
  eval_cmd->add_option("--retries", state.retries, "transport retries per batch")->default_val(2);
  eval_cmd->add_option("--jobs", state.jobs, "concurrent batches")->default_val(1);
  eval_cmd->add_option("--out-scores", state.out_scores, "write raw scores CSV here");
  eval_cmd->add_option("--out-matrix", state.out_matrix, "write accuracy matrix CSV here");

  auto* report_cmd = app->add_subcommand("report", "render a matrix CSV as csv/markdown/html");
  report_cmd->add_option("--matrix", state.matrix_path, "matrix CSV from evaluate or delta")
      ->required();
  report_cmd->add_option("--format", state.format, "csv, markdown, or html")->default_val("csv");
  report_cmd->add_option("--out", state.out_file, "output file (default: stdout)");

  auto* delta_cmd =
      app->add_subcommand("delta", "accuracy deltas of defended runs against a baseline");
  delta_cmd->add_option("--defended", state.defended_paths, "defended accuracy matrix CSV")
      ->required();
  delta_cmd->add_option("--baseline", state.baseline_path, "baseline accuracy matrix CSV")
      ->required();
  delta_cmd->add_option("--name", state.scenario_names,
                        "scenario name per defended matrix (default: its scorer name)");
  delta_cmd->add_option("--out", state.out_file, "output delta CSV")->required();

  auto* select_cmd = app->add_subcommand(
      "select-defenses", "greedy minimal representative defense subset from a delta matrix");
  select_cmd->add_option("--delta", state.delta_path, "delta CSV (rows: defenses, cols: attacks)")
      ->required();
  select_cmd->add_option("--threshold", state.min_gain, "minimum gain L in percentage points")
      ->default_val(5.0);
  select_cmd->add_option("--tie-rule", state.tie_rule, "row-mean or lex")->default_val("row-mean");
  select_cmd->add_flag("--json", state.json_output, "print machine-readable JSON");
  select_cmd->add_option("--out", state.out_file, "also write the JSON selection here");

  auto* demo_cmd = app->add_subcommand(
      "demo", "synthesize a corpus and run the whole loop with the reference scorer");
  demo_cmd->add_option("--out", state.out_dir, "output directory")->required();
  demo_cmd->add_option("--seed", state.seed, "master seed")->default_val(42);
  demo_cmd->add_option("--jobs", state.jobs, "worker threads")->default_val(1);

  return app;
}

}  // namespace

std::string cli_help(const std::string& subcommand) {
  CliState state;
  auto app = build_app(state);
  if (subcommand.empty()) return app->help();
  return app->get_subcommand(subcommand)->help("deepen");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliState state;
  auto app = build_app(state);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app->got_subcommand("derive")) return cmd_derive(state, out);
    if (app->got_subcommand("attack")) return cmd_attack(state, out);
    if (app->got_subcommand("evaluate")) return cmd_evaluate(state, out);
    if (app->got_subcommand("report")) return cmd_report(state, out);
    if (app->got_subcommand("delta")) return cmd_delta(state, out);
    if (app->got_subcommand("select-defenses")) return cmd_select_defenses(state, out);
    if (app->got_subcommand("demo")) return cmd_demo(state, out);
    out << app->help();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace deepen
