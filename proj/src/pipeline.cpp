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

#include "deepen/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "deepen/io_util.hpp"
#include "deepen/rng.hpp"

namespace deepen {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) fields.push_back(tok);
  return fields;
}

// Per-(file, attack) seed: FNV-1a over master seed, canonical file index,
// and attack name, in that order.
uint64_t variant_seed(uint64_t master_seed, uint64_t file_index, const std::string& attack) {
  uint64_t h = fnv1a64_append(0xCBF29CE484222325ULL, master_seed);
  h = fnv1a64_append(h, file_index);
  return fnv1a64_append(h, attack);
}

// Split hash: a pure function of (master_seed, source_path). Files of a
// class are ranked by it; the lowest ranks go to train.
uint64_t split_hash(uint64_t master_seed, const std::string& source_path) {
  uint64_t h = fnv1a64_append(0xCBF29CE484222325ULL, master_seed);
  h = fnv1a64_append(h, std::string_view("split"));
  return fnv1a64_append(h, source_path);
}

std::string sanitize_stem(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  for (char& c : stem) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return stem;
}

}  // namespace

std::vector<std::pair<std::string, Label>> load_corpus_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open corpus index: " + path);

  std::vector<std::pair<std::string, Label>> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;

    try {
      const auto comma = line.find(',');
      if (comma != std::string::npos) {
        const std::string p = line.substr(0, comma);
        const std::string label = line.substr(comma + 1);
        if (line_no == 1 && p == "path" && label == "label") continue;  // header row
        entries.emplace_back(p, label_from_string(label));
      } else {
        const auto fields = split_whitespace(line);
        if (fields.size() < 2) {
          throw PipelineError("unparseable index line");
        }
        const Label label = label_from_string(fields.back());
        entries.emplace_back(fields[1] + ".wav", label);
      }
    } catch (const ManifestError& e) {
      throw PipelineError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

Manifest derive(const DerivationConfig& config, const AttackRegistry& registry,
                const AssetStore& assets) {
  if (config.n_per_class < 1) throw PipelineError("n_per_class must be >= 1");
  const auto attacks = registry.enabled_attacks();
  if (attacks.empty()) throw PipelineError("registry has no enabled attacks");
  const AttackSpec* no_attack = registry.find("no_attack");
  if (no_attack == nullptr) throw PipelineError("registry is missing no_attack");

  const fs::path index_dir = fs::path(config.index_path).parent_path();
  auto index = load_corpus_index(config.index_path);

  // Validate the asset store up front so nothing is written on failure.
  for (const auto* spec : attacks) {
    if (spec->name == "add_background_music" && !assets.has_music()) {
      throw PipelineError("add_background_music is enabled but no music assets are configured");
    }
    if (spec->name == "add_background_noise" && !assets.has_noise()) {
      throw PipelineError("add_background_noise is enabled but no noise assets are configured");
    }
  }

  // Partition by class and fix the canonical order (sorted by path).
  std::vector<std::string> by_class[2];
  for (const auto& [p, label] : index) {
    by_class[label == Label::Spoof ? 1 : 0].push_back(p);
  }
  const size_t n = config.n_per_class;
  for (int c = 0; c < 2; ++c) {
    std::sort(by_class[c].begin(), by_class[c].end());
    by_class[c].erase(std::unique(by_class[c].begin(), by_class[c].end()), by_class[c].end());
    if (by_class[c].size() < n) {
      throw PipelineError("corpus has " + std::to_string(by_class[c].size()) + " " +
                          to_string(c == 0 ? Label::Bonafide : Label::Spoof) +
                          " files, need " + std::to_string(n));
    }
  }

  // Seeded selection without replacement, then back to canonical order.
  // File index: bonafide block first, each block sorted by path.
  struct SourceFile {
    std::string path;
    Label label;
    Split split;
    AudioClip clip;
  };
  std::vector<SourceFile> files;
  for (int c = 0; c < 2; ++c) {
    const Label label = c == 0 ? Label::Bonafide : Label::Spoof;
    uint64_t h = fnv1a64_append(0xCBF29CE484222325ULL, config.master_seed);
    h = fnv1a64_append(h, std::string_view("select"));
    h = fnv1a64_append(h, to_string(label));
    Rng rng(h);
    auto picks = rng.sample_without_replacement(by_class[c].size(), n);
    std::vector<std::string> selected;
    for (size_t i : picks) selected.push_back(by_class[c][i]);
    std::sort(selected.begin(), selected.end());

    // Rank by split hash; train takes the lowest. When n * ratio is
    // fractional, bonafide rounds up and spoof rounds down so the overall
    // split stays balanced.
    const double exact = static_cast<double>(n) * config.split_ratio;
    const auto n_train = static_cast<size_t>(c == 0 ? std::ceil(exact) : std::floor(exact));
    std::vector<std::pair<uint64_t, std::string>> ranked;
    for (const auto& p : selected) ranked.emplace_back(split_hash(config.master_seed, p), p);
    std::sort(ranked.begin(), ranked.end());
    std::set<std::string> train_set;
    for (size_t i = 0; i < n_train && i < ranked.size(); ++i) train_set.insert(ranked[i].second);

    for (const auto& p : selected) {
      files.push_back({p, label, train_set.count(p) ? Split::Train : Split::Test, {}});
    }
  }

  // Decode sources once; every variant reuses the decoded clip.
  parallel_for(files.size(), config.jobs, [&](size_t i) {
    const fs::path src = fs::path(files[i].path).is_absolute()
                             ? fs::path(files[i].path)
                             : index_dir / files[i].path;
    AudioClip clip = read_wav(src.string());
    if (config.normalize_rate_hz > 0 && clip.sample_rate_hz != config.normalize_rate_hz) {
      clip = resample(clip, config.normalize_rate_hz);
    }
    files[i].clip = std::move(clip);
  });

  std::vector<const AttackSpec*> variants = attacks;
  variants.push_back(no_attack);

  const fs::path out_root(config.output_dir);
  for (const auto* spec : variants) {
    fs::create_directories(out_root / "audio" / spec->name);
  }

  // One task per (file, attack). Entries land in task order, then get the
  // canonical sort, so scheduling cannot affect the output.
  Manifest manifest;
  manifest.entries.resize(files.size() * variants.size());
  parallel_for(manifest.entries.size(), config.jobs, [&](size_t task) {
    const size_t file_index = task / variants.size();
    const AttackSpec& spec = *variants[task % variants.size()];
    const SourceFile& src = files[file_index];

    const uint64_t seed = variant_seed(config.master_seed, file_index, spec.name);
    AttackParams params = sample_params(spec, seed);
    ApplyResult result = apply_attack(params, src.clip, assets);

    const std::string rel = "audio/" + spec.name + "/" + to_string(src.label) + "_" +
                            std::to_string(file_index) + "_" + sanitize_stem(src.path) + ".wav";
    write_wav(result.clip, (out_root / rel).string());

    ManifestEntry& entry = manifest.entries[task];
    entry.source_path = src.path;
    entry.output_path = rel;
    entry.label = src.label;
    entry.attack_name = spec.name;
    entry.params = std::move(params);
    entry.split = src.split;
    entry.degenerate = result.degenerate;
  });

  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return std::tie(a.source_path, a.attack_name) <
                     std::tie(b.source_path, b.attack_name);
            });

  write_manifest_jsonl(manifest, (out_root / "manifest.jsonl").string());
  write_manifest_csv(manifest, (out_root / "manifest.csv").string());

  nlohmann::ordered_json meta;
  meta["index_path"] = config.index_path;
  meta["n_per_class"] = config.n_per_class;
  meta["master_seed"] = config.master_seed;
  meta["split_ratio"] = config.split_ratio;
  meta["normalize_rate_hz"] = config.normalize_rate_hz;
  meta["enabled_attacks"] = nlohmann::ordered_json::array();
  for (const auto* spec : attacks) meta["enabled_attacks"].push_back(spec->name);
  atomic_write_file((out_root / "meta.json").string(), meta.dump(2) + "\n");

  return manifest;
}

}  // namespace deepen
