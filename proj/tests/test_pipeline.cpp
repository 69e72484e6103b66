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

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <doctest.h>
#include <json.hpp>

#include "deepen/io_util.hpp"
#include "deepen/synth.hpp"

using namespace deepen;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "deepen_pipeline_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Built-in registry with only the given attacks (plus no_attack) enabled.
AttackRegistry registry_with(const std::set<std::string>& keep, const fs::path& scratch) {
  auto doc = nlohmann::json::parse(AttackRegistry::built_in().to_json());
  for (auto& item : doc["attacks"]) {
    const std::string name = item["name"];
    item["enabled"] = (name == "no_attack" || keep.count(name) > 0);
  }
  const fs::path cfg = scratch / "registry.json";
  std::ofstream(cfg) << doc.dump(2);
  return AttackRegistry::from_json_file(cfg.string());
}

DerivationConfig base_config(const std::string& index, const fs::path& out, size_t n,
                             uint64_t seed) {
  DerivationConfig config;
  config.index_path = index;
  config.n_per_class = n;
  config.master_seed = seed;
  config.output_dir = out.string();
  config.jobs = 2;
  return config;
}

}  // namespace

TEST_CASE("load_corpus_index parses generic CSV") {
  const fs::path dir = fresh_dir("index_csv");
  const fs::path index = dir / "index.csv";
  std::ofstream(index) << "path,label\n"
                          "a.wav,bonafide\n"
                          "b.wav,bonafide\n"
                          "c.wav,bonafide\n"
                          "d.wav,spoof\n"
                          "e.wav,spoof\n";
  const auto entries = load_corpus_index(index.string());
  REQUIRE(entries.size() == 5);
  size_t bonafide = 0;
  for (const auto& [p, label] : entries) {
    if (label == Label::Bonafide) ++bonafide;
  }
  CHECK(bonafide == 3);
  CHECK(entries[3].first == "d.wav");
  CHECK(entries[3].second == Label::Spoof);
}

TEST_CASE("load_corpus_index parses protocol lines") {
  const fs::path dir = fresh_dir("index_proto");
  const fs::path index = dir / "train.trn.txt";
  std::ofstream(index) << "LA_0079 LA_T_1138215 - - bonafide\n"
                          "LA_0080 LA_T_1271820 - A01 spoof\n";
  const auto entries = load_corpus_index(index.string());
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].first == "LA_T_1138215.wav");
  CHECK(entries[0].second == Label::Bonafide);
  CHECK(entries[1].first == "LA_T_1271820.wav");
  CHECK(entries[1].second == Label::Spoof);
}

TEST_CASE("load_corpus_index rejects unknown labels") {
  const fs::path dir = fresh_dir("index_bad");
  const fs::path index = dir / "index.csv";
  std::ofstream(index) << "a.wav,genuine\n";
  CHECK_THROWS_WITH_AS(load_corpus_index(index.string()), doctest::Contains("genuine"),
                       PipelineError);
  CHECK_THROWS_AS(load_corpus_index((dir / "missing.csv").string()), PipelineError);
}

TEST_CASE("derive with one attack yields 2 classes x 2 variants") {
  const fs::path dir = fresh_dir("derive_minimal");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 1, 5, 4000);
  const auto registry = registry_with({"echo"}, dir);
  REQUIRE(registry.enabled_attacks().size() == 1);

  const Manifest manifest =
      derive(base_config(index, dir / "out", 1, 9), registry, AssetStore{});
  CHECK(manifest.entries.size() == 4);  // 2 classes x {echo, no_attack}
  for (const auto& e : manifest.entries) {
    CHECK(fs::exists(dir / "out" / e.output_path));
  }
}

TEST_CASE("derive obeys the N x 2 x (K+1) count law") {
  const fs::path dir = fresh_dir("derive_counts");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 6, 5, 4000);
  const auto registry = registry_with({"echo", "gain_change", "bit_depth_change"}, dir);

  const Manifest manifest =
      derive(base_config(index, dir / "out", 4, 11), registry, AssetStore{});
  CHECK(manifest.entries.size() == 4 * 2 * 4);

  // Every selected source appears exactly K+1 times.
  std::map<std::string, size_t> per_source;
  for (const auto& e : manifest.entries) ++per_source[e.source_path];
  CHECK(per_source.size() == 8);
  for (const auto& [src, count] : per_source) CHECK(count == 4);

  // All variants of one source share its split; every derived file appears
  // in exactly one split.
  std::map<std::string, std::set<Split>> splits_per_source;
  std::set<std::string> outputs;
  for (const auto& e : manifest.entries) {
    splits_per_source[e.source_path].insert(e.split);
    CHECK(outputs.insert(e.output_path).second);
  }
  for (const auto& [src, splits] : splits_per_source) CHECK(splits.size() == 1);

  // Each (class, attack) cell splits at the ratio exactly for even N.
  std::map<std::pair<std::string, Label>, std::pair<size_t, size_t>> cells;
  for (const auto& e : manifest.entries) {
    auto& [train, test] = cells[{e.attack_name, e.label}];
    (e.split == Split::Train ? train : test) += 1;
  }
  CHECK(cells.size() == 8);
  for (const auto& [key, counts] : cells) {
    CHECK(counts.first == 2);
    CHECK(counts.second == 2);
  }
}

TEST_CASE("derive splits odd N within one file per cell") {
  const fs::path dir = fresh_dir("derive_odd");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 3, 5, 4000);
  const auto registry = registry_with({"echo"}, dir);
  const Manifest manifest =
      derive(base_config(index, dir / "out", 3, 13), registry, AssetStore{});

  std::map<std::pair<std::string, Label>, std::pair<size_t, size_t>> cells;
  for (const auto& e : manifest.entries) {
    auto& [train, test] = cells[{e.attack_name, e.label}];
    (e.split == Split::Train ? train : test) += 1;
  }
  size_t total_train = 0;
  size_t total_test = 0;
  for (const auto& [key, counts] : cells) {
    CHECK(counts.first + counts.second == 3);
    CHECK(std::llabs(static_cast<long long>(counts.first) -
                     static_cast<long long>(counts.second)) <= 1);
    total_train += counts.first;
    total_test += counts.second;
  }
  // Bonafide rounds up, spoof rounds down: overall stays balanced.
  CHECK(total_train == total_test);
}

TEST_CASE("derive is byte-identical across reruns and job counts") {
  const fs::path dir = fresh_dir("derive_repro");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 3, 5, 4000);
  const auto registry = registry_with({"echo", "gaussian_noise", "silence_injection"}, dir);

  auto config1 = base_config(index, dir / "out1", 2, 17);
  config1.jobs = 1;
  auto config2 = base_config(index, dir / "out2", 2, 17);
  config2.jobs = 4;
  derive(config1, registry, AssetStore{});
  derive(config2, registry, AssetStore{});

  CHECK(read_file((dir / "out1/manifest.jsonl").string()) ==
        read_file((dir / "out2/manifest.jsonl").string()));
  CHECK(read_file((dir / "out1/manifest.csv").string()) ==
        read_file((dir / "out2/manifest.csv").string()));

  const Manifest manifest = read_manifest_jsonl((dir / "out1/manifest.jsonl").string());
  for (const auto& e : manifest.entries) {
    CHECK(read_file((dir / "out1" / e.output_path).string()) ==
          read_file((dir / "out2" / e.output_path).string()));
  }
}

TEST_CASE("derive rejects a corpus with too few files per class") {
  const fs::path dir = fresh_dir("derive_insufficient");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 2, 5, 4000);
  const auto registry = registry_with({"echo"}, dir);
  CHECK_THROWS_AS(derive(base_config(index, dir / "out", 3, 1), registry, AssetStore{}),
                  PipelineError);
}

TEST_CASE("derive refuses background attacks without assets before writing") {
  const fs::path dir = fresh_dir("derive_no_assets");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 2, 5, 4000);
  const auto registry = registry_with({"add_background_music"}, dir);
  CHECK_THROWS_AS(derive(base_config(index, dir / "out", 2, 1), registry, AssetStore{}),
                  PipelineError);
  CHECK_FALSE(fs::exists(dir / "out/manifest.jsonl"));
}

TEST_CASE("derive honors the rate normalization flag") {
  const fs::path dir = fresh_dir("derive_rate");
  const std::string index =
      generate_synthetic_corpus((dir / "corpus").string(), 1, 5, 8000, 8000);
  const auto registry = registry_with({"echo"}, dir);

  auto config = base_config(index, dir / "out", 1, 3);
  config.normalize_rate_hz = 16000;
  const Manifest manifest = derive(config, registry, AssetStore{});
  for (const auto& e : manifest.entries) {
    if (e.attack_name == "no_attack") {
      const AudioClip clip = read_wav((dir / "out" / e.output_path).string());
      CHECK(clip.sample_rate_hz == 16000);
      CHECK(clip.size() == 16000);  // 1 s at the normalized rate
    }
  }
}

TEST_CASE("manifest jsonl round-trips") {
  const fs::path dir = fresh_dir("manifest_roundtrip");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 2, 5, 4000);
  const auto registry = registry_with({"echo", "trim_edges"}, dir);
  const Manifest manifest =
      derive(base_config(index, dir / "out", 2, 23), registry, AssetStore{});

  const Manifest loaded = read_manifest_jsonl((dir / "out/manifest.jsonl").string());
  REQUIRE(loaded.entries.size() == manifest.entries.size());
  for (size_t i = 0; i < loaded.entries.size(); ++i) {
    CHECK(loaded.entries[i].source_path == manifest.entries[i].source_path);
    CHECK(loaded.entries[i].output_path == manifest.entries[i].output_path);
    CHECK(loaded.entries[i].label == manifest.entries[i].label);
    CHECK(loaded.entries[i].attack_name == manifest.entries[i].attack_name);
    CHECK(loaded.entries[i].split == manifest.entries[i].split);
    CHECK(loaded.entries[i].params.seed == manifest.entries[i].params.seed);
    CHECK(loaded.entries[i].params.values == manifest.entries[i].params.values);
  }
}

TEST_CASE("manifest entries are sorted by (source_path, attack_name)") {
  const fs::path dir = fresh_dir("manifest_sorted");
  const std::string index = generate_synthetic_corpus((dir / "corpus").string(), 2, 5, 4000);
  const auto registry = registry_with({"echo", "gain_change"}, dir);
  const Manifest manifest =
      derive(base_config(index, dir / "out", 2, 29), registry, AssetStore{});
  for (size_t i = 1; i < manifest.entries.size(); ++i) {
    const auto& a = manifest.entries[i - 1];
    const auto& b = manifest.entries[i];
    CHECK(std::make_pair(a.source_path, a.attack_name) <
          std::make_pair(b.source_path, b.attack_name));
  }
}
