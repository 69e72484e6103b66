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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "deepen/attack.hpp"
#include "deepen/manifest.hpp"

namespace deepen {

struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DerivationConfig {
  std::string index_path;
  size_t n_per_class = 0;
  uint64_t master_seed = 0;
  std::string output_dir;
  double split_ratio = 0.5;
  /// Source clips are resampled to this rate before attack application;
  /// 0 keeps each file's native rate.
  int normalize_rate_hz = 16000;
  int jobs = 1;
};

/// Parses a corpus index. Two formats are auto-detected per line:
///   - CSV: `path,label` with label in {bonafide, spoof} (an optional
///     `path,label` header row is skipped);
///   - ASVspoof-style protocol: whitespace-separated fields whose last token
///     is the label; the second field is the utterance id, mapped to
///     `<utt>.wav`.
/// Relative paths are kept as written; derive() resolves them against the
/// index file's directory.
std::vector<std::pair<std::string, Label>> load_corpus_index(const std::string& path);

/// Builds the penetration set: N seeded source files per class, each pushed
/// through every enabled attack plus `no_attack`, written under
/// `<output_dir>/audio/<attack>/`, with manifest.jsonl, manifest.csv, and
/// meta.json alongside. Deterministic in the config: reruns are
/// byte-identical regardless of `jobs`.
Manifest derive(const DerivationConfig& config, const AttackRegistry& registry,
                const AssetStore& assets);

}  // namespace deepen
