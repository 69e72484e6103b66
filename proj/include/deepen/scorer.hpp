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

#include "deepen/manifest.hpp"

namespace deepen {

struct ScorerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A detector's verdict for one derived file. output_path keys into the
/// manifest (relative form, exactly as the manifest spells it).
struct ScoreRecord {
  std::string output_path;
  double spoof_probability = 0.0;
};

enum class ScorerKind { Reference, Subprocess, Http };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::Reference;
  /// Shell command for Subprocess, base URL (scheme://host:port) for Http.
  std::string endpoint_or_cmd;
  /// Column name in result matrices.
  std::string name = "reference";
  double threshold = 0.5;  // must be strictly inside (0, 1)
  size_t batch_size = 16;
  int max_retries = 2;
  int parallelism = 1;
};

/// Parses "reference", "subprocess:CMD", or "http://..." into a config.
ScorerConfig parse_scorer_spec(const std::string& spec);

/// Scores every manifest entry of the given split, in manifest order.
/// `audio_root` is the directory the manifest's output paths are relative
/// to. Transient transport failures are retried up to config.max_retries
/// per batch; protocol violations (malformed responses, probabilities
/// outside [0, 1]) fail immediately and name the offending file.
std::vector<ScoreRecord> score_batch(const Manifest& manifest, Split split,
                                     const ScorerConfig& config, const std::string& audio_root);

/// Hard decision: spoof iff spoof_probability >= threshold.
Label predict(const ScoreRecord& record, double threshold);

/// Built-in deterministic scorer: a fixed logistic over three features of
/// the clip. With flatness = spectral flatness, zcr = zero-crossing rate,
/// and high = fraction of spectral power above 4 kHz:
///
///   score = 1 / (1 + exp(-t)),
///   t = 6*(flatness - 0.2) + 2*(zcr - 0.25) + 2*(high - 0.25)
///
/// Noise-like audio (flat spectrum, busy crossings) scores high (spoof);
/// harmonic audio scores low. Throws ScorerError on an empty clip.
double reference_score(const AudioClip& clip);

/// Batch boundaries [(offset, size), ...] covering n items.
std::vector<std::pair<size_t, size_t>> make_batches(size_t n, size_t batch_size);

void write_scores_csv(const std::vector<ScoreRecord>& records, const ScorerConfig& config,
                      Split split, const std::string& path);
std::vector<ScoreRecord> read_scores_csv(const std::string& path);

}  // namespace deepen
