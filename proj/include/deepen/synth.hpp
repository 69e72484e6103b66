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
#include <string>

#include "deepen/audio.hpp"

namespace deepen {

/// Self-contained test material so the whole pipeline runs without any real
/// corpus: harmonic "voiced" clips stand in for bona-fide recordings and
/// noise-dominated clips for spoofs (the built-in reference scorer separates
/// the two by design).

/// Harmonic tone stack with slow amplitude modulation and a trace of noise.
AudioClip synth_voiced_clip(uint64_t seed, size_t n_samples, int sample_rate_hz);

/// White/pink noise mix with a weak buried tone.
AudioClip synth_noisy_clip(uint64_t seed, size_t n_samples, int sample_rate_hz);

/// Writes `n_per_class` WAVs per label plus an index.csv (path,label with
/// paths relative to the directory). Returns the index path.
std::string generate_synthetic_corpus(const std::string& dir, size_t n_per_class, uint64_t seed,
                                      size_t n_samples = 8000, int sample_rate_hz = 16000);

/// Writes a few deterministic background WAVs: chord loops under music_dir,
/// colored noise under noise_dir.
void generate_synthetic_assets(const std::string& music_dir, const std::string& noise_dir,
                               uint64_t seed, int sample_rate_hz = 16000);

}  // namespace deepen
