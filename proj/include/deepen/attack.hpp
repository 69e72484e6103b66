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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "deepen/audio.hpp"

namespace deepen {

struct RegistryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Where an attack definition comes from: named in the published result
/// tables, or added to fill the registry out to the full attack count.
enum class Provenance { PaperNamed, RegistryFill };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct RealRange {
  double min = 0, max = 0;
};
struct IntRange {
  int64_t min = 0, max = 0;
};
struct ChoiceSet {
  std::vector<double> values;
};
using ParamRange = std::variant<RealRange, IntRange, ChoiceSet>;

/// A named perturbation and the ranges its knobs are drawn from.
struct AttackSpec {
  std::string name;
  std::map<std::string, ParamRange> param_space;  // sorted by name: the sampling order
  Provenance provenance = Provenance::PaperNamed;
  bool enabled = true;
};

/// A concrete instantiation: one sampled value per knob plus the seed that
/// produced them. The seed also drives any per-sample randomness an attack
/// needs when applied (noise realizations, insertion positions).
struct AttackParams {
  std::string attack_name;
  std::map<std::string, double> values;
  uint64_t seed = 0;
};

/// Read-only bank of background material, loaded eagerly from directories of
/// WAV files (sorted by filename so asset indices are stable). Safe to share
/// across threads.
class AssetStore {
 public:
  AssetStore() = default;

  /// Either directory may be empty (""), leaving that asset class absent.
  static AssetStore from_dirs(const std::string& music_dir, const std::string& noise_dir);

  bool has_music() const { return !music_.empty(); }
  bool has_noise() const { return !noise_.empty(); }
  size_t music_count() const { return music_.size(); }
  size_t noise_count() const { return noise_.size(); }
  const AudioClip& music(size_t i) const { return music_.at(i); }
  const AudioClip& noise(size_t i) const { return noise_.at(i); }

 private:
  std::vector<AudioClip> music_;
  std::vector<AudioClip> noise_;
};

/// The attack registry: a fixed set of named specs, immutable once loaded.
class AttackRegistry {
 public:
  /// The default suite: 17 attacks plus the identity `no_attack`.
  static AttackRegistry built_in();

  /// Loads a JSON registry config (see default_registry.json for the schema).
  static AttackRegistry from_json_file(const std::string& path);

  std::string to_json() const;

  const AttackSpec* find(const std::string& name) const;

  /// Enabled attacks excluding `no_attack`, sorted by name. This is K.
  std::vector<const AttackSpec*> enabled_attacks() const;

  const std::vector<AttackSpec>& all() const { return specs_; }

 private:
  void add(AttackSpec spec);
  void validate() const;
  std::vector<AttackSpec> specs_;
};

/// Draws one concrete value per knob, uniformly and independently over each
/// range. Deterministic in (spec, seed): parameters are visited in sorted
/// name order, each consuming one draw from a splitmix64 stream.
AttackParams sample_params(const AttackSpec& spec, uint64_t seed);

struct ApplyResult {
  AudioClip clip;
  /// True when the clip was too short (or silent) for the attack's
  /// structure and was returned unchanged.
  bool degenerate = false;
};

/// Applies the named attack. Pure: the input clip is untouched, the result
/// is bit-identical for identical (params, clip, assets). Output samples are
/// finite and clamped to [-1, 1].
///
/// Throws RegistryError for an unknown attack name and AudioError when a
/// background attack lacks its asset class.
ApplyResult apply_attack(const AttackParams& params, const AudioClip& clip,
                         const AssetStore& assets);

}  // namespace deepen
