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

#include <stdexcept>
#include <string>
#include <vector>

#include "deepen/attack.hpp"

namespace deepen {

struct ManifestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Label { Bonafide, Spoof };
enum class Split { Train, Test };

std::string to_string(Label l);
std::string to_string(Split s);
Label label_from_string(const std::string& s);  // throws ManifestError on unknown labels
Split split_from_string(const std::string& s);

/// One derived file: where it came from, what was done to it, where it went.
/// output_path is relative to the manifest's own directory so a derived set
/// can be moved or compared as a unit.
struct ManifestEntry {
  std::string source_path;
  std::string output_path;
  Label label = Label::Bonafide;
  std::string attack_name;
  AttackParams params;
  Split split = Split::Train;
  bool degenerate = false;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

/// JSON Lines, one entry per line, keys in fixed order.
void write_manifest_jsonl(const Manifest& manifest, const std::string& path);
Manifest read_manifest_jsonl(const std::string& path);

/// Spreadsheet mirror of the same rows; params flattened to k=v;k=v.
void write_manifest_csv(const Manifest& manifest, const std::string& path);

}  // namespace deepen
