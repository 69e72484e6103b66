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

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepen/evaluation.hpp"

namespace deepen {

struct DefenseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// m defenses x n attacks of accuracy deltas against the no-defense
/// baseline, in percentage points. Row i, column j: how much retraining
/// with defense i helps against attack j.
struct PerformanceMatrix {
  std::vector<std::string> defense_names;
  std::vector<std::string> attack_names;
  std::vector<std::vector<double>> a;

  size_t m() const { return defense_names.size(); }
  size_t n() const { return attack_names.size(); }
  void validate() const;  // throws DefenseError on shape/value problems
};

/// How a tied column maximum is resolved:
///   RowMeanThenLex — the tied defense with the greatest row mean wins,
///     remaining ties break by lexicographically smallest name;
///   Lex — lexicographically smallest name wins outright.
enum class TieRule { RowMeanThenLex, Lex };
TieRule tie_rule_from_string(const std::string& s);

struct DefenseSubset {
  std::set<size_t> selected;
  /// Per selected defense: the attack columns where it is the resolved best
  /// and clears the threshold.
  std::map<size_t, std::vector<size_t>> justification;
};

/// Greedy minimal representative set: defense i is selected iff some attack
/// column j exists where (i) i is the best defense in column j after tie
/// resolution, and (ii) a[i][j] >= min_gain. An empty result is legal (no
/// defense clears min_gain anywhere).
DefenseSubset select_defenses(const PerformanceMatrix& matrix, double min_gain,
                              TieRule tie_rule = TieRule::RowMeanThenLex);

struct SubsetCheck {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Re-derives both conditions from scratch for every defense and reports any
/// disagreement with the proposed subset: selected defenses that qualify
/// nowhere, and excluded defenses that do qualify.
SubsetCheck verify_subset(const PerformanceMatrix& matrix, const std::set<size_t>& subset,
                          double min_gain, TieRule tie_rule = TieRule::RowMeanThenLex);

/// Reinterprets a scenario-by-attack delta table as a performance matrix,
/// dropping the no_attack column (it is not an attack).
PerformanceMatrix performance_matrix_from_delta(const DeltaMatrix& delta);

/// JSON summary of a selection: names, justifications, threshold.
std::string subset_to_json(const PerformanceMatrix& matrix, const DefenseSubset& subset,
                           double min_gain);

}  // namespace deepen
