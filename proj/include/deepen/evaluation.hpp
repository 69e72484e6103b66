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
#include "deepen/scorer.hpp"

namespace deepen {

struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-(attack, label) classification accuracy, one column per scorer.
/// Rows are ordered no_attack first, then attacks sorted by name, bonafide
/// before spoof within each attack.
struct AccuracyMatrix {
  std::vector<std::pair<std::string, Label>> rows;
  std::vector<std::string> cols;               // scorer names
  std::vector<std::vector<double>> cells;      // rows x cols, percent in [0, 100]
  std::vector<std::vector<size_t>> counts;     // samples behind each cell
  double threshold = 0.5;
  uint64_t seed = 0;  // provenance: the derivation's master seed (0 if unknown)
};

/// Accuracy deltas of defended scenarios against a baseline: one row per
/// scenario, one column per attack (labels merged), values in percentage
/// points. row_means average the attack columns, excluding no_attack.
struct DeltaMatrix {
  std::vector<std::string> rows;  // scenario names
  std::vector<std::string> cols;  // no_attack first, then attacks sorted
  std::vector<std::vector<double>> cells;
  std::vector<double> row_means;
};

/// Groups the records' manifest entries by (attack, label) and scores each
/// cell as 100 * correct / total under predict(., threshold).
///
/// Requires exactly one record per manifest entry of the given split;
/// missing or duplicate records are errors. Records for paths outside the
/// split are ignored.
AccuracyMatrix accuracy_matrix(const Manifest& manifest, const std::vector<ScoreRecord>& records,
                               double threshold, const std::string& scorer_name,
                               Split split = Split::Test);

/// Cellwise defended - baseline. The operands must have identical rows and
/// the same number of columns; column j of the defended matrix becomes
/// scenario row j, with the two label cells of each attack averaged.
DeltaMatrix delta_matrix(const AccuracyMatrix& defended, const AccuracyMatrix& baseline);

/// Appends the rows of `extra` to `base` (same columns required).
void append_scenarios(DeltaMatrix& base, const DeltaMatrix& extra);

enum class ReportFormat { Csv, Markdown, Html };
ReportFormat report_format_from_string(const std::string& s);

/// Position on the green-to-red gradient for an accuracy cell: 0 at 100%,
/// 1 at 50% and below.
double gradient_position(double accuracy);

/// Two-color linear interpolation, position in [0, 1], as #rrggbb.
std::string gradient_color(double position);

/// CSV renders plain values. Markdown and HTML annotate: accuracy cells
/// below 50 are flagged as a successful attack, cells at or above 50 carry
/// the gradient; delta cells are highlighted only strictly beyond +/-5
/// percentage points.
std::string render_report(const AccuracyMatrix& matrix, ReportFormat format);
std::string render_report(const DeltaMatrix& matrix, ReportFormat format);

void write_accuracy_csv(const AccuracyMatrix& matrix, const std::string& path);
AccuracyMatrix read_accuracy_csv(const std::string& path);
void write_delta_csv(const DeltaMatrix& matrix, const std::string& path);
DeltaMatrix read_delta_csv(const std::string& path);

}  // namespace deepen
