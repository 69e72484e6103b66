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

#include "deepen/defense.hpp"

#include <cmath>

#include <json.hpp>

namespace deepen {

void PerformanceMatrix::validate() const {
  if (m() == 0 || n() == 0) throw DefenseError("performance matrix must be at least 1x1");
  if (a.size() != m()) throw DefenseError("performance matrix: row count mismatch");
  for (const auto& row : a) {
    if (row.size() != n()) throw DefenseError("performance matrix: column count mismatch");
    for (double v : row) {
      if (!std::isfinite(v)) throw DefenseError("performance matrix: non-finite entry");
    }
  }
}

TieRule tie_rule_from_string(const std::string& s) {
  if (s == "row-mean") return TieRule::RowMeanThenLex;
  if (s == "lex") return TieRule::Lex;
  throw DefenseError("unknown tie rule: " + s + " (expected row-mean or lex)");
}

namespace {

std::vector<double> row_means(const PerformanceMatrix& matrix) {
  std::vector<double> means(matrix.m(), 0.0);
  for (size_t i = 0; i < matrix.m(); ++i) {
    for (double v : matrix.a[i]) means[i] += v;
    means[i] /= static_cast<double>(matrix.n());
  }
  return means;
}

/// The single defense that wins column j after tie resolution.
size_t column_winner(const PerformanceMatrix& matrix, const std::vector<double>& means, size_t j,
                     TieRule tie_rule) {
  double best = matrix.a[0][j];
  for (size_t i = 1; i < matrix.m(); ++i) best = std::max(best, matrix.a[i][j]);

  size_t winner = matrix.m();
  for (size_t i = 0; i < matrix.m(); ++i) {
    if (matrix.a[i][j] != best) continue;
    if (winner == matrix.m()) {
      winner = i;
      continue;
    }
    if (tie_rule == TieRule::RowMeanThenLex) {
      if (means[i] > means[winner] ||
          (means[i] == means[winner] &&
           matrix.defense_names[i] < matrix.defense_names[winner])) {
        winner = i;
      }
    } else {
      if (matrix.defense_names[i] < matrix.defense_names[winner]) winner = i;
    }
  }
  return winner;
}

}  // namespace

DefenseSubset select_defenses(const PerformanceMatrix& matrix, double min_gain,
                              TieRule tie_rule) {
  matrix.validate();
  const auto means = row_means(matrix);

  DefenseSubset subset;
  for (size_t j = 0; j < matrix.n(); ++j) {
    const size_t winner = column_winner(matrix, means, j, tie_rule);
    if (matrix.a[winner][j] >= min_gain) {
      subset.selected.insert(winner);
      subset.justification[winner].push_back(j);
    }
  }
  return subset;
}

SubsetCheck verify_subset(const PerformanceMatrix& matrix, const std::set<size_t>& subset,
                          double min_gain, TieRule tie_rule) {
  matrix.validate();
  const auto means = row_means(matrix);
  SubsetCheck check;

  for (size_t i = 0; i < matrix.m(); ++i) {
    // Condition check from scratch: does defense i win some column at or
    // above the threshold?
    bool qualifies = false;
    size_t witness = 0;
    for (size_t j = 0; j < matrix.n(); ++j) {
      if (column_winner(matrix, means, j, tie_rule) == i && matrix.a[i][j] >= min_gain) {
        qualifies = true;
        witness = j;
        break;
      }
    }
    const bool in_subset = subset.count(i) > 0;
    if (qualifies && !in_subset) {
      check.ok = false;
      check.violations.push_back("defense " + matrix.defense_names[i] +
                                 " qualifies (attack " + matrix.attack_names[witness] +
                                 ") but is excluded");
    }
    if (!qualifies && in_subset) {
      check.ok = false;
      check.violations.push_back("defense " + matrix.defense_names[i] +
                                 " is selected but qualifies nowhere");
    }
  }
  return check;
}

PerformanceMatrix performance_matrix_from_delta(const DeltaMatrix& delta) {
  PerformanceMatrix matrix;
  matrix.defense_names = delta.rows;
  std::vector<size_t> keep;
  for (size_t j = 0; j < delta.cols.size(); ++j) {
    if (delta.cols[j] == "no_attack") continue;
    keep.push_back(j);
    matrix.attack_names.push_back(delta.cols[j]);
  }
  for (const auto& row : delta.cells) {
    std::vector<double> kept;
    for (size_t j : keep) kept.push_back(row[j]);
    matrix.a.push_back(std::move(kept));
  }
  matrix.validate();
  return matrix;
}

std::string subset_to_json(const PerformanceMatrix& matrix, const DefenseSubset& subset,
                           double min_gain) {
  nlohmann::ordered_json doc;
  doc["min_gain"] = min_gain;
  doc["selected"] = nlohmann::ordered_json::array();
  for (size_t i : subset.selected) {
    nlohmann::ordered_json item;
    item["defense"] = matrix.defense_names[i];
    item["covers"] = nlohmann::ordered_json::array();
    for (size_t j : subset.justification.at(i)) {
      nlohmann::ordered_json cover;
      cover["attack"] = matrix.attack_names[j];
      cover["gain"] = matrix.a[i][j];
      item["covers"].push_back(cover);
    }
    doc["selected"].push_back(item);
  }
  return doc.dump(2) + "\n";
}

}  // namespace deepen
