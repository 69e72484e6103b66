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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "deepen/rng.hpp"

using namespace deepen;

namespace {

PerformanceMatrix make_matrix(std::vector<std::vector<double>> a) {
  PerformanceMatrix m;
  m.a = std::move(a);
  for (size_t i = 0; i < m.a.size(); ++i) m.defense_names.push_back("defense_" + std::to_string(i));
  for (size_t j = 0; j < m.a[0].size(); ++j) m.attack_names.push_back("attack_" + std::to_string(j));
  return m;
}

// Independent condition checker, written as a literal transcription of the
// two selection conditions with no shared code: defense i qualifies iff some
// column j has (i) no other defense strictly better, with ties going to i
// under the rule, and (ii) a[i][j] >= min_gain.
std::set<size_t> brute_force_select(const PerformanceMatrix& m, double min_gain,
                                    TieRule tie_rule) {
  const size_t rows = m.a.size();
  const size_t cols = m.a[0].size();

  std::vector<double> mean_of_row(rows, 0.0);
  for (size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < cols; ++j) s += m.a[i][j];
    mean_of_row[i] = s / static_cast<double>(cols);
  }

  std::set<size_t> result;
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      if (m.a[i][j] < min_gain) continue;
      bool beaten = false;
      for (size_t other = 0; other < rows && !beaten; ++other) {
        if (other == i) continue;
        if (m.a[other][j] > m.a[i][j]) {
          beaten = true;
        } else if (m.a[other][j] == m.a[i][j]) {
          // Tied: does the other defense win the tie?
          bool other_wins = false;
          if (tie_rule == TieRule::RowMeanThenLex) {
            if (mean_of_row[other] > mean_of_row[i]) {
              other_wins = true;
            } else if (mean_of_row[other] == mean_of_row[i]) {
              other_wins = m.defense_names[other] < m.defense_names[i];
            }
          } else {
            other_wins = m.defense_names[other] < m.defense_names[i];
          }
          if (other_wins) beaten = true;
        }
      }
      if (!beaten) {
        result.insert(i);
        break;
      }
    }
  }
  return result;
}

}  // namespace

TEST_CASE("each defense uniquely best at one column is selected") {
  const auto m = make_matrix({{10, 0}, {0, 10}});
  const auto subset = select_defenses(m, 5.0);
  CHECK(subset.selected == std::set<size_t>{0, 1});
  CHECK(subset.justification.at(0) == std::vector<size_t>{0});
  CHECK(subset.justification.at(1) == std::vector<size_t>{1});
}

TEST_CASE("a dominated defense is never selected") {
  const auto m = make_matrix({{10, 10}, {9, 9}});
  const auto subset = select_defenses(m, 5.0);
  CHECK(subset.selected == std::set<size_t>{0});
}

TEST_CASE("winning a column below the threshold does not qualify") {
  // defense_0 is best at column 0 but +4 < L, failing condition (ii).
  const auto m = make_matrix({{4, 4}, {3, 6}});
  const auto subset = select_defenses(m, 5.0);
  CHECK(subset.selected == std::set<size_t>{1});
  CHECK(subset.justification.at(1) == std::vector<size_t>{1});
}

TEST_CASE("empty selection is legal when nothing clears the threshold") {
  const auto m = make_matrix({{1, 2}, {2, 1}});
  CHECK(select_defenses(m, 5.0).selected.empty());
}

TEST_CASE("row-mean tie rule prefers the broadly useful defense") {
  // Column 0 tied at 8; defense_1 has the greater row mean.
  const auto m = make_matrix({{8, 0}, {8, 3}});
  const auto subset = select_defenses(m, 5.0, TieRule::RowMeanThenLex);
  CHECK(subset.selected == std::set<size_t>{1});

  // Lex rule gives the tie to defense_0 instead.
  const auto lex = select_defenses(m, 5.0, TieRule::Lex);
  CHECK(lex.selected == std::set<size_t>{0});
}

TEST_CASE("fully tied columns fall back to lexicographic names") {
  const auto m = make_matrix({{7, 7}, {7, 7}});
  const auto subset = select_defenses(m, 5.0);
  CHECK(subset.selected == std::set<size_t>{0});  // defense_0 < defense_1
}

TEST_CASE("verify_subset accepts the selector's own output") {
  const auto m = make_matrix({{10, 0}, {0, 10}});
  const auto subset = select_defenses(m, 5.0);
  const auto check = verify_subset(m, subset.selected, 5.0);
  CHECK(check.ok);
  CHECK(check.violations.empty());
}

TEST_CASE("verify_subset reports an excluded qualifying defense") {
  const auto m = make_matrix({{10, 10}, {9, 9}});
  const auto check = verify_subset(m, {1}, 5.0);
  CHECK_FALSE(check.ok);
  REQUIRE(check.violations.size() == 2);
  CHECK(check.violations[0].find("defense_0") != std::string::npos);
  CHECK(check.violations[0].find("excluded") != std::string::npos);
  CHECK(check.violations[1].find("defense_1") != std::string::npos);
}

TEST_CASE("verify_subset accepts the empty set on an all-zero matrix") {
  const auto m = make_matrix({{0, 0}, {0, 0}});
  CHECK(verify_subset(m, {}, 5.0).ok);
}

TEST_CASE("selection matches the brute-force oracle on random matrices") {
  Rng rng(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto rows = static_cast<size_t>(rng.uniform_int(1, 8));
    const auto cols = static_cast<size_t>(rng.uniform_int(1, 8));
    std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
    for (auto& row : a) {
      for (auto& v : row) {
        v = rng.uniform_real(-20.0, 30.0);
        // Quantize some trials so exact ties actually occur.
        if (trial % 3 == 0) v = std::floor(v);
      }
    }
    const auto m = make_matrix(a);
    for (TieRule rule : {TieRule::RowMeanThenLex, TieRule::Lex}) {
      const auto subset = select_defenses(m, 5.0, rule);
      CHECK(subset.selected == brute_force_select(m, 5.0, rule));
      CHECK(verify_subset(m, subset.selected, 5.0, rule).ok);
      CHECK(subset.selected.size() <= std::min(rows, cols));
    }
  }
}

TEST_CASE("selection is monotone in the threshold and invariant to scaling") {
  Rng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = static_cast<size_t>(rng.uniform_int(1, 8));
    const auto cols = static_cast<size_t>(rng.uniform_int(1, 8));
    std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
    for (auto& row : a) {
      for (auto& v : row) v = rng.uniform_real(-20.0, 30.0);
    }
    const auto m = make_matrix(a);

    std::set<size_t> previous;
    bool first = true;
    for (double level : {0.0, 2.0, 5.0, 10.0}) {
      const auto s = select_defenses(m, level).selected;
      if (!first) {
        CHECK(std::includes(previous.begin(), previous.end(), s.begin(), s.end()));
      }
      previous = s;
      first = false;
    }

    const double scale = 3.7;
    auto scaled = a;
    for (auto& row : scaled) {
      for (auto& v : row) v *= scale;
    }
    CHECK(select_defenses(make_matrix(scaled), 5.0 * scale).selected ==
          select_defenses(m, 5.0).selected);
  }
}

TEST_CASE("performance_matrix_from_delta drops the no_attack column") {
  DeltaMatrix d;
  d.rows = {"def_a", "def_b"};
  d.cols = {"no_attack", "echo", "reverb"};
  d.cells = {{0.0, 7.0, 1.0}, {-1.0, 2.0, 9.0}};
  d.row_means = {4.0, 5.5};

  const auto m = performance_matrix_from_delta(d);
  CHECK(m.defense_names == std::vector<std::string>{"def_a", "def_b"});
  CHECK(m.attack_names == std::vector<std::string>{"echo", "reverb"});
  CHECK(m.a == std::vector<std::vector<double>>{{7.0, 1.0}, {2.0, 9.0}});
}

TEST_CASE("performance matrix validation rejects bad shapes and values") {
  PerformanceMatrix empty;
  CHECK_THROWS_AS(empty.validate(), DefenseError);

  auto bad = make_matrix({{1.0, 2.0}});
  bad.a[0][1] = std::nan("");
  CHECK_THROWS_AS(bad.validate(), DefenseError);

  auto ragged = make_matrix({{1.0, 2.0}, {3.0, 4.0}});
  ragged.a[1].pop_back();
  CHECK_THROWS_AS(ragged.validate(), DefenseError);
}

TEST_CASE("subset json names defenses with their covered attacks") {
  const auto m = make_matrix({{10, 0}, {0, 10}});
  const auto subset = select_defenses(m, 5.0);
  const std::string json = subset_to_json(m, subset, 5.0);
  CHECK(json.find("defense_0") != std::string::npos);
  CHECK(json.find("defense_1") != std::string::npos);
  CHECK(json.find("attack_1") != std::string::npos);
  CHECK(json.find("\"min_gain\": 5.0") != std::string::npos);
}

TEST_CASE("tie_rule_from_string") {
  CHECK(tie_rule_from_string("row-mean") == TieRule::RowMeanThenLex);
  CHECK(tie_rule_from_string("lex") == TieRule::Lex);
  CHECK_THROWS_AS(tie_rule_from_string("coin-flip"), DefenseError);
}
