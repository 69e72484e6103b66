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

#include "deepen/rng.hpp"

#include <cmath>
#include <set>

#include <doctest.h>

using namespace deepen;

TEST_CASE("rng is deterministic in the seed") {
  Rng a(1234);
  Rng b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(1235);
  Rng d(1234);
  bool all_equal = true;
  for (int i = 0; i < 10; ++i) all_equal = all_equal && (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform draws stay inside their ranges") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double r = rng.uniform_real(-2.5, 3.5);
    CHECK(r >= -2.5);
    CHECK(r <= 3.5);
    const int64_t k = rng.uniform_int(-3, 9);
    CHECK(k >= -3);
    CHECK(k <= 9);
  }
  CHECK(rng.uniform_int(5, 5) == 5);
}

TEST_CASE("uniform_int covers every value of a small range") {
  Rng rng(11);
  std::set<int64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(rng.uniform_int(1, 5));
  CHECK(seen == std::set<int64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("gaussian draws have roughly unit moments") {
  Rng rng(99);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(std::fabs(sum_sq / n - 1.0) < 0.03);
}

TEST_CASE("sample_without_replacement yields unique in-range indices") {
  Rng rng(3);
  const auto picked = rng.sample_without_replacement(50, 20);
  CHECK(picked.size() == 20);
  std::set<size_t> unique(picked.begin(), picked.end());
  CHECK(unique.size() == 20);
  for (size_t i : picked) CHECK(i < 50);

  Rng rng2(3);
  CHECK(rng2.sample_without_replacement(50, 20) == picked);
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64(nullptr, 0) == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a64("foobar", 6) == 0x85944171F73967E8ULL);
}

TEST_CASE("fnv1a64_append chains bytes and integers stably") {
  const uint64_t h1 = fnv1a64_append(0xCBF29CE484222325ULL, std::string_view("ab"));
  const uint64_t h2 =
      fnv1a64_append(fnv1a64_append(0xCBF29CE484222325ULL, std::string_view("a")),
                     std::string_view("b"));
  CHECK(h1 == h2);
  CHECK(fnv1a64_append(0xCBF29CE484222325ULL, uint64_t{42}) !=
        fnv1a64_append(0xCBF29CE484222325ULL, uint64_t{43}));
}
