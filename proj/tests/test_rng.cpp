//
// Copyright 2026 The dpht Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dpht/rng.hpp"

using dpht::Rng;
using dpht::RngHandle;

TEST_CASE("identical (seed, stream) gives identical sequences", "[rng]") {
  Rng a(RngHandle{42, 7});
  Rng b(RngHandle{42, 7});
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams decorrelate", "[rng]") {
  Rng a(42, 0);
  Rng b(42, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  REQUIRE(equal == 0);
}

TEST_CASE("uniform lands in [0,1) with the right moments", "[rng]") {
  Rng rng(1, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::fabs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
  REQUIRE(std::fabs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("normal moments and tails", "[rng]") {
  Rng rng(3, 5);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  int beyond2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
    if (std::fabs(z) > 2.0) ++beyond2;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  REQUIRE(std::fabs(var - 1.0) < 0.02);
  // P(|Z| > 2) = 2 (1 - Phi(2)) = 0.04550026.
  REQUIRE(std::fabs(static_cast<double>(beyond2) / n - 0.04550026) < 0.003);
}

TEST_CASE("poisson matches exact pmf at small rate", "[rng]") {
  Rng rng(9, 1);
  const double lambda = 3.5;
  const int n = 200000;
  std::vector<int> counts(40, 0);
  for (int i = 0; i < n; ++i) {
    const std::int64_t k = rng.poisson(lambda);
    if (k < 40) ++counts[static_cast<int>(k)];
  }
  double p = std::exp(-lambda);
  for (int k = 0; k < 15; ++k) {
    const double expected = p * n;
    const double se = std::sqrt(expected * (1.0 - p));
    REQUIRE(std::fabs(counts[k] - expected) < 5.0 * se + 5.0);
    p *= lambda / (k + 1);
  }
}

TEST_CASE("poisson moments at large (chunked) rate", "[rng]") {
  Rng rng(10, 2);
  const double lambda = 2000.0;
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(rng.poisson(lambda));
    sum += k;
    sum2 += k * k;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::fabs(mean - lambda) < 4.0 * std::sqrt(lambda / n));
  REQUIRE(std::fabs(var - lambda) < 0.05 * lambda);
}

TEST_CASE("below is unbiased over a small modulus", "[rng]") {
  Rng rng(17, 0);
  std::vector<int> counts(7, 0);
  const int n = 140000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<int>(rng.below(7))];
  for (int c : counts) REQUIRE(std::fabs(c - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
}

TEST_CASE("shuffle is deterministic per handle", "[rng]") {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  Rng a(5, 5), b(5, 5);
  a.shuffle(v1);
  b.shuffle(v2);
  REQUIRE(v1 == v2);
}
