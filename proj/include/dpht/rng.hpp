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

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace dpht {

/// Addresses one reproducible random stream. Identical (seed, stream)
/// pairs yield identical draw sequences; disjoint stream ids give
/// independent streams, so parallel trials use stream = trial index.
struct RngHandle {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  return mix64(state);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic generator: xoshiro256++ with its state derived from
/// (seed, stream) through splitmix64. The algorithm is fixed and
/// self-contained so sequences do not depend on the standard library.
class Rng {
 public:
  explicit Rng(RngHandle h) {
    std::uint64_t z = detail::mix64(h.seed + 0x9E3779B97F4A7C15ull);
    z = detail::mix64(z ^ h.stream);
    for (auto& w : s_) w = detail::splitmix_next(z);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RngHandle{seed, stream}) {}

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1); safe as a log/inverse-CDF argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Always consumes exactly two
  /// uniforms, which keeps stream positions predictable.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Exact Poisson draw. Large rates are split into chunks of at most
  /// 500 (sums of independent Poissons), each drawn by CDF inversion.
  std::int64_t poisson(double lambda) {
    std::int64_t total = 0;
    while (lambda > 500.0) {
      total += poisson_inversion(500.0);
      lambda -= 500.0;
    }
    if (lambda > 0.0) total += poisson_inversion(lambda);
    return total;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::int64_t poisson_inversion(double lambda) {
    const double u = uniform_open();
    double p = std::exp(-lambda);
    double cdf = p;
    std::int64_t k = 0;
    // u < 1 strictly, but guard the accumulation against running away.
    const std::int64_t cap =
        static_cast<std::int64_t>(lambda + 60.0 * std::sqrt(lambda) + 120.0);
    while (u > cdf && k < cap) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::uint64_t s_[4];
};

}  // namespace dpht
