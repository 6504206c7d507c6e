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
#include <vector>

#include "dpht/types.hpp"

namespace dpht {

/// Core uniformity statistic over a PM1 dataset, kept in exact integer
/// arithmetic: value = sum_i (colsum_i^2 - n) = ||colsum||_2^2 - n*d.
struct StatValue {
  std::int64_t value = 0;
  std::vector<std::int64_t> colsum;
};

/// The Delta of C(Delta).
struct SensitivityBound {
  double delta;
  void validate() const {
    if (!(delta >= 0.0)) throw ValidationError("SensitivityBound: delta must be >= 0");
  }
};

inline std::vector<std::int64_t> column_sums_pm1(const Dataset& x) {
  std::vector<std::int64_t> cs(static_cast<std::size_t>(x.d), 0);
  const double* p = x.entries.data();
  for (std::int64_t j = 0; j < x.n; ++j) {
    for (std::int64_t i = 0; i < x.d; ++i) {
      cs[static_cast<std::size_t>(i)] += *p++ > 0.0 ? 1 : -1;
    }
  }
  return cs;
}

inline StatValue statistic_T(const Dataset& x) {
  if (x.kind != DataKind::PM1) {
    throw ValidationError("statistic_T: requires a PM1 dataset");
  }
  StatValue s;
  s.colsum = column_sums_pm1(x);
  std::int64_t norm2 = 0;
  for (std::int64_t c : s.colsum) norm2 += c * c;
  s.value = norm2 - x.n * x.d;
  return s;
}

/// Statistic for real-valued datasets (Gaussian path): same functional
/// form with real column sums.
inline double statistic_T_real(const Dataset& x) {
  std::vector<double> cs(static_cast<std::size_t>(x.d), 0.0);
  const double* p = x.entries.data();
  for (std::int64_t j = 0; j < x.n; ++j) {
    for (std::int64_t i = 0; i < x.d; ++i) cs[static_cast<std::size_t>(i)] += *p++;
  }
  double t = 0.0;
  for (double c : cs) t += c * c - static_cast<double>(x.n);
  return t;
}

struct InSetResult {
  bool member = false;
  std::int64_t max_abs_inner = 0;
};

/// Membership in C(Delta): every row x must satisfy |<x, colsum>| <= Delta.
/// Also reports max_j |<X^(j), colsum>| (exact integer).
inline InSetResult in_set_C(const Dataset& x, SensitivityBound delta) {
  if (x.kind != DataKind::PM1) throw ValidationError("in_set_C: requires PM1 dataset");
  delta.validate();
  const std::vector<std::int64_t> cs = column_sums_pm1(x);
  std::int64_t max_abs = 0;
  const double* p = x.entries.data();
  for (std::int64_t j = 0; j < x.n; ++j) {
    std::int64_t inner = 0;
    for (std::int64_t i = 0; i < x.d; ++i) {
      const std::int64_t e = *p++ > 0.0 ? 1 : -1;
      inner += e * cs[static_cast<std::size_t>(i)];
    }
    const std::int64_t a = inner < 0 ? -inner : inner;
    if (a > max_abs) max_abs = a;
  }
  return {static_cast<double>(max_abs) <= delta.delta, max_abs};
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact closed-form moments of T under P^n for a product distribution:
///   E[T] = n(n-1) ||p||_2^2
///   Var[T] = 2n(n-1) sum_i (1 + (2n-4) p_i^2 - (2n-3) p_i^4)
inline Moments moments_product(const ProductSpec& p, std::int64_t n) {
  p.validate();
  if (n < 1) throw ValidationError("moments_product: n must be >= 1");
  const double nn = static_cast<double>(n);
  double norm2 = 0.0, var_sum = 0.0;
  for (double pi : p.means) {
    const double p2 = pi * pi;
    norm2 += p2;
    var_sum += 1.0 + (2.0 * nn - 4.0) * p2 - (2.0 * nn - 3.0) * p2 * p2;
  }
  return {nn * (nn - 1.0) * norm2, 2.0 * nn * (nn - 1.0) * var_sum};
}

/// Moments of T for N(mu, I): E[T] = n^2 ||mu||^2, Var = 2n^2 d + 4n^3 ||mu||^2.
inline Moments moments_gaussian(const GaussianSpec& mu, std::int64_t n) {
  mu.validate();
  if (n < 1) throw ValidationError("moments_gaussian: n must be >= 1");
  const double nn = static_cast<double>(n);
  const double norm2 = mu.l2_norm() * mu.l2_norm();
  const double dd = static_cast<double>(mu.dim());
  return {nn * nn * norm2, 2.0 * nn * nn * dd + 4.0 * nn * nn * nn * norm2};
}

/// Non-private baseline: Reject iff T(X) > (1/4) n(n-1) alpha^2.
inline TestOutcome nonprivate_uniformity_test(const Dataset& x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("nonprivate_uniformity_test: alpha must be in (0, 2]");
  }
  const StatValue s = statistic_T(x);
  const double threshold =
      0.25 * static_cast<double>(x.n) * static_cast<double>(x.n - 1) * alpha * alpha;
  Trace tr;
  tr.put("tester", "nonprivate");
  tr.put("private", false);
  tr.put("T", s.value);
  tr.put("threshold", threshold);
  const bool reject = static_cast<double>(s.value) > threshold;
  return reject ? TestOutcome::rejected(std::move(tr))
                : TestOutcome::accepted(std::move(tr));
}

}  // namespace dpht
