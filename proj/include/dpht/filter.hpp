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
#include <string>
#include <utility>
#include <vector>

#include "dpht/core.hpp"
#include "dpht/mechanisms.hpp"
#include "dpht/rng.hpp"
#include "dpht/statistic.hpp"
#include "dpht/types.hpp"

namespace dpht {

/// Stage record of the efficient tester. stage_rejected == None means
/// the run reached the final threshold and the outcome came from z3.
struct FilterTrace {
  enum class Stage { None, Stage1Max, Stage1Count, Final };
  Stage stage_rejected = Stage::None;
  double z1 = 0.0, z2 = 0.0, z3 = 0.0;
  std::vector<std::int64_t> replaced_rows;
  double deff = 0.0;

  static const char* stage_name(Stage s) {
    switch (s) {
      case Stage::Stage1Max: return "stage1max";
      case Stage::Stage1Count: return "stage1count";
      case Stage::Final: return "final";
      default: return "none";
    }
  }
};

struct DeffTerms {
  double t_dlog = 0.0;      // d ln(d/delta)
  double t_dn = 0.0;        // (d / (n eps^2)) ln^2(1/delta)
  double t_sqrtnd = 0.0;    // sqrt(nd) sqrt(ln(d/delta) ln(n/delta))
  double t_sqrtd = 0.0;     // (sqrt(d)/eps) ln(1/delta) sqrt(ln(n/delta))
  double total() const { return 16.0 * (t_dlog + t_dn + t_sqrtnd + t_sqrtd); }
};

inline DeffTerms deff_terms(std::int64_t n, std::int64_t d, double epsilon,
                            double delta) {
  if (n < 1 || d < 1) throw ValidationError("deff: n, d >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("deff: epsilon > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("deff: delta in (0, 1)");
  const double nn = static_cast<double>(n), dd = static_cast<double>(d);
  const double ld = std::log(dd / delta);
  const double l1 = std::log(1.0 / delta);
  const double ln = std::log(nn / delta);
  DeffTerms t;
  t.t_dlog = dd * ld;
  t.t_dn = dd / (nn * epsilon * epsilon) * l1 * l1;
  t.t_sqrtnd = std::sqrt(nn * dd) * std::sqrt(ld * ln);
  t.t_sqrtd = std::sqrt(dd) / epsilon * l1 * std::sqrt(ln);
  return t;
}

/// Delta_eff of the efficient tester, exactly
/// 16 (d ln(d/delta) + (d/(n eps^2)) ln^2(1/delta)
///    + sqrt(nd) sqrt(ln(d/delta) ln(n/delta))
///    + (sqrt(d)/eps) ln(1/delta) sqrt(ln(n/delta))).
inline double deff(std::int64_t n, std::int64_t d, double epsilon, double delta) {
  return deff_terms(n, d, epsilon, delta).total();
}

namespace detail {

// Shared indicator threshold for the stage-1b count and stage-2 filter
// (the privacy argument couples these two counts).
inline double filter_indicator_threshold(double deff_value, std::int64_t d,
                                         std::int64_t n, double epsilon,
                                         double delta) {
  return deff_value + 4.0 * static_cast<double>(d) / epsilon *
                          std::sqrt(std::log(5.0 / (4.0 * delta)) *
                                    std::log(static_cast<double>(n) / delta));
}

}  // namespace detail

/// Efficient (4 eps, 13 delta)-DP uniformity tester.
///
/// Stage 1a: z1 = max_i |colsum_i| + Lap(2/eps);
///           Reject iff z1 > sqrt(2n ln(d/delta)) + (2/eps) ln(1/delta).
/// Stage 1b: Xt = colsum + N(0, sigma^2 I), sigma = sqrt(8 d ln(5/(4 delta)))/eps;
///           z2 = #violators(Xt) + Lap(1/eps); Reject iff z2 > ln(1/delta)/eps.
/// Stage 2:  violating rows are replaced by fresh uniform +-1 rows.
/// Stage 3:  z3 = T(Xhat) + Lap((4 Deff + (48 d/eps) sqrt(ln(5/(4 delta)) ln(n/delta)))/eps);
///           Reject iff z3 > (1/4) n(n-1) alpha^2.
///
/// Noise order is fixed: r1, then the Gaussian vector R, then r2, then
/// per-row resamples in row order, then r3. Noiseless debug runs skip
/// mechanism draws entirely (they consume no randomness).
inline std::pair<TestOutcome, FilterTrace> uniformity_test_filter(
    const Dataset& x, const PrivacyParams& pp, double alpha, Rng& rng) {
  if (x.kind != DataKind::PM1) {
    throw ValidationError("uniformity_test_filter: requires PM1 dataset");
  }
  pp.validate();
  if (!(pp.delta > 0.0)) {
    throw ValidationError("uniformity_test_filter: delta must be in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("uniformity_test_filter: alpha must be in (0, 2]");
  }
  const std::int64_t n = x.n, d = x.d;
  const double nn = static_cast<double>(n), dd = static_cast<double>(d);
  const double eps = pp.epsilon, delta = pp.delta;

  FilterTrace ft;
  ft.deff = deff(n, d, eps, delta);

  Trace tr;
  tr.put("tester", "filter");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("epsilon", eps);
  tr.put("delta", delta);
  tr.put("alpha", alpha);
  tr.put("deff", ft.deff);

  auto finish = [&](bool accept, FilterTrace::Stage stage) {
    ft.stage_rejected = stage;
    tr.put("stage_rejected", FilterTrace::stage_name(stage));
    tr.put("z1", ft.z1);
    tr.put("z2", ft.z2);
    tr.put("z3", ft.z3);
    std::string rows;
    for (std::int64_t r : ft.replaced_rows) {
      if (!rows.empty()) rows += ',';
      rows += std::to_string(r);
    }
    tr.put("replaced_rows", rows);
    TestOutcome out = accept ? TestOutcome::accepted(std::move(tr))
                             : TestOutcome::rejected(std::move(tr));
    return std::make_pair(std::move(out), ft);
  };

  // Stage 1a: noisy max column sum.
  const std::vector<std::int64_t> colsum = column_sums_pm1(x);
  std::int64_t max_abs_col = 0;
  for (std::int64_t c : colsum) max_abs_col = std::max(max_abs_col, c < 0 ? -c : c);
  const double r1 = noise_laplace(2.0 / eps, pp, rng);
  ft.z1 = static_cast<double>(max_abs_col) + r1;
  if (ft.z1 > std::sqrt(2.0 * nn * std::log(dd / delta)) +
                  2.0 / eps * std::log(1.0 / delta)) {
    return finish(false, FilterTrace::Stage::Stage1Max);
  }

  // Stage 1b: privatized column sum and noisy violator count.
  const double sigma = std::sqrt(8.0 * dd * std::log(5.0 / (4.0 * delta))) / eps;
  std::vector<double> xt(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < d; ++i) {
    xt[static_cast<std::size_t>(i)] =
        static_cast<double>(colsum[static_cast<std::size_t>(i)]) +
        (pp.noiseless_debug ? 0.0 : sigma * rng.normal());
  }
  const double indicator_threshold =
      detail::filter_indicator_threshold(ft.deff, d, n, eps, delta);
  std::vector<std::int64_t> violators;
  for (std::int64_t j = 0; j < n; ++j) {
    const double* row = x.row(j);
    double inner = 0.0;
    for (std::int64_t i = 0; i < d; ++i) inner += row[i] * xt[static_cast<std::size_t>(i)];
    if (std::fabs(inner) > indicator_threshold) violators.push_back(j);
  }
  const double r2 = noise_laplace(1.0 / eps, pp, rng);
  ft.z2 = static_cast<double>(violators.size()) + r2;
  if (ft.z2 > std::log(1.0 / delta) / eps) {
    return finish(false, FilterTrace::Stage::Stage1Count);
  }

  // Stage 2: replace violating rows by fresh uniform rows.
  Dataset xhat = x;
  for (std::int64_t j : violators) {
    double* row = xhat.row(j);
    for (std::int64_t i = 0; i < d; ++i) row[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    ft.replaced_rows.push_back(j);
  }

  // Stage 3: noisy statistic against the distance threshold.
  const double lap_scale =
      (4.0 * ft.deff + 48.0 * dd / eps *
                           std::sqrt(std::log(5.0 / (4.0 * delta)) *
                                     std::log(nn / delta))) /
      eps;
  const double r3 = noise_laplace(lap_scale, pp, rng);
  ft.z3 = static_cast<double>(statistic_T(xhat).value) + r3;
  const double final_threshold = 0.25 * nn * (nn - 1.0) * alpha * alpha;
  if (ft.z3 > final_threshold) {
    return finish(false, FilterTrace::Stage::Final);
  }
  return finish(true, FilterTrace::Stage::None);
}

}  // namespace dpht
