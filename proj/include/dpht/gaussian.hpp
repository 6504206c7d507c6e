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

#include "dpht/filter.hpp"
#include "dpht/lipschitz.hpp"
#include "dpht/mechanisms.hpp"
#include "dpht/rng.hpp"
#include "dpht/statistic.hpp"
#include "dpht/types.hpp"

namespace dpht {

/// Entrywise sign map F(x)_i = sgn(x_i), with sgn(0) := +1. Maps
/// N(0, I) to the uniform distribution over {-1,+1}^d and in general
/// gives per-coordinate means E[F(X)_i] = -erf(-mu_i / sqrt(2)).
inline Dataset sign_reduce(const Dataset& x) {
  if (x.kind != DataKind::Real) {
    throw ValidationError("sign_reduce: requires a Real dataset");
  }
  Dataset out = Dataset::make(DataKind::PM1, x.n, x.d);
  for (std::size_t k = 0; k < x.entries.size(); ++k) {
    out.entries[k] = x.entries[k] < 0.0 ? -1.0 : 1.0;
  }
  return out;
}

/// Checks |erf(-t)| >= 0.84 min(|t|, 1) at t. Holds for every real t;
/// the test suite scans a dense grid.
inline bool erf_min_bound(double t) {
  if (!std::isfinite(t)) throw ValidationError("erf_min_bound: t must be finite");
  return std::fabs(std::erf(-t)) >= 0.84 * std::fmin(std::fabs(t), 1.0);
}

enum class BooleanBackend { Lipschitz, Filter };

/// Distance parameter handed to the Boolean tester by the sign-map
/// reduction: the reduction proof gives ||mu'||_2 > alpha/12 for the
/// image means, which converts to an L1 lower bound via the tau = 1
/// constant c_1 = 1/sqrt(2), i.e. alpha' = alpha / (12 sqrt(2)).
inline double gaussian_reduction_alpha(double alpha) {
  return alpha / (12.0 * std::sqrt(2.0));
}

/// Gaussian mean testing by the sign-map reduction to Boolean
/// uniformity. The Lipschitz backend runs in InSetShortcut mode (this
/// path is for power simulation; privacy audits target the Boolean
/// testers directly).
inline TestOutcome gaussian_test_via_reduction(const Dataset& x,
                                               const PrivacyParams& pp, double alpha,
                                               BooleanBackend backend, Rng& rng) {
  if (x.kind != DataKind::Real) {
    throw ValidationError("gaussian_test_via_reduction: requires a Real dataset");
  }
  pp.validate();
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("gaussian_test_via_reduction: alpha must be in (0, 2]");
  }
  const Dataset y = sign_reduce(x);
  const double alpha_inner = gaussian_reduction_alpha(alpha);

  TestOutcome inner = backend == BooleanBackend::Filter
                          ? uniformity_test_filter(y, pp, alpha_inner, rng).first
                          : uniformity_test_lipschitz(y, pp, alpha_inner,
                                                      ExtensionMode::InSetShortcut,
                                                      rng);
  Trace tr;
  tr.put("tester", "gauss-reduce");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("backend", backend == BooleanBackend::Filter ? "filter" : "lipschitz");
  tr.put("alpha", alpha);
  tr.put("alpha_inner", alpha_inner);
  for (auto& kv : inner.trace.fields) tr.put("inner_" + kv.first, kv.second);
  return inner.accept ? TestOutcome::accepted(std::move(tr))
                      : TestOutcome::rejected(std::move(tr));
}

/// Stage record of the direct Gaussian tester.
struct GaussTrace {
  enum class Stage { None, SampleSize, SignCount, TruncMax, InnerCount, Final };
  Stage stage_rejected = Stage::None;
  double z1 = 0.0, z2 = 0.0, z3 = 0.0, z4 = 0.0;
  double B = 0.0;
  double deff_g = 0.0;
  std::vector<std::int64_t> replaced_rows;

  static const char* stage_name(Stage s) {
    switch (s) {
      case Stage::SampleSize: return "samplesize";
      case Stage::SignCount: return "signcount";
      case Stage::TruncMax: return "truncmax";
      case Stage::InnerCount: return "innercount";
      case Stage::Final: return "final";
      default: return "none";
    }
  }
};

/// Delta_eff^G = 144 (d ln(d/delta) + (d/(n eps^2)) ln^2(1/delta)
///   + sqrt(nd) sqrt(ln(d/delta) ln(n/delta))
///   + (sqrt(d)/eps) ln(1/delta) sqrt(ln(n/delta))) * ln(nd/delta).
inline double deff_gauss(std::int64_t n, std::int64_t d, double epsilon,
                         double delta) {
  const double nn = static_cast<double>(n), dd = static_cast<double>(d);
  const double ld = std::log(dd / delta);
  const double l1 = std::log(1.0 / delta);
  const double ln = std::log(nn / delta);
  const double lnd = std::log(nn * dd / delta);
  return 144.0 *
         (dd * ld + dd / (nn * epsilon * epsilon) * l1 * l1 +
          std::sqrt(nn * dd) * std::sqrt(ld * ln) +
          std::sqrt(dd) / epsilon * l1 * std::sqrt(ln)) *
         lnd;
}

/// Direct (5 eps, 17 delta)-DP Gaussian mean tester.
///
/// Rejects outright when n < max(25 ln(d/delta), (5/eps) ln(1/delta)).
/// Sign counts m_i = c_i/n - 1/2 with c_i = #{j : x_i^(j) <= 0} gate the
/// coordinate means; samples are clamped to [-B, B], B = 3 sqrt(ln(nd/delta));
/// then a noisy max column sum, a privatized column sum with a violator
/// count, filtering by resampling violators from N(0, I), and the final
/// noisy statistic against n^2 alpha^2 / 324. Noise order: r1, r2, R,
/// r3, per-row resamples, r4.
inline std::pair<TestOutcome, GaussTrace> gaussian_test_direct(
    const Dataset& x, const PrivacyParams& pp, double alpha, Rng& rng) {
  if (x.kind != DataKind::Real) {
    throw ValidationError("gaussian_test_direct: requires a Real dataset");
  }
  pp.validate();
  if (!(pp.delta > 0.0)) {
    throw ValidationError("gaussian_test_direct: delta must be in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("gaussian_test_direct: alpha must be in (0, 2]");
  }
  const std::int64_t n = x.n, d = x.d;
  const double nn = static_cast<double>(n), dd = static_cast<double>(d);
  const double eps = pp.epsilon, delta = pp.delta;

  GaussTrace gt;
  gt.B = 3.0 * std::sqrt(std::log(nn * dd / delta));
  gt.deff_g = deff_gauss(n, d, eps, delta);

  Trace tr;
  tr.put("tester", "gauss-direct");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("epsilon", eps);
  tr.put("delta", delta);
  tr.put("alpha", alpha);
  tr.put("B", gt.B);
  tr.put("deff_g", gt.deff_g);

  auto finish = [&](bool accept, GaussTrace::Stage stage) {
    gt.stage_rejected = stage;
    tr.put("stage_rejected", GaussTrace::stage_name(stage));
    tr.put("z1", gt.z1);
    tr.put("z2", gt.z2);
    tr.put("z3", gt.z3);
    tr.put("z4", gt.z4);
    std::string rows;
    for (std::int64_t r : gt.replaced_rows) {
      if (!rows.empty()) rows += ',';
      rows += std::to_string(r);
    }
    tr.put("replaced_rows", rows);
    TestOutcome out = accept ? TestOutcome::accepted(std::move(tr))
                             : TestOutcome::rejected(std::move(tr));
    return std::make_pair(std::move(out), gt);
  };

  // Sample-size floor (data independent).
  if (nn < std::fmax(25.0 * std::log(dd / delta), 5.0 / eps * std::log(1.0 / delta))) {
    return finish(false, GaussTrace::Stage::SampleSize);
  }

  // Sign-count statistics.
  std::vector<std::int64_t> ci(static_cast<std::size_t>(d), 0);
  for (std::int64_t j = 0; j < n; ++j) {
    const double* row = x.row(j);
    for (std::int64_t i = 0; i < d; ++i) {
      if (row[i] <= 0.0) ++ci[static_cast<std::size_t>(i)];
    }
  }
  double max_abs_m = 0.0;
  for (std::int64_t c : ci) {
    max_abs_m = std::fmax(max_abs_m,
                          std::fabs(static_cast<double>(c) / nn - 0.5));
  }
  const double r1 = noise_laplace(1.0 / (eps * nn), pp, rng);
  gt.z1 = max_abs_m + r1;
  if (gt.z1 > std::sqrt(std::log(dd / delta)) / std::sqrt(nn) +
                  std::log(1.0 / delta) / (eps * nn)) {
    return finish(false, GaussTrace::Stage::SignCount);
  }

  // Truncate to [-B, B] (clamping entries, not dropping rows).
  Dataset xt_data = x;
  for (double& e : xt_data.entries) {
    if (e > gt.B) e = gt.B;
    else if (e < -gt.B) e = -gt.B;
  }

  // Noisy max column sum of the truncated data.
  std::vector<double> colsum(static_cast<std::size_t>(d), 0.0);
  for (std::int64_t j = 0; j < n; ++j) {
    const double* row = xt_data.row(j);
    for (std::int64_t i = 0; i < d; ++i) colsum[static_cast<std::size_t>(i)] += row[i];
  }
  double max_abs_col = 0.0;
  for (double c : colsum) max_abs_col = std::fmax(max_abs_col, std::fabs(c));
  const double r2 = noise_laplace(2.0 * gt.B / eps, pp, rng);
  gt.z2 = max_abs_col + r2;
  const double lnd = std::log(nn * dd / delta);
  if (gt.z2 > 3.0 * std::sqrt(2.0 * nn * lnd * std::log(dd / delta)) +
                  6.0 / eps * std::sqrt(lnd) * std::log(1.0 / delta)) {
    return finish(false, GaussTrace::Stage::TruncMax);
  }

  // Privatized column sum and noisy violator count.
  const double sigma = gt.B * std::sqrt(8.0 * dd * std::log(5.0 / (4.0 * delta))) / eps;
  std::vector<double> xt(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < d; ++i) {
    xt[static_cast<std::size_t>(i)] = colsum[static_cast<std::size_t>(i)] +
                                      (pp.noiseless_debug ? 0.0 : sigma * rng.normal());
  }
  const double indicator_threshold =
      gt.deff_g + 36.0 * dd / eps * lnd *
                      std::sqrt(std::log(nn / delta) *
                                std::log(5.0 / (4.0 * delta)));
  std::vector<std::int64_t> violators;
  for (std::int64_t j = 0; j < n; ++j) {
    const double* row = xt_data.row(j);
    double inner = 0.0;
    for (std::int64_t i = 0; i < d; ++i) inner += row[i] * xt[static_cast<std::size_t>(i)];
    if (std::fabs(inner) > indicator_threshold) violators.push_back(j);
  }
  const double r3 = noise_laplace(1.0 / eps, pp, rng);
  gt.z3 = static_cast<double>(violators.size()) + r3;
  if (gt.z3 > std::log(1.0 / delta) / eps) {
    return finish(false, GaussTrace::Stage::InnerCount);
  }

  // Filtering: resample violators from N(0, I).
  for (std::int64_t j : violators) {
    double* row = xt_data.row(j);
    for (std::int64_t i = 0; i < d; ++i) row[i] = rng.normal();
    gt.replaced_rows.push_back(j);
  }

  // Final noisy statistic.
  const double lap_scale =
      (5.0 * gt.deff_g + 432.0 * dd / eps * lnd *
                             std::sqrt(std::log(nn / delta) *
                                       std::log(5.0 / (4.0 * delta)))) /
      eps;
  const double r4 = noise_laplace(lap_scale, pp, rng);
  gt.z4 = statistic_T_real(xt_data) + r4;
  if (gt.z4 > nn * nn * alpha * alpha / 324.0) {
    return finish(false, GaussTrace::Stage::Final);
  }
  return finish(true, GaussTrace::Stage::None);
}

}  // namespace dpht
