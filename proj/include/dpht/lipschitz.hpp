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
#include <vector>

#include "dpht/mechanisms.hpp"
#include "dpht/rng.hpp"
#include "dpht/statistic.hpp"
#include "dpht/types.hpp"

namespace dpht {

/// Data-independent sequence of sensitivity bounds Delta^(1..M) for the
/// recursive tester, with the derived eps' = eps / M and Delta*.
struct DeltaSchedule {
  std::vector<double> deltas;
  double delta_star = 0.0;
  double eps_prime = 0.0;
  double beta = 0.0;
  int rounds = 0;  // the cap M; deltas.size() <= M
};

enum class ExtensionMode {
  ExactBruteForce,  // 2^(n d) enumeration, only for n*d <= 16
  InSetShortcut,    // T(X) as-is; flags out-of-set inputs (utility only)
};

/// One step of the sensitivity recursion:
///   Delta' = 11 (d + sqrt(nd) + Delta/(n eps') + sqrt(Delta/eps')) ln(1/beta)
inline double next_delta(double delta, std::int64_t n, std::int64_t d,
                         double eps_prime, double beta) {
  const double nn = static_cast<double>(n), dd = static_cast<double>(d);
  const double lb = std::log(1.0 / beta);
  return 11.0 *
         (dd + std::sqrt(nn * dd) + delta / (nn * eps_prime) +
          std::sqrt(delta / eps_prime)) *
         lb;
}

inline double delta_star_for(std::int64_t n, std::int64_t d, double eps_prime,
                             double beta) {
  const double nn = static_cast<double>(n), dd = static_cast<double>(d);
  const double lb = std::log(1.0 / beta);
  return 100.0 * std::fmax(dd, std::fmax(std::sqrt(nn * dd), lb / eps_prime)) * lb;
}

/// Builds the whole schedule up front (the recursion is data-independent).
/// The round cap is M = max(1, ceil(log2(nd / Delta*)) + 2); the circular
/// dependence between M and Delta* is cut by first computing a provisional
/// Delta* at eps' = eps / ceil(log2(nd)). Unexecuted rounds only
/// under-spend the budget, so the accounting eps' = eps / M stays valid.
inline DeltaSchedule build_delta_schedule(std::int64_t n, std::int64_t d,
                                          double epsilon, double beta) {
  if (n < 1 || d < 1) throw ValidationError("build_delta_schedule: n, d >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("build_delta_schedule: epsilon > 0");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ValidationError("build_delta_schedule: beta in (0, 1)");
  }
  const double nd = static_cast<double>(n) * static_cast<double>(d);

  const int m0 = std::max(1, static_cast<int>(std::ceil(std::log2(nd))));
  const double dstar0 = delta_star_for(n, d, epsilon / m0, beta);
  const int cap =
      std::max(1, static_cast<int>(std::ceil(std::log2(nd / dstar0))) + 2);

  DeltaSchedule s;
  s.rounds = cap;
  s.eps_prime = epsilon / cap;
  s.beta = beta;
  s.delta_star = delta_star_for(n, d, s.eps_prime, beta);
  s.deltas.push_back(nd);
  int m = 1;
  while (s.deltas.back() > s.delta_star && m < cap) {
    s.deltas.push_back(next_delta(s.deltas.back(), n, d, s.eps_prime, beta));
    ++m;
  }
  return s;
}

/// Brute-force McShane-Whitney extension of T from C(Delta) at one input:
///   That(X) = min over Y in C(Delta) of [ T(Y) + L * rows_differing(X, Y) ].
/// A minimum of L-Lipschitz functions, hence globally L-Lipschitz in the
/// neighboring metric; agrees with T on C(Delta) in the enumerable range.
/// Empty C(Delta) falls back to the constant 0.
inline double mcshane_whitney_extend(const Dataset& x, SensitivityBound delta,
                                     double lips) {
  if (x.kind != DataKind::PM1) {
    throw ValidationError("mcshane_whitney_extend: requires PM1 dataset");
  }
  delta.validate();
  const std::int64_t n = x.n, d = x.d;
  const std::int64_t nd = n * d;
  if (nd > 16) {
    throw ValidationError("mcshane_whitney_extend: domain too large (n*d > 16)");
  }

  // Bit i of a mask encodes entry (i / d, i % d); set bit = +1.
  std::uint32_t xbits = 0;
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < d; ++i) {
      if (x.at(j, i) > 0.0) xbits |= 1u << (j * d + i);
    }
  }
  const std::uint32_t row_mask = (1u << d) - 1u;
  const std::uint32_t total = 1u << nd;

  bool found = false;
  double best = 0.0;
  std::vector<std::int64_t> cs(static_cast<std::size_t>(d));
  for (std::uint32_t y = 0; y < total; ++y) {
    for (std::int64_t i = 0; i < d; ++i) cs[static_cast<std::size_t>(i)] = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      const std::uint32_t row = (y >> (j * d)) & row_mask;
      for (std::int64_t i = 0; i < d; ++i) {
        cs[static_cast<std::size_t>(i)] += (row >> i) & 1u ? 1 : -1;
      }
    }
    std::int64_t norm2 = 0;
    for (std::int64_t c : cs) norm2 += c * c;

    std::int64_t max_abs = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      const std::uint32_t row = (y >> (j * d)) & row_mask;
      std::int64_t inner = 0;
      for (std::int64_t i = 0; i < d; ++i) {
        inner += ((row >> i) & 1u ? 1 : -1) * cs[static_cast<std::size_t>(i)];
      }
      max_abs = std::max(max_abs, inner < 0 ? -inner : inner);
    }
    if (static_cast<double>(max_abs) > delta.delta) continue;

    std::int64_t dist = 0;
    const std::uint32_t diff = y ^ xbits;
    for (std::int64_t j = 0; j < n; ++j) {
      if ((diff >> (j * d)) & row_mask) ++dist;
    }
    const double cand =
        static_cast<double>(norm2 - nd) + lips * static_cast<double>(dist);
    if (!found || cand < best) {
      best = cand;
      found = true;
    }
  }
  return found ? best : 0.0;
}

namespace detail {

struct ExtensionEval {
  double that = 0.0;
  bool shortcut_out_of_set = false;
};

inline ExtensionEval evaluate_extension(const Dataset& x, double delta,
                                        ExtensionMode mode) {
  ExtensionEval ev;
  if (mode == ExtensionMode::ExactBruteForce) {
    ev.that = mcshane_whitney_extend(x, SensitivityBound{delta}, 4.0 * delta);
  } else {
    ev.that = static_cast<double>(statistic_T(x).value);
    ev.shortcut_out_of_set = !in_set_C(x, SensitivityBound{delta}).member;
  }
  return ev;
}

}  // namespace detail

/// One round of the extension tester:
///   z = That(X) + Lap(4 Delta / eps); Reject iff z > 10 n sqrt(d) + 4 Delta ln(1/beta) / eps.
/// InSetShortcut evaluates T(X) directly and flags out-of-set inputs in
/// the trace (valid for utility simulation only; audits must use
/// ExactBruteForce).
inline TestOutcome lipschitz_extension_test(const Dataset& x,
                                            const PrivacyParams& pp, double delta,
                                            double beta, ExtensionMode mode,
                                            Rng& rng) {
  if (x.kind != DataKind::PM1) {
    throw ValidationError("lipschitz_extension_test: requires PM1 dataset");
  }
  pp.validate();
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ValidationError("lipschitz_extension_test: beta must be in (0, 1]");
  }
  if (!(delta >= 0.0)) throw ValidationError("lipschitz_extension_test: delta >= 0");

  const auto ev = detail::evaluate_extension(x, delta, mode);
  const double r = noise_laplace(4.0 * delta / pp.epsilon, pp, rng);
  const double z = ev.that + r;
  const double threshold =
      10.0 * static_cast<double>(x.n) * std::sqrt(static_cast<double>(x.d)) +
      4.0 * delta * std::log(1.0 / beta) / pp.epsilon;

  Trace tr;
  tr.put("tester", "lipschitz-extension-test");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("mode", mode == ExtensionMode::ExactBruteForce ? "exact" : "shortcut");
  tr.put("delta", delta);
  tr.put("that", ev.that);
  tr.put("z", z);
  tr.put("threshold", threshold);
  tr.put("shortcut_out_of_set", ev.shortcut_out_of_set);
  return z > threshold ? TestOutcome::rejected(std::move(tr))
                       : TestOutcome::accepted(std::move(tr));
}

/// Full recursive private uniformity tester. Runs one extension test per
/// schedule round at eps' = eps / M, then the final noisy statistic at
/// Delta^(M) against (1/4) n(n-1) alpha^2. The trace records each
/// round's Delta and z.
inline TestOutcome uniformity_test_lipschitz(const Dataset& x,
                                             const PrivacyParams& pp, double alpha,
                                             ExtensionMode mode, Rng& rng) {
  if (x.kind != DataKind::PM1) {
    throw ValidationError("uniformity_test_lipschitz: requires PM1 dataset");
  }
  pp.validate();
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("uniformity_test_lipschitz: alpha must be in (0, 2]");
  }

  const double beta = 1.0 / (10.0 * static_cast<double>(x.n));
  const DeltaSchedule sched = build_delta_schedule(x.n, x.d, pp.epsilon, beta);
  PrivacyParams round_pp = pp;
  round_pp.epsilon = sched.eps_prime;

  Trace tr;
  tr.put("tester", "lipschitz");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("mode", mode == ExtensionMode::ExactBruteForce ? "exact" : "shortcut");
  tr.put("epsilon", pp.epsilon);
  tr.put("alpha", alpha);
  tr.put("beta", beta);
  tr.put("rounds_cap", sched.rounds);
  tr.put("eps_prime", sched.eps_prime);
  tr.put("delta_star", sched.delta_star);
  tr.put("schedule_len", static_cast<std::int64_t>(sched.deltas.size()));

  int shortcut_flags = 0;
  for (std::size_t m = 0; m + 1 < sched.deltas.size(); ++m) {
    TestOutcome round = lipschitz_extension_test(x, round_pp, sched.deltas[m], beta,
                                                 mode, rng);
    const std::string tag = "round" + std::to_string(m + 1);
    tr.put(tag + "_delta", sched.deltas[m]);
    if (const std::string* z = round.trace.find("z")) tr.put(tag + "_z", *z);
    if (const std::string* f = round.trace.find("shortcut_out_of_set")) {
      if (*f == "1") ++shortcut_flags;
    }
    if (!round.accept) {
      tr.put("stage_rejected", tag);
      tr.put("shortcut_out_of_set_rounds", shortcut_flags);
      return TestOutcome::rejected(std::move(tr));
    }
  }

  const double delta_final = sched.deltas.back();
  const auto ev = detail::evaluate_extension(x, delta_final, mode);
  if (ev.shortcut_out_of_set) ++shortcut_flags;
  const double r = noise_laplace(4.0 * delta_final / sched.eps_prime, pp, rng);
  const double z = ev.that + r;
  const double threshold =
      0.25 * static_cast<double>(x.n) * static_cast<double>(x.n - 1) * alpha * alpha;
  tr.put("final_delta", delta_final);
  tr.put("final_that", ev.that);
  tr.put("final_z", z);
  tr.put("final_threshold", threshold);
  tr.put("shortcut_out_of_set_rounds", shortcut_flags);
  if (z > threshold) {
    tr.put("stage_rejected", "final");
    return TestOutcome::rejected(std::move(tr));
  }
  tr.put("stage_rejected", "none");
  return TestOutcome::accepted(std::move(tr));
}

}  // namespace dpht
