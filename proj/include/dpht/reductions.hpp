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
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dpht/core.hpp"
#include "dpht/filter.hpp"
#include "dpht/gaussian.hpp"
#include "dpht/lipschitz.hpp"
#include "dpht/mechanisms.hpp"
#include "dpht/rng.hpp"
#include "dpht/types.hpp"

namespace dpht {

/// Samples over the domain [1, k].
struct UnivariateSamples {
  std::int64_t k = 0;
  std::vector<std::int64_t> values;

  void validate() const {
    if (k < 1) throw ValidationError("UnivariateSamples: k must be >= 1");
    for (std::int64_t v : values) {
      if (v < 1 || v > k) throw ValidationError("UnivariateSamples: value out of range");
    }
  }

  std::vector<std::int64_t> counts() const {
    std::vector<std::int64_t> c(static_cast<std::size_t>(k), 0);
    for (std::int64_t v : values) ++c[static_cast<std::size_t>(v - 1)];
    return c;
  }
};

// Univariate samples file: header "dpht-univ v1 k=<int> n=<int>",
// then one integer per line.
inline void write_univariate(const UnivariateSamples& s, std::ostream& os) {
  s.validate();
  os << "dpht-univ v1 k=" << s.k << " n=" << s.values.size() << "\n";
  for (std::int64_t v : s.values) os << v << "\n";
}

inline void write_univariate(const UnivariateSamples& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("write_univariate: cannot open " + path);
  write_univariate(s, f);
}

inline UnivariateSamples read_univariate(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ParseError("univ: missing header");
  std::istringstream hs(header);
  std::string magic, version, k_kv, n_kv;
  hs >> magic >> version >> k_kv >> n_kv;
  if (magic != "dpht-univ" || version != "v1" || k_kv.rfind("k=", 0) != 0 ||
      n_kv.rfind("n=", 0) != 0) {
    throw ParseError("univ: malformed header: " + header);
  }
  UnivariateSamples s;
  std::int64_t n = 0;
  try {
    s.k = std::stoll(k_kv.substr(2));
    n = std::stoll(n_kv.substr(2));
  } catch (const std::exception&) {
    throw ParseError("univ: bad k/n in header");
  }
  std::string line;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw ParseError("univ: fewer samples than n");
    s.values.push_back(std::stoll(line));
  }
  s.validate();
  return s;
}

inline UnivariateSamples read_univariate(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("read_univariate: cannot open " + path);
  return read_univariate(f);
}

/// A C-extreme product distribution over {0,1}^d: every coordinate mean
/// is within C/d of 0 or 1, and the oriented (small-side) means sum to
/// at most C.
struct ExtremeSpec {
  std::vector<double> q;  // means over {0,1}^d
  double C = 1.0;

  std::size_t dim() const { return q.size(); }

  void validate() const {
    if (q.empty()) throw ValidationError("ExtremeSpec: d must be >= 1");
    if (!(C > 0.0)) throw ValidationError("ExtremeSpec: C must be positive");
    const double bound = C / static_cast<double>(q.size());
    double oriented_mass = 0.0;
    for (double qi : q) {
      if (!(qi >= 0.0 && qi <= 1.0)) {
        throw ValidationError("ExtremeSpec: mean outside [0, 1]");
      }
      const double small = std::fmin(qi, 1.0 - qi);
      if (small > bound) {
        throw ValidationError("ExtremeSpec: coordinate not within C/d of {0, 1}");
      }
      oriented_mass += small;
    }
    if (oriented_mass > C + 1e-12) {
      throw ValidationError("ExtremeSpec: oriented mass exceeds C");
    }
  }
};

// ---------------------------------------------------------------------------
// {0,1} datasets are carried as Real datasets with exactly 0.0/1.0 entries.
// ---------------------------------------------------------------------------

inline void validate_binary01(const Dataset& x) {
  for (double e : x.entries) {
    if (e != 0.0 && e != 1.0) {
      throw ValidationError("dataset: expected binary {0,1} entries");
    }
  }
}

inline Dataset pm1_to_binary01(const Dataset& x) {
  if (x.kind != DataKind::PM1) throw ValidationError("pm1_to_binary01: needs PM1");
  Dataset out = Dataset::make(DataKind::Real, x.n, x.d);
  for (std::size_t i = 0; i < x.entries.size(); ++i) {
    out.entries[i] = x.entries[i] > 0.0 ? 1.0 : 0.0;
  }
  return out;
}

inline Dataset binary01_to_pm1(const Dataset& x) {
  validate_binary01(x);
  Dataset out = Dataset::make(DataKind::PM1, x.n, x.d);
  for (std::size_t i = 0; i < x.entries.size(); ++i) {
    out.entries[i] = x.entries[i] == 1.0 ? 1.0 : -1.0;
  }
  return out;
}

/// Identity-to-Q -> uniformity reduction. Per sample and coordinate:
/// with probability 1/2 keep X_i, otherwise emit +1 with probability
/// (1 - q_i)/2 and -1 with probability (1 + q_i)/2. Output coordinate
/// means are (E[P_i] - q_i) / 2.
inline Dataset balanced_reduce(const Dataset& x, const ProductSpec& q, Rng& rng) {
  if (x.kind != DataKind::PM1) throw ValidationError("balanced_reduce: needs PM1");
  q.validate();
  if (static_cast<std::int64_t>(q.dim()) != x.d) {
    throw ValidationError("balanced_reduce: dimension mismatch");
  }
  Dataset out = Dataset::make(DataKind::PM1, x.n, x.d);
  for (std::int64_t j = 0; j < x.n; ++j) {
    const double* in_row = x.row(j);
    double* out_row = out.row(j);
    for (std::int64_t i = 0; i < x.d; ++i) {
      if (rng.uniform() < 0.5) {
        out_row[i] = in_row[i];
      } else {
        out_row[i] =
            rng.uniform() < 0.5 * (1.0 - q.means[static_cast<std::size_t>(i)]) ? 1.0
                                                                               : -1.0;
      }
    }
  }
  return out;
}

/// Distance handed to the uniformity backend for a tau-balanced Q:
/// ||p - q||_2 >= alpha sqrt(tau (1 - tau/2)) from the L1 upper bound,
/// halved by the reduction, then turned back into L1 via c_1 = 1/sqrt(2)
/// with the min(.,1) clamp.
inline double balanced_reduction_alpha(double alpha, double tau) {
  return std::fmin(1.0, 0.5 * alpha * std::sqrt(tau * (1.0 - 0.5 * tau))) /
         std::sqrt(2.0);
}

inline TestOutcome identity_test_balanced(const Dataset& x, const ProductSpec& q,
                                          double tau, const PrivacyParams& pp,
                                          double alpha, BooleanBackend backend,
                                          Rng& rng) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError("identity_test_balanced: tau must be in (0, 1]");
  }
  q.validate();
  for (double qi : q.means) {
    if (!(qi >= -1.0 + tau && qi <= 1.0 - tau)) {
      throw ValidationError("identity_test_balanced: Q is not tau-balanced");
    }
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("identity_test_balanced: alpha must be in (0, 2]");
  }
  const Dataset y = balanced_reduce(x, q, rng);
  const double alpha_inner = balanced_reduction_alpha(alpha, tau);
  TestOutcome inner = backend == BooleanBackend::Filter
                          ? uniformity_test_filter(y, pp, alpha_inner, rng).first
                          : uniformity_test_lipschitz(y, pp, alpha_inner,
                                                      ExtensionMode::InSetShortcut,
                                                      rng);
  Trace tr;
  tr.put("tester", "identity-balanced");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("backend", backend == BooleanBackend::Filter ? "filter" : "lipschitz");
  tr.put("tau", tau);
  tr.put("alpha", alpha);
  tr.put("alpha_inner", alpha_inner);
  for (auto& kv : inner.trace.fields) tr.put("inner_" + kv.first, kv.second);
  return inner.accept ? TestOutcome::accepted(std::move(tr))
                      : TestOutcome::rejected(std::move(tr));
}

/// Row map of the extreme -> univariate reduction over {0,1}^d:
/// all-zero row -> d+1; exactly one 1 at position j -> j; else -> d+2.
inline UnivariateSamples extreme_to_univariate(const Dataset& x) {
  validate_binary01(x);
  UnivariateSamples out;
  out.k = x.d + 2;
  out.values.reserve(static_cast<std::size_t>(x.n));
  for (std::int64_t j = 0; j < x.n; ++j) {
    const double* row = x.row(j);
    std::int64_t ones = 0, pos = 0;
    for (std::int64_t i = 0; i < x.d; ++i) {
      if (row[i] == 1.0) {
        ++ones;
        pos = i + 1;
      }
    }
    if (ones == 0) {
      out.values.push_back(x.d + 1);
    } else if (ones == 1) {
      out.values.push_back(pos);
    } else {
      out.values.push_back(x.d + 2);
    }
  }
  return out;
}

enum class GateOutcome { Pass, Fail, Refused };

/// ||p||_inf <= 1/4 vs >= 1/2 gate over {0,1}^d data: Report Noisy Max
/// over the empirical coordinate means (sensitivity 1/n), thresholded
/// at 3/8. Refuses below the documented budget n >= 200 ln(d) / eps.
inline GateOutcome linf_gate(const Dataset& x, const PrivacyParams& pp, Rng& rng) {
  validate_binary01(x);
  pp.validate();
  const double nn = static_cast<double>(x.n);
  if (nn < 200.0 * std::log(static_cast<double>(x.d)) / pp.epsilon) {
    return GateOutcome::Refused;
  }
  std::vector<double> means(static_cast<std::size_t>(x.d), 0.0);
  for (std::int64_t j = 0; j < x.n; ++j) {
    const double* row = x.row(j);
    for (std::int64_t i = 0; i < x.d; ++i) means[static_cast<std::size_t>(i)] += row[i];
  }
  for (double& m : means) m /= nn;
  const NoisyMaxResult r = report_noisy_max(means, 1.0 / nn, pp, rng);
  return r.noisy_value <= 3.0 / 8.0 ? GateOutcome::Pass : GateOutcome::Fail;
}

/// ||p||_1 <= tau vs >= 8 tau gate: the fraction f of rows with at
/// least 8 tau ones, privatized with Lap(1/(n eps)), thresholded at
/// 3/8. Requires tau >= 1 and n >= 400 / eps.
inline GateOutcome l1_gate(const Dataset& x, double tau, const PrivacyParams& pp,
                           Rng& rng) {
  validate_binary01(x);
  pp.validate();
  if (!(tau >= 1.0)) throw ValidationError("l1_gate: tau must be >= 1");
  const double nn = static_cast<double>(x.n);
  if (nn < 400.0 / pp.epsilon) return GateOutcome::Refused;
  std::int64_t heavy = 0;
  for (std::int64_t j = 0; j < x.n; ++j) {
    const double* row = x.row(j);
    double ones = 0.0;
    for (std::int64_t i = 0; i < x.d; ++i) ones += row[i];
    if (ones >= 8.0 * tau) ++heavy;
  }
  const double fhat =
      static_cast<double>(heavy) / nn + noise_laplace(1.0 / (nn * pp.epsilon), pp, rng);
  return fhat <= 3.0 / 8.0 ? GateOutcome::Pass : GateOutcome::Fail;
}

/// Plug-in contract for a univariate identity tester: samples over [k],
/// the reference distribution Q over [k], distance parameter, privacy
/// budget (ignored by non-private plug-ins).
using UnivariateTester = std::function<TestOutcome(
    const UnivariateSamples&, const std::vector<double>&, double,
    const PrivacyParams&, Rng&)>;

/// Non-private chi-square style identity test at constant error 1/5:
///   S = sum_k ((N_k - n q_k)^2 - N_k) / q_k + n, which has
///   E[S] = n(n-1) chi^2(P, Q) under any P; Reject iff S > (1/2) n(n-1) alpha^2.
/// Any observation landing on a zero-mass symbol rejects outright.
/// Needs n >= ~16 sqrt(k) / alpha^2 for the 1/5 error claim (validated
/// by Monte Carlo). The trace is labeled NON-PRIVATE.
inline TestOutcome baseline_univariate_tester(const UnivariateSamples& samples,
                                              const std::vector<double>& q,
                                              double alpha, const PrivacyParams&,
                                              Rng&) {
  samples.validate();
  if (static_cast<std::int64_t>(q.size()) != samples.k) {
    throw ValidationError("baseline_univariate_tester: domain size mismatch");
  }
  double qsum = 0.0;
  for (double qi : q) {
    if (!(qi >= 0.0)) throw ValidationError("baseline_univariate_tester: negative mass");
    qsum += qi;
  }
  if (std::fabs(qsum - 1.0) > 1e-9) {
    throw ValidationError("baseline_univariate_tester: Q does not sum to 1");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("baseline_univariate_tester: alpha must be in (0, 2]");
  }

  const double nn = static_cast<double>(samples.values.size());
  const std::vector<std::int64_t> counts = samples.counts();

  Trace tr;
  tr.put("tester", "baseline-univariate");
  tr.put("private", false);
  tr.put("label", "NON-PRIVATE");
  tr.put("alpha", alpha);

  double stat = nn;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double nk = static_cast<double>(counts[i]);
    if (q[i] == 0.0) {
      if (counts[i] > 0) {
        tr.put("zero_mass_hit", static_cast<std::int64_t>(i + 1));
        tr.put("stat", std::numeric_limits<double>::infinity());
        return TestOutcome::rejected(std::move(tr));
      }
      continue;
    }
    const double dev = nk - nn * q[i];
    stat += (dev * dev - nk) / q[i];
  }
  const double threshold = 0.5 * nn * (nn - 1.0) * alpha * alpha;
  tr.put("stat", stat);
  tr.put("threshold", threshold);
  return stat > threshold ? TestOutcome::rejected(std::move(tr))
                          : TestOutcome::accepted(std::move(tr));
}

/// Univariate reference distribution induced by an oriented extreme
/// product spec q' (all entries <= C/d): Q_univ(j) = (q'_j/(1-q'_j)) Q0,
/// Q_univ(d+1) = Q0 = prod (1-q'_i), Q_univ(d+2) = the rest.
inline std::vector<double> extreme_univariate_reference(
    const std::vector<double>& oriented_q) {
  const std::size_t d = oriented_q.size();
  double q0 = 1.0;
  for (double qi : oriented_q) {
    if (qi >= 1.0) throw ValidationError("extreme reference: coordinate mean is 1");
    q0 *= 1.0 - qi;
  }
  std::vector<double> ref(d + 2, 0.0);
  double acc = q0;
  for (std::size_t i = 0; i < d; ++i) {
    ref[i] = oriented_q[i] / (1.0 - oriented_q[i]) * q0;
    acc += ref[i];
  }
  ref[d] = q0;
  ref[d + 1] = std::fmax(0.0, 1.0 - acc);
  return ref;
}

inline double extreme_reduction_gamma(double C) {
  return std::exp(-C) / (8.0 * (1.0 + 16.0 * std::fmax(1.0, C)));
}

/// Identity testing against an extreme product distribution by
/// reduction to a univariate identity test. Coordinates with q_i > 1/2
/// are flipped first (recorded in the trace); the two gates run at
/// eps/3 each and reject on failure; the mapped samples go to the
/// univariate plug-in at eps/3 with distance gamma * alpha,
/// gamma = e^{-C} / (8 (1 + 16 max(1, C))). Gate refusals propagate as
/// InsufficientSamples.
inline TestOutcome identity_test_extreme(const Dataset& x, const ExtremeSpec& q,
                                         const PrivacyParams& pp, double alpha,
                                         const UnivariateTester& univariate_tester,
                                         Rng& rng) {
  validate_binary01(x);
  q.validate();
  pp.validate();
  if (static_cast<std::int64_t>(q.dim()) != x.d) {
    throw ValidationError("identity_test_extreme: dimension mismatch");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("identity_test_extreme: alpha must be in (0, 2]");
  }

  // Orientation: flip coordinates whose mean is near 1.
  std::vector<bool> flip(q.dim(), false);
  std::vector<double> oriented(q.dim());
  std::string flipped;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    flip[i] = q.q[i] > 0.5;
    oriented[i] = flip[i] ? 1.0 - q.q[i] : q.q[i];
    if (flip[i]) {
      if (!flipped.empty()) flipped += ',';
      flipped += std::to_string(i);
    }
  }
  Dataset xo = x;
  for (std::int64_t j = 0; j < x.n; ++j) {
    double* row = xo.row(j);
    for (std::int64_t i = 0; i < x.d; ++i) {
      if (flip[static_cast<std::size_t>(i)]) row[i] = 1.0 - row[i];
    }
  }

  PrivacyParams gate_pp = pp;
  gate_pp.epsilon = pp.epsilon / 3.0;

  Trace tr;
  tr.put("tester", "identity-extreme");
  tr.put("noiseless", pp.noiseless_debug);
  tr.put("alpha", alpha);
  tr.put("C", q.C);
  tr.put("flipped_coords", flipped);
  const double gamma = extreme_reduction_gamma(q.C);
  tr.put("gamma", gamma);
  tr.put("alpha_univ", gamma * alpha);

  const GateOutcome g1 = linf_gate(xo, gate_pp, rng);
  if (g1 == GateOutcome::Refused) {
    throw InsufficientSamples("identity_test_extreme: linf gate refused (n too small)");
  }
  tr.put("linf_gate", g1 == GateOutcome::Pass ? "pass" : "fail");
  if (g1 == GateOutcome::Fail) {
    tr.put("stage_rejected", "linf_gate");
    return TestOutcome::rejected(std::move(tr));
  }

  const GateOutcome g2 = l1_gate(xo, std::fmax(1.0, q.C), gate_pp, rng);
  if (g2 == GateOutcome::Refused) {
    throw InsufficientSamples("identity_test_extreme: l1 gate refused (n too small)");
  }
  tr.put("l1_gate", g2 == GateOutcome::Pass ? "pass" : "fail");
  if (g2 == GateOutcome::Fail) {
    tr.put("stage_rejected", "l1_gate");
    return TestOutcome::rejected(std::move(tr));
  }

  const UnivariateSamples y = extreme_to_univariate(xo);
  const std::vector<double> ref = extreme_univariate_reference(oriented);
  TestOutcome inner = univariate_tester(y, ref, gamma * alpha, gate_pp, rng);
  for (auto& kv : inner.trace.fields) tr.put("inner_" + kv.first, kv.second);
  if (!inner.accept) {
    tr.put("stage_rejected", "univariate");
    return TestOutcome::rejected(std::move(tr));
  }
  tr.put("stage_rejected", "none");
  return TestOutcome::accepted(std::move(tr));
}

struct PoissonizeResult {
  bool refused = false;
  UnivariateSamples samples;
};

/// Fixed-budget -> Poissonized sampling: draws N ~ Poisson(n), refuses
/// if N > 2n, otherwise returns N of the first 2n provided samples
/// drawn without replacement.
inline PoissonizeResult poissonize(const UnivariateSamples& samples, std::int64_t n,
                                   Rng& rng) {
  samples.validate();
  if (n < 1) throw ValidationError("poissonize: n must be >= 1");
  if (static_cast<std::int64_t>(samples.values.size()) < 2 * n) {
    throw ValidationError("poissonize: need at least 2n input samples");
  }
  PoissonizeResult res;
  res.samples.k = samples.k;
  const std::int64_t N = rng.poisson(static_cast<double>(n));
  if (N > 2 * n) {
    res.refused = true;
    return res;
  }
  std::vector<std::int64_t> pool(samples.values.begin(),
                                 samples.values.begin() + 2 * n);
  // Partial Fisher-Yates: the first N entries after these swaps are a
  // uniform without-replacement draw.
  for (std::int64_t i = 0; i < N; ++i) {
    const std::uint64_t j =
        i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  res.samples.values.assign(pool.begin(), pool.begin() + N);
  return res;
}

struct UnivToExtremeResult {
  bool refused = false;
  std::int64_t rows = 0;  // M
  Dataset data;           // {0,1}^d, M rows (empty when refused)
};

namespace detail {

// Column of `len` slots with exactly `ones` ones, uniformly permuted.
inline std::vector<std::uint8_t> build_binary_column(std::int64_t ones,
                                                     std::int64_t len, Rng& rng) {
  std::vector<std::uint8_t> col(static_cast<std::size_t>(len), 0);
  for (std::int64_t i = 0; i < ones; ++i) col[static_cast<std::size_t>(i)] = 1;
  rng.shuffle(col);
  return col;
}

}  // namespace detail

/// Poissonized univariate -> extreme product samples. Consumes the
/// frequency counts N_i of samples drawn with Poissonized budget 2n,
/// draws M_i ~ Poisson(2n) per coordinate, and builds column i as a
/// uniform permutation of N_i ones among N'_i = N_i + M_i slots. The
/// first M = min_i N'_i rows are i.i.d. from the product distribution
/// with means p_i / (1 + p_i) (Poisson splitting: N_i | N'_i is
/// Bin(N'_i, p_i/(1+p_i)), and M depends on the totals only). Refuses
/// when M < n; otherwise callers keep the first n of the M rows.
inline UnivToExtremeResult univariate_to_extreme(const UnivariateSamples& samples,
                                                 std::int64_t n, Rng& rng) {
  samples.validate();
  if (n < 1) throw ValidationError("univariate_to_extreme: n must be >= 1");
  const std::int64_t d = samples.k;
  const std::vector<std::int64_t> freq = samples.counts();

  std::vector<std::int64_t> slots(static_cast<std::size_t>(d));
  std::int64_t m = -1;
  for (std::int64_t i = 0; i < d; ++i) {
    const std::int64_t mi = rng.poisson(2.0 * static_cast<double>(n));
    slots[static_cast<std::size_t>(i)] = freq[static_cast<std::size_t>(i)] + mi;
    if (m < 0 || slots[static_cast<std::size_t>(i)] < m) {
      m = slots[static_cast<std::size_t>(i)];
    }
  }

  UnivToExtremeResult res;
  res.rows = m;
  if (m < n) {
    res.refused = true;
    return res;
  }
  res.data = Dataset::make(DataKind::Real, m, d);
  for (std::int64_t i = 0; i < d; ++i) {
    const auto col = detail::build_binary_column(freq[static_cast<std::size_t>(i)],
                                                 slots[static_cast<std::size_t>(i)],
                                                 rng);
    for (std::int64_t j = 0; j < m; ++j) {
      res.data.at(j, i) = col[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    }
  }
  return res;
}

}  // namespace dpht
