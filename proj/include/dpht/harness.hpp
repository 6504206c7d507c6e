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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "dpht/core.hpp"
#include "dpht/filter.hpp"
#include "dpht/gaussian.hpp"
#include "dpht/lipschitz.hpp"
#include "dpht/mechanisms.hpp"
#include "dpht/reductions.hpp"
#include "dpht/rng.hpp"
#include "dpht/statistic.hpp"
#include "dpht/types.hpp"

namespace dpht {

namespace detail {

/// Runs tasks 0..count-1 on `workers` threads. Task results must be
/// written to disjoint slots so the outcome is identical for any worker
/// count.
inline void parallel_for(std::int64_t count, int workers,
                         const std::function<void(std::int64_t)>& task) {
  if (workers <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  const int k = std::min<std::int64_t>(workers, count);
  pool.reserve(static_cast<std::size_t>(k));
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= count) return;
        task(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

// Clopper-Pearson binomial bounds at one-sided confidence 1 - gamma.
inline double cp_lower(std::int64_t successes, std::int64_t trials, double gamma) {
  if (successes <= 0) return 0.0;
  if (successes >= trials) return std::pow(gamma, 1.0 / static_cast<double>(trials));
  boost::math::beta_distribution<double> dist(
      static_cast<double>(successes), static_cast<double>(trials - successes + 1));
  return boost::math::quantile(dist, gamma);
}

inline double cp_upper(std::int64_t successes, std::int64_t trials, double gamma) {
  if (successes >= trials) return 1.0;
  if (successes <= 0) return 1.0 - std::pow(gamma, 1.0 / static_cast<double>(trials));
  boost::math::beta_distribution<double> dist(
      static_cast<double>(successes + 1), static_cast<double>(trials - successes));
  return boost::math::quantile(dist, 1.0 - gamma);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tester and distribution descriptors
// ---------------------------------------------------------------------------

enum class TesterKind {
  Filter,
  Lipschitz,
  GaussDirect,
  GaussReduce,
  NonPrivate,
  LaplaceControl,  // audit calibration: eps-DP threshold release
  ConstantAccept,  // audit control: ignores the data
};

inline const char* tester_kind_name(TesterKind k) {
  switch (k) {
    case TesterKind::Filter: return "filter";
    case TesterKind::Lipschitz: return "lipschitz";
    case TesterKind::GaussDirect: return "gauss-direct";
    case TesterKind::GaussReduce: return "gauss-reduce";
    case TesterKind::NonPrivate: return "nonprivate";
    case TesterKind::LaplaceControl: return "laplace-control";
    case TesterKind::ConstantAccept: return "constant-accept";
  }
  return "?";
}

inline TesterKind tester_kind_from_name(const std::string& s) {
  if (s == "filter") return TesterKind::Filter;
  if (s == "lipschitz") return TesterKind::Lipschitz;
  if (s == "gauss-direct") return TesterKind::GaussDirect;
  if (s == "gauss-reduce") return TesterKind::GaussReduce;
  if (s == "nonprivate") return TesterKind::NonPrivate;
  if (s == "laplace-control") return TesterKind::LaplaceControl;
  if (s == "constant-accept") return TesterKind::ConstantAccept;
  throw ValidationError("unknown tester: " + s);
}

struct TesterConfig {
  TesterKind kind = TesterKind::Filter;
  double epsilon = 1.0;
  double delta = 1e-3;
  double alpha = 0.5;
  bool noiseless = false;
  ExtensionMode mode = ExtensionMode::InSetShortcut;       // lipschitz only
  BooleanBackend backend = BooleanBackend::Filter;          // gauss-reduce only

  PrivacyParams privacy() const { return {epsilon, delta, noiseless}; }
};

/// Applies the configured tester; returns true on Accept.
inline bool run_tester(const TesterConfig& tc, const Dataset& x, Rng& rng) {
  const PrivacyParams pp = tc.privacy();
  switch (tc.kind) {
    case TesterKind::Filter:
      return uniformity_test_filter(x, pp, tc.alpha, rng).first.accept;
    case TesterKind::Lipschitz:
      return uniformity_test_lipschitz(x, pp, tc.alpha, tc.mode, rng).accept;
    case TesterKind::GaussDirect:
      return gaussian_test_direct(x, pp, tc.alpha, rng).first.accept;
    case TesterKind::GaussReduce:
      return gaussian_test_via_reduction(x, pp, tc.alpha, tc.backend, rng).accept;
    case TesterKind::NonPrivate:
      return nonprivate_uniformity_test(x, tc.alpha).accept;
    case TesterKind::LaplaceControl: {
      // Releases sum(X) + Lap(2d / eps) thresholded at 0; one row change
      // moves the sum by at most 2d, so this is exactly eps-DP.
      double s = 0.0;
      for (double e : x.entries) s += e;
      const double noise =
          noise_laplace(2.0 * static_cast<double>(x.d) / pp.epsilon, pp, rng);
      return s + noise <= 0.0;
    }
    case TesterKind::ConstantAccept:
      return true;
  }
  return true;
}

struct DistSpec {
  enum class Kind { Product, Gaussian } kind = Kind::Product;
  std::vector<double> means;

  Dataset sample(std::int64_t n, Rng& rng) const {
    if (kind == Kind::Product) return sample_product(ProductSpec{means}, n, rng);
    return sample_gaussian(GaussianSpec{means}, n, rng);
  }
  std::int64_t dim() const { return static_cast<std::int64_t>(means.size()); }
};

// ---------------------------------------------------------------------------
// Power experiments
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  TesterConfig tester;
  DistSpec null_spec;
  DistSpec alt_spec;
  std::vector<std::int64_t> n_grid;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const {
    if (trials < 1) throw ValidationError("ExperimentConfig: trials must be >= 1");
    if (n_grid.empty()) throw ValidationError("ExperimentConfig: empty n grid");
    if (null_spec.means.empty() || alt_spec.means.empty()) {
      throw ValidationError("ExperimentConfig: null/alt specs required");
    }
  }
};

struct PowerRecord {
  std::string tester;
  std::int64_t n = 0;
  std::int64_t d = 0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::string hypothesis;  // "null" or "alt"
  std::int64_t trials = 0;
  std::int64_t rejects = 0;
  double reject_rate = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal approximation
  double seconds = 0.0;       // measured wall time
};

/// One record per (n, hypothesis) cell; trial t uses stream id t, so
/// records are identical for any worker count and byte-identical across
/// runs with the same seed.
inline std::vector<PowerRecord> run_power_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<PowerRecord> records;
  for (const std::int64_t n : cfg.n_grid) {
    for (const int hyp : {0, 1}) {
      const DistSpec& dist = hyp == 0 ? cfg.null_spec : cfg.alt_spec;
      const auto start = std::chrono::steady_clock::now();
      std::vector<std::uint8_t> rejected(static_cast<std::size_t>(cfg.trials), 0);
      detail::parallel_for(cfg.trials, cfg.workers, [&](std::int64_t t) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(t));
        const Dataset x = dist.sample(n, rng);
        rejected[static_cast<std::size_t>(t)] = run_tester(cfg.tester, x, rng) ? 0 : 1;
      });
      PowerRecord rec;
      rec.tester = tester_kind_name(cfg.tester.kind);
      rec.n = n;
      rec.d = dist.dim();
      rec.alpha = cfg.tester.alpha;
      rec.epsilon = cfg.tester.epsilon;
      rec.delta = cfg.tester.delta;
      rec.hypothesis = hyp == 0 ? "null" : "alt";
      rec.trials = cfg.trials;
      for (std::uint8_t r : rejected) rec.rejects += r;
      rec.reject_rate = static_cast<double>(rec.rejects) / static_cast<double>(cfg.trials);
      rec.ci_halfwidth = 1.96 * std::sqrt(rec.reject_rate * (1.0 - rec.reject_rate) /
                                          static_cast<double>(cfg.trials));
      rec.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start).count();
      records.push_back(std::move(rec));
    }
  }
  return records;
}

/// Fixed column schema. `seconds` prints the measurement only when
/// with_timing is set; the default 0 keeps fixed-seed output files
/// byte-identical across runs.
inline void write_power_csv(const std::vector<PowerRecord>& records, std::ostream& os,
                            bool with_timing = false) {
  os << "tester,n,d,alpha,epsilon,delta,hypothesis,trials,rejects,reject_rate,"
        "ci_halfwidth,seconds\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%lld,%lld,%.10g,%.10g,%.10g,%s,%lld,%lld,%.10g,%.10g,%.10g\n",
                  r.tester.c_str(), static_cast<long long>(r.n),
                  static_cast<long long>(r.d), r.alpha, r.epsilon, r.delta,
                  r.hypothesis.c_str(), static_cast<long long>(r.trials),
                  static_cast<long long>(r.rejects), r.reject_rate, r.ci_halfwidth,
                  with_timing ? r.seconds : 0.0);
    os << buf;
  }
}

inline void write_power_csv(const std::vector<PowerRecord>& records,
                            const std::string& path, bool with_timing = false) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("write_power_csv: cannot open " + path);
  write_power_csv(records, f, with_timing);
}

// ---------------------------------------------------------------------------
// Experiment config file: "key = value" lines under [experiment], [null],
// [alt] section headers. '#' starts a comment. Spec means come either as
// an explicit list (means = 0.1, 0.2) or as d = <int> / fill = <real>
// with optional coord<K> = <real> overrides.
// ---------------------------------------------------------------------------

inline ExperimentConfig parse_experiment_config(std::istream& is) {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string section, line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const char* ws = " \t\r\n";
      const std::size_t b = s.find_first_not_of(ws);
      if (b == std::string::npos) return std::string();
      const std::size_t e = s.find_last_not_of(ws);
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError("config line " + std::to_string(lineno) + ": bad section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key = value inside a section");
    }
    sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto get = [&](const std::string& sec, const std::string& key,
                 const char* fallback = nullptr) -> std::string {
    auto s = sections.find(sec);
    if (s != sections.end()) {
      auto k = s->second.find(key);
      if (k != s->second.end()) return k->second;
    }
    if (fallback) return fallback;
    throw ParseError("config: missing " + sec + "." + key);
  };
  auto split_list = [](const std::string& v) {
    std::vector<double> out;
    std::string tok;
    std::istringstream ss(v);
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
  };
  auto parse_dist = [&](const std::string& sec) {
    DistSpec spec;
    const std::string kind = get(sec, "kind");
    if (kind == "product") {
      spec.kind = DistSpec::Kind::Product;
    } else if (kind == "gaussian") {
      spec.kind = DistSpec::Kind::Gaussian;
    } else {
      throw ParseError("config: " + sec + ".kind must be product or gaussian");
    }
    auto s = sections.find(sec);
    if (s->second.count("means")) {
      spec.means = split_list(s->second["means"]);
    } else {
      const std::int64_t d = std::stoll(get(sec, "d"));
      if (d < 1) throw ParseError("config: " + sec + ".d must be >= 1");
      spec.means.assign(static_cast<std::size_t>(d), std::stod(get(sec, "fill", "0")));
    }
    for (const auto& [k, v] : s->second) {
      if (k.rfind("coord", 0) == 0 && k != "coord") {
        const std::size_t idx = std::stoul(k.substr(5));
        if (idx >= spec.means.size()) throw ParseError("config: " + k + " out of range");
        spec.means[idx] = std::stod(v);
      }
    }
    return spec;
  };

  ExperimentConfig cfg;
  cfg.tester.kind = tester_kind_from_name(get("experiment", "tester"));
  cfg.tester.alpha = std::stod(get("experiment", "alpha"));
  cfg.tester.epsilon = std::stod(get("experiment", "epsilon", "1"));
  cfg.tester.delta = std::stod(get("experiment", "delta", "0.001"));
  cfg.tester.noiseless = get("experiment", "noiseless", "0") == "1";
  const std::string mode = get("experiment", "mode", "shortcut");
  cfg.tester.mode = mode == "exact" ? ExtensionMode::ExactBruteForce
                                    : ExtensionMode::InSetShortcut;
  const std::string backend = get("experiment", "backend", "filter");
  cfg.tester.backend =
      backend == "lipschitz" ? BooleanBackend::Lipschitz : BooleanBackend::Filter;
  cfg.trials = std::stoll(get("experiment", "trials"));
  cfg.seed = std::stoull(get("experiment", "seed", "0"));
  for (double v : split_list(get("experiment", "n_grid"))) {
    cfg.n_grid.push_back(static_cast<std::int64_t>(v));
  }
  cfg.null_spec = parse_dist("null");
  cfg.alt_spec = parse_dist("alt");
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("config: cannot open " + path);
  return parse_experiment_config(f);
}

// ---------------------------------------------------------------------------
// Empirical privacy auditor
// ---------------------------------------------------------------------------

struct AuditReport {
  std::string tester;
  std::int64_t n = 0;
  std::int64_t d = 0;
  std::int64_t pairs_examined = 0;
  double eps_hat = 0.0;
  double eps_claimed = 0.0;
  double delta_allowance = 0.0;
  std::int64_t trials = 0;
  enum class Verdict { Consistent, Violated, Inconclusive } verdict =
      Verdict::Inconclusive;

  static const char* verdict_name(Verdict v) {
    switch (v) {
      case Verdict::Consistent: return "Consistent";
      case Verdict::Violated: return "Violated";
      default: return "Inconclusive";
    }
  }

  std::string serialize() const {
    Trace tr;
    tr.put("tester", tester);
    tr.put("n", n);
    tr.put("d", d);
    tr.put("pairs_examined", pairs_examined);
    tr.put("trials", trials);
    tr.put("eps_hat", eps_hat);
    tr.put("eps_claimed", eps_claimed);
    tr.put("delta_allowance", delta_allowance);
    tr.put("verdict", verdict_name(verdict));
    return tr.serialize();
  }
};

using AuditedTester = std::function<bool(const Dataset&, Rng&)>;

namespace detail {

// Per-comparison one-sided confidence for the Clopper-Pearson slack.
// Chosen very small so the calibration control is never flagged
// spuriously; deterministic violations still produce ratio bounds of
// order trials / ln(1/gamma), far above any claimed e^eps.
constexpr double kAuditGamma = 1e-9;

struct AuditCounts {
  std::int64_t accepts = 0;
  std::int64_t trials = 0;
};

inline double pairwise_eps_lb(const AuditCounts& a, const AuditCounts& b,
                              double delta_claimed) {
  // max over output in {accept, reject} of the CP-slacked lower
  // confidence bound on ln((Pr[A(X)=out] - delta) / Pr[A(X')=out]).
  double best = 0.0;
  for (const int out : {0, 1}) {
    const std::int64_t xa = out == 0 ? a.accepts : a.trials - a.accepts;
    const std::int64_t xb = out == 0 ? b.accepts : b.trials - b.accepts;
    const double p_lo = cp_lower(xa, a.trials, kAuditGamma);
    const double q_hi = cp_upper(xb, b.trials, kAuditGamma);
    const double numer = p_lo - delta_claimed;
    if (numer <= 0.0 || q_hi <= 0.0) continue;
    best = std::fmax(best, std::log(numer / q_hi));
  }
  return best;
}

}  // namespace detail

/// Audits a tester on caller-supplied neighboring dataset pairs. Each
/// distinct dataset's acceptance probability is estimated over `trials`
/// runs (stream = dataset index * trials + trial); the verdict compares
/// the worst CP-slacked likelihood-ratio lower bound against
/// e^{eps_claimed} after subtracting delta_claimed.
inline AuditReport audit_privacy_pairs(
    const AuditedTester& tester, const std::string& tester_name,
    const std::vector<std::pair<Dataset, Dataset>>& pairs, double eps_claimed,
    double delta_claimed, std::int64_t trials, std::uint64_t seed, int workers = 1) {
  if (pairs.empty()) throw ValidationError("audit: empty pair list");
  if (trials < 1) throw ValidationError("audit: trials must be >= 1");

  // Deduplicate datasets so each one's probability is estimated once.
  std::vector<const Dataset*> uniq;
  std::vector<std::pair<std::size_t, std::size_t>> pair_idx;
  auto intern = [&](const Dataset& ds) -> std::size_t {
    for (std::size_t i = 0; i < uniq.size(); ++i) {
      if (uniq[i]->n == ds.n && uniq[i]->d == ds.d && uniq[i]->entries == ds.entries) {
        return i;
      }
    }
    uniq.push_back(&ds);
    return uniq.size() - 1;
  };
  for (const auto& [a, b] : pairs) pair_idx.emplace_back(intern(a), intern(b));

  std::vector<detail::AuditCounts> counts(uniq.size());
  detail::parallel_for(static_cast<std::int64_t>(uniq.size()), workers,
                       [&](std::int64_t i) {
                         std::int64_t acc = 0;
                         for (std::int64_t t = 0; t < trials; ++t) {
                           Rng rng(seed, static_cast<std::uint64_t>(i) * trials + t);
                           if (tester(*uniq[static_cast<std::size_t>(i)], rng)) ++acc;
                         }
                         counts[static_cast<std::size_t>(i)] = {acc, trials};
                       });

  AuditReport rep;
  rep.tester = tester_name;
  rep.n = pairs.front().first.n;
  rep.d = pairs.front().first.d;
  rep.pairs_examined = static_cast<std::int64_t>(pairs.size());
  rep.trials = trials;
  rep.eps_claimed = eps_claimed;
  rep.delta_allowance = delta_claimed;
  for (const auto& [ia, ib] : pair_idx) {
    rep.eps_hat = std::fmax(rep.eps_hat, detail::pairwise_eps_lb(counts[ia], counts[ib],
                                                                 delta_claimed));
    rep.eps_hat = std::fmax(rep.eps_hat, detail::pairwise_eps_lb(counts[ib], counts[ia],
                                                                 delta_claimed));
  }
  if (trials < 1000) {
    rep.verdict = AuditReport::Verdict::Inconclusive;
  } else {
    rep.verdict = rep.eps_hat > eps_claimed ? AuditReport::Verdict::Violated
                                            : AuditReport::Verdict::Consistent;
  }
  return rep;
}

/// Enumerates every PM1 dataset at (n, d) (requires n*d <= 8) and every
/// neighboring pair, then audits as above.
inline AuditReport audit_privacy(const AuditedTester& tester,
                                 const std::string& tester_name, std::int64_t n,
                                 std::int64_t d, double eps_claimed,
                                 double delta_claimed, std::int64_t trials,
                                 std::uint64_t seed, int workers = 1) {
  if (n < 1 || d < 1) throw ValidationError("audit: n, d >= 1");
  if (n * d > 8) {
    throw ValidationError("audit: n*d > 8; supply an explicit pair list instead");
  }
  const std::uint32_t total = 1u << (n * d);
  std::vector<Dataset> all;
  all.reserve(total);
  for (std::uint32_t bits = 0; bits < total; ++bits) {
    Dataset ds = Dataset::make(DataKind::PM1, n, d);
    for (std::int64_t j = 0; j < n; ++j) {
      for (std::int64_t i = 0; i < d; ++i) {
        ds.at(j, i) = (bits >> (j * d + i)) & 1u ? 1.0 : -1.0;
      }
    }
    all.push_back(std::move(ds));
  }
  std::vector<std::pair<Dataset, Dataset>> pairs;
  const std::uint32_t row_mask = (1u << d) - 1u;
  for (std::uint32_t a = 0; a < total; ++a) {
    for (std::uint32_t b = a + 1; b < total; ++b) {
      const std::uint32_t diff = a ^ b;
      int rows_differ = 0;
      for (std::int64_t j = 0; j < n; ++j) {
        if ((diff >> (j * d)) & row_mask) ++rows_differ;
      }
      if (rows_differ == 1) pairs.emplace_back(all[a], all[b]);
    }
  }
  return audit_privacy_pairs(tester, tester_name, pairs, eps_claimed, delta_claimed,
                             trials, seed, workers);
}

}  // namespace dpht
