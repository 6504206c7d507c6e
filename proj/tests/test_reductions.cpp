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
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "dpht/core.hpp"
#include "dpht/harness.hpp"
#include "dpht/reductions.hpp"

using namespace dpht;

namespace {

// Exact distribution of the univariate image of a {0,1}^d product
// distribution with means p, by enumerating all 2^d outcomes.
std::vector<double> enumerate_univariate_image(const std::vector<double>& p) {
  const std::size_t d = p.size();
  std::vector<double> out(d + 2, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    double prob = 1.0;
    int ones = 0, pos = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if ((mask >> i) & 1u) {
        prob *= p[i];
        ++ones;
        pos = static_cast<int>(i);
      } else {
        prob *= 1.0 - p[i];
      }
    }
    if (ones == 0) {
      out[d] += prob;  // symbol d+1
    } else if (ones == 1) {
      out[static_cast<std::size_t>(pos)] += prob;
    } else {
      out[d + 1] += prob;  // symbol d+2
    }
  }
  return out;
}

Dataset sample_binary01(const std::vector<double>& p, std::int64_t n, Rng& rng) {
  Dataset ds = Dataset::make(DataKind::Real, n, static_cast<std::int64_t>(p.size()));
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      ds.at(j, static_cast<std::int64_t>(i)) = rng.uniform() < p[i] ? 1.0 : 0.0;
    }
  }
  return ds;
}

// Exact L1 distance between two {0,1}^d product distributions.
double exact_l1_01(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t d = p.size();
  double l1 = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    double pp = 1.0, qq = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const bool one = (mask >> i) & 1u;
      pp *= one ? p[i] : 1.0 - p[i];
      qq *= one ? q[i] : 1.0 - q[i];
    }
    l1 += std::fabs(pp - qq);
  }
  return l1;
}

UnivariateSamples draw_from(const std::vector<double>& dist, std::int64_t n,
                            Rng& rng) {
  UnivariateSamples s;
  s.k = static_cast<std::int64_t>(dist.size());
  s.values.reserve(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    double u = rng.uniform();
    std::int64_t v = s.k;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (u < dist[i]) {
        v = static_cast<std::int64_t>(i) + 1;
        break;
      }
      u -= dist[i];
    }
    s.values.push_back(v);
  }
  return s;
}

}  // namespace

TEST_CASE("balanced reduce: P = Q centers the output", "[reductions]") {
  const ProductSpec q{{0.4, -0.3, 0.1}};
  const std::int64_t n = 100000;
  Rng rng(81, 0);
  const Dataset x = sample_product(q, n, rng);
  const Dataset y = balanced_reduce(x, q, rng);
  for (std::int64_t i = 0; i < 3; ++i) {
    double mean = 0.0;
    for (std::int64_t j = 0; j < n; ++j) mean += y.at(j, i);
    mean /= static_cast<double>(n);
    REQUIRE(std::fabs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("balanced reduce: q = -1 branch emits +1", "[reductions]") {
  // With q_1 = -1 the resample branch emits +1 with probability
  // (1 - (-1))/2 = 1, so every output entry is +1 or a copied input +1.
  const ProductSpec q{{-1.0}};
  Dataset x = Dataset::make(DataKind::PM1, 2000, 1);
  for (double& e : x.entries) e = 1.0;
  Rng rng(82, 0);
  const Dataset y = balanced_reduce(x, q, rng);
  for (double e : y.entries) REQUIRE(e == 1.0);
}

TEST_CASE("balanced reduce: mean map is (p - q)/2", "[reductions]") {
  const std::int64_t n = 100000;
  const ProductSpec p{{0.8}};
  const ProductSpec q{{0.2}};
  Rng rng(83, 0);
  const Dataset x = sample_product(p, n, rng);
  const Dataset y = balanced_reduce(x, q, rng);
  double mean = 0.0;
  for (double e : y.entries) mean += e;
  mean /= static_cast<double>(n);
  REQUIRE(std::fabs(mean - 0.3) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("balanced reduce: uniform Q halves the mean", "[reductions]") {
  const std::int64_t n = 100000;
  const ProductSpec p{{0.6, -0.4}};
  const ProductSpec q{{0.0, 0.0}};
  Rng rng(84, 0);
  const Dataset x = sample_product(p, n, rng);
  const Dataset y = balanced_reduce(x, q, rng);
  for (std::int64_t i = 0; i < 2; ++i) {
    double mean = 0.0;
    for (std::int64_t j = 0; j < n; ++j) mean += y.at(j, i);
    mean /= static_cast<double>(n);
    REQUIRE(std::fabs(mean - 0.5 * p.means[static_cast<std::size_t>(i)]) <=
            4.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("balanced identity tester validates inputs", "[reductions]") {
  Rng rng(85, 0);
  Dataset x = Dataset::make(DataKind::PM1, 4, 1);
  for (double& e : x.entries) e = 1.0;
  const PrivacyParams pp{1.0, 1e-3, false};
  REQUIRE_THROWS_AS(identity_test_balanced(x, ProductSpec{{0.9}}, 0.5, pp, 0.5,
                                           BooleanBackend::Filter, rng),
                    ValidationError);
  REQUIRE_THROWS_AS(identity_test_balanced(x, ProductSpec{{0.0, 0.0}}, 0.5, pp, 0.5,
                                           BooleanBackend::Filter, rng),
                    ValidationError);
}

TEST_CASE("balanced identity tester operating characteristics", "[reductions]") {
  // Q with all means 0.2 is tau-balanced at tau = 0.75; the alternative
  // flips coordinate 0 to -1, so even the first marginal is 1.2-far in L1.
  const std::int64_t n = 10000, d = 10, trials = 120;
  const double tau = 0.75, alpha = 1.2;
  const PrivacyParams pp{1.0, 1e-3, false};
  const ProductSpec q{std::vector<double>(static_cast<std::size_t>(d), 0.2)};
  ProductSpec far = q;
  far.means[0] = -1.0;

  int false_rejects = 0, false_accepts = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng0(86, static_cast<std::uint64_t>(t));
    const Dataset xq = sample_product(q, n, rng0);
    if (!identity_test_balanced(xq, q, tau, pp, alpha, BooleanBackend::Filter, rng0)
             .accept) {
      ++false_rejects;
    }
    Rng rng1(87, static_cast<std::uint64_t>(t));
    const Dataset xf = sample_product(far, n, rng1);
    if (identity_test_balanced(xf, q, tau, pp, alpha, BooleanBackend::Filter, rng1)
            .accept) {
      ++false_accepts;
    }
  }
  REQUIRE(static_cast<double>(false_rejects) / trials <= 1.0 / 3.0 + 0.07);
  REQUIRE(static_cast<double>(false_accepts) / trials <= 1.0 / 3.0 + 0.07);
}

TEST_CASE("extreme row map", "[reductions]") {
  Dataset x = Dataset::make(DataKind::Real, 3, 3);
  const double rows[3][3] = {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) x.at(j, i) = rows[j][i];
  }
  const UnivariateSamples y = extreme_to_univariate(x);
  REQUIRE(y.k == 5);
  REQUIRE(y.values == std::vector<std::int64_t>({4, 2, 5}));

  Dataset bad = Dataset::make(DataKind::Real, 1, 1);
  bad.at(0, 0) = 0.5;
  REQUIRE_THROWS_AS(extreme_to_univariate(bad), ValidationError);
}

TEST_CASE("univariate image matches enumeration exactly at d <= 3", "[reductions]") {
  const std::vector<std::vector<double>> specs{
      {0.1}, {0.3, 0.05}, {0.2, 0.01, 0.4}, {0.0, 0.5, 0.9}};
  for (const auto& p : specs) {
    const std::size_t d = p.size();
    const std::vector<double> image = enumerate_univariate_image(p);
    // Closed form: P_univ(j) = (p_j / (1 - p_j)) P(0), P_univ(d+1) = prod(1 - p_i).
    double p0 = 1.0;
    for (double pi : p) p0 *= 1.0 - pi;
    double mass = p0;
    for (std::size_t j = 0; j < d; ++j) {
      const double expected = p[j] >= 1.0 ? 0.0 : p[j] / (1.0 - p[j]) * p0;
      REQUIRE(std::fabs(image[j] - expected) <= 1e-12);
      mass += expected;
    }
    REQUIRE(std::fabs(image[d] - p0) <= 1e-12);
    REQUIRE(std::fabs(image[d + 1] - (1.0 - mass)) <= 1e-12);
  }
}

TEST_CASE("linf gate basics", "[reductions]") {
  const PrivacyParams noiseless{1.0, 0.0, true};
  Rng rng(88, 0);
  {
    Dataset x = Dataset::make(DataKind::Real, 2000, 4);  // all zeros
    REQUIRE(linf_gate(x, noiseless, rng) == GateOutcome::Pass);
  }
  {
    Dataset x = Dataset::make(DataKind::Real, 2000, 4);
    for (std::int64_t j = 0; j < x.n; ++j) x.at(j, 2) = 1.0;
    REQUIRE(linf_gate(x, noiseless, rng) == GateOutcome::Fail);
  }
  {
    Dataset x = Dataset::make(DataKind::Real, 10, 4);
    REQUIRE(linf_gate(x, noiseless, rng) == GateOutcome::Refused);
  }
}

TEST_CASE("linf gate catches ||p||_inf = 1/2 at the documented budget",
          "[reductions]") {
  const std::int64_t d = 8;
  const double eps = 1.0;
  const std::int64_t n =
      static_cast<std::int64_t>(std::ceil(200.0 * std::log(d) / eps));
  const PrivacyParams pp{eps, 0.0, false};
  std::vector<double> p(static_cast<std::size_t>(d), 0.0);
  p[3] = 0.5;
  const std::int64_t trials = 2000;
  int fails = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(89, static_cast<std::uint64_t>(t));
    const Dataset x = sample_binary01(p, n, rng);
    if (linf_gate(x, pp, rng) == GateOutcome::Fail) ++fails;
  }
  REQUIRE(static_cast<double>(fails) / trials >= 0.95);
}

TEST_CASE("l1 gate basics", "[reductions]") {
  const PrivacyParams noiseless{1.0, 0.0, true};
  Rng rng(90, 0);
  {
    Dataset x = Dataset::make(DataKind::Real, 500, 4);  // all zeros
    REQUIRE(l1_gate(x, 1.0, noiseless, rng) == GateOutcome::Pass);
  }
  {
    Dataset x = Dataset::make(DataKind::Real, 500, 8);
    for (double& e : x.entries) e = 1.0;  // every row has 8 >= 8 tau ones
    REQUIRE(l1_gate(x, 1.0, noiseless, rng) == GateOutcome::Fail);
  }
  {
    Dataset x = Dataset::make(DataKind::Real, 100, 4);
    REQUIRE(l1_gate(x, 1.0, noiseless, rng) == GateOutcome::Refused);
  }
  Dataset x = Dataset::make(DataKind::Real, 500, 4);
  REQUIRE_THROWS_AS(l1_gate(x, 0.5, noiseless, rng), ValidationError);
}

TEST_CASE("l1 gate catches ||p||_1 = 8 tau spread evenly", "[reductions]") {
  const double eps = 1.0, tau = 1.0;
  const std::int64_t n = static_cast<std::int64_t>(400.0 / eps);
  const std::int64_t d = 16;
  const PrivacyParams pp{eps, 0.0, false};
  const std::vector<double> p(static_cast<std::size_t>(d), 0.5);  // ||p||_1 = 8
  const std::int64_t trials = 2000;
  int fails = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(91, static_cast<std::uint64_t>(t));
    const Dataset x = sample_binary01(p, n, rng);
    if (l1_gate(x, tau, pp, rng) == GateOutcome::Fail) ++fails;
  }
  REQUIRE(static_cast<double>(fails) / trials >= 0.9);
}

TEST_CASE("gate privacy audits", "[reductions]") {
  // linf gate at n = 28, d = 2, eps = 5: the pair straddles the 3/8
  // threshold in coordinate 0, so both outputs carry visible mass and
  // the measured ratio is within e^eps.
  {
    const PrivacyParams pp{5.0, 0.0, false};
    auto make = [&](int ones) {
      Dataset ds = Dataset::make(DataKind::Real, 28, 2);
      for (int j = 0; j < ones; ++j) ds.at(j, 0) = 1.0;
      return ds;
    };
    std::vector<std::pair<Dataset, Dataset>> pairs;
    pairs.emplace_back(make(11), make(10));
    const auto fn = [&](const Dataset& x, Rng& rng) {
      return linf_gate(x, pp, rng) == GateOutcome::Pass;
    };
    const AuditReport rep =
        audit_privacy_pairs(fn, "linf-gate", pairs, pp.epsilon, 0.0, 200000, 84, 2);
    REQUIRE(rep.verdict == AuditReport::Verdict::Consistent);
    REQUIRE(rep.eps_hat <= pp.epsilon);
    REQUIRE(rep.eps_hat > 1.0);  // the audit actually measures something
  }
  // l1 gate at n = 80, d = 8, eps = 5: 30 vs 31 all-ones rows sit right
  // at the 3/8 fraction threshold; the exact ratio is e^eps and the
  // Clopper-Pearson slack keeps the estimate below it.
  {
    const PrivacyParams pp{5.0, 0.0, false};
    auto make = [&](int heavy) {
      Dataset ds = Dataset::make(DataKind::Real, 80, 8);
      for (int j = 0; j < heavy; ++j) {
        for (int i = 0; i < 8; ++i) ds.at(j, i) = 1.0;
      }
      return ds;
    };
    std::vector<std::pair<Dataset, Dataset>> pairs;
    pairs.emplace_back(make(30), make(31));
    const auto fn = [&](const Dataset& x, Rng& rng) {
      return l1_gate(x, 1.0, pp, rng) == GateOutcome::Pass;
    };
    const AuditReport rep =
        audit_privacy_pairs(fn, "l1-gate", pairs, pp.epsilon, 0.0, 200000, 85, 2);
    REQUIRE(rep.verdict == AuditReport::Verdict::Consistent);
    REQUIRE(rep.eps_hat <= pp.epsilon);
    REQUIRE(rep.eps_hat > 3.0);
  }
}

TEST_CASE("extreme reduction gamma at C = 1", "[reductions]") {
  REQUIRE(extreme_reduction_gamma(1.0) == Catch::Approx(0.0027056).margin(2e-6));
}

TEST_CASE("extreme identity tester operating characteristics", "[reductions]") {
  // C = 0.5, d = 2, Q = (0.002, 0.002); the far alternative
  // P = (0.35, 0.35) passes both gates (||p||_inf < 3/8) so the
  // univariate stage does the rejecting. alpha is set below the exact
  // L1 distance, so the alternative is honestly alpha-far.
  const std::vector<double> qv{0.002, 0.002};
  const std::vector<double> pv{0.35, 0.35};
  const double l1 = exact_l1_01(pv, qv);
  REQUIRE(l1 >= 1.1);
  const double alpha = 1.1;
  const ExtremeSpec q{qv, 0.5};
  q.validate();

  const std::int64_t n = 600000, trials = 100;
  const PrivacyParams pp{3.0, 0.0, false};
  int false_rejects = 0, false_accepts = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng0(92, static_cast<std::uint64_t>(t));
    const Dataset xq = sample_binary01(qv, n, rng0);
    if (!identity_test_extreme(xq, q, pp, alpha, baseline_univariate_tester, rng0)
             .accept) {
      ++false_rejects;
    }
    Rng rng1(93, static_cast<std::uint64_t>(t));
    const Dataset xp = sample_binary01(pv, n, rng1);
    if (identity_test_extreme(xp, q, pp, alpha, baseline_univariate_tester, rng1)
            .accept) {
      ++false_accepts;
    }
  }
  const double slack = 4.0 * std::sqrt(0.25 / static_cast<double>(trials));
  REQUIRE(1.0 - static_cast<double>(false_rejects) / trials >= 2.0 / 3.0 - slack);
  REQUIRE(static_cast<double>(false_accepts) / trials <= 1.0 / 3.0 + slack);
}

TEST_CASE("extreme identity tester rejects a heavy coordinate via the gate",
          "[reductions]") {
  const std::vector<double> qv{0.01, 0.01, 0.01};
  const ExtremeSpec q{qv, 1.0};
  const std::vector<double> pv{0.9, 0.01, 0.01};
  const std::int64_t n = 3000;
  const PrivacyParams pp{3.0, 0.0, false};
  int rejects = 0;
  for (int t = 0; t < 50; ++t) {
    Rng rng(94, static_cast<std::uint64_t>(t));
    const Dataset x = sample_binary01(pv, n, rng);
    const TestOutcome out =
        identity_test_extreme(x, q, pp, 0.5, baseline_univariate_tester, rng);
    if (!out.accept) ++rejects;
  }
  REQUIRE(rejects >= 45);
}

TEST_CASE("extreme identity tester propagates gate refusals", "[reductions]") {
  const ExtremeSpec q{{0.01, 0.01}, 1.0};
  Dataset x = Dataset::make(DataKind::Real, 20, 2);
  Rng rng(95, 0);
  const PrivacyParams pp{1.0, 0.0, false};
  REQUIRE_THROWS_AS(
      identity_test_extreme(x, q, pp, 0.5, baseline_univariate_tester, rng),
      InsufficientSamples);
}

TEST_CASE("poissonize basics", "[reductions]") {
  UnivariateSamples s;
  s.k = 3;
  for (int i = 0; i < 300; ++i) s.values.push_back(i % 3 + 1);

  Rng short_rng(96, 0);
  REQUIRE_THROWS_AS(poissonize(s, 200, short_rng), ValidationError);

  // Refuse rate <= exp(-n/2) + slack, i.e. essentially never at n = 100.
  int refusals = 0;
  for (int t = 0; t < 10000; ++t) {
    Rng rng(97, static_cast<std::uint64_t>(t));
    const auto r = poissonize(s, 100, rng);
    if (r.refused) {
      ++refusals;
    } else {
      REQUIRE(static_cast<std::int64_t>(r.samples.values.size()) <= 200);
      for (std::int64_t v : r.samples.values) REQUIRE((v >= 1 && v <= 3));
    }
  }
  REQUIRE(refusals == 0);

  Rng a(98, 4), b(98, 4);
  const auto r1 = poissonize(s, 100, a);
  const auto r2 = poissonize(s, 100, b);
  REQUIRE(r1.samples.values == r2.samples.values);

  // An N = 0 draw yields an empty, valid sample list (scan seeds for one;
  // P(Poisson(1) = 0) = 1/e).
  bool saw_empty = false;
  for (int t = 0; t < 100 && !saw_empty; ++t) {
    Rng rng(106, static_cast<std::uint64_t>(t));
    const auto r = poissonize(s, 1, rng);
    if (!r.refused && r.samples.values.empty()) saw_empty = true;
  }
  REQUIRE(saw_empty);
}

TEST_CASE("binary column construction has the exact ones count", "[reductions]") {
  Rng rng(99, 0);
  const auto col = dpht::detail::build_binary_column(5, 12, rng);
  REQUIRE(col.size() == 12);
  int ones = 0;
  for (auto b : col) ones += b;
  REQUIRE(ones == 5);
}

TEST_CASE("univariate-to-extreme means on a point mass", "[reductions]") {
  // P = point mass on symbol 1 over [2], Poissonized budget 2n:
  // coordinate 1 mean -> 1/2 = 1/(1+1), coordinate 2 mean -> 0.
  const std::int64_t n = 1000;
  double sum1 = 0.0, sum2 = 0.0;
  std::int64_t rows = 0;
  for (int t = 0; t < 30; ++t) {
    Rng rng(100, static_cast<std::uint64_t>(t));
    UnivariateSamples s;
    s.k = 2;
    const std::int64_t total = rng.poisson(2.0 * static_cast<double>(n));
    s.values.assign(static_cast<std::size_t>(total), 1);
    const auto r = univariate_to_extreme(s, n, rng);
    REQUIRE_FALSE(r.refused);
    REQUIRE(r.rows >= n);
    for (std::int64_t j = 0; j < r.rows; ++j) {
      sum1 += r.data.at(j, 0);
      sum2 += r.data.at(j, 1);
    }
    rows += r.rows;
  }
  const double se = std::sqrt(0.25 / static_cast<double>(rows));
  REQUIRE(std::fabs(sum1 / static_cast<double>(rows) - 0.5) <= 4.0 * se);
  REQUIRE(sum2 == 0.0);
}

TEST_CASE("univariate-to-extreme refusal stays below 1/10", "[reductions]") {
  // Documented budget n >= 20 ln(max(d, 2)).
  const std::int64_t n = 50, d = 5;
  int refusals = 0;
  for (int t = 0; t < 1000; ++t) {
    Rng rng(101, static_cast<std::uint64_t>(t));
    UnivariateSamples s;
    s.k = d;
    const std::int64_t total = rng.poisson(2.0 * static_cast<double>(n));
    for (std::int64_t j = 0; j < total; ++j) {
      s.values.push_back(1 + static_cast<std::int64_t>(rng.below(d)));
    }
    if (univariate_to_extreme(s, n, rng).refused) ++refusals;
  }
  REQUIRE(static_cast<double>(refusals) / 1000.0 <= 0.1);
}

TEST_CASE("univariate-to-extreme coordinate means at d = 5", "[reductions]") {
  const std::vector<double> p{0.4, 0.3, 0.15, 0.1, 0.05};
  const std::int64_t n = 400;
  std::vector<double> sums(5, 0.0);
  std::int64_t rows = 0;
  for (int t = 0; t < 400; ++t) {
    Rng rng(102, static_cast<std::uint64_t>(t));
    const std::int64_t total = rng.poisson(2.0 * static_cast<double>(n));
    UnivariateSamples s = draw_from(p, total, rng);
    const auto r = univariate_to_extreme(s, n, rng);
    if (r.refused) continue;
    for (std::int64_t j = 0; j < r.rows; ++j) {
      for (int i = 0; i < 5; ++i) sums[static_cast<std::size_t>(i)] += r.data.at(j, i);
    }
    rows += r.rows;
  }
  REQUIRE(rows > 100000);
  for (int i = 0; i < 5; ++i) {
    const double expected = p[static_cast<std::size_t>(i)] /
                            (1.0 + p[static_cast<std::size_t>(i)]);
    const double se = std::sqrt(expected * (1.0 - expected) /
                                static_cast<double>(rows));
    REQUIRE(std::fabs(sums[static_cast<std::size_t>(i)] / rows - expected) <=
            4.0 * se);
  }
}

TEST_CASE("baseline univariate tester", "[reductions]") {
  const std::int64_t k = 10;
  const std::vector<double> q(static_cast<std::size_t>(k), 0.1);
  std::vector<double> p = q;
  p[0] += 0.25;
  p[1] -= 0.25;  // L1 distance exactly 0.5
  const double alpha = 0.5;
  const std::int64_t n = 256, trials = 2000;
  const PrivacyParams pp{1.0, 0.0, false};

  int accepts_null = 0, rejects_alt = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(103, static_cast<std::uint64_t>(t));
    const UnivariateSamples sq = draw_from(q, n, rng);
    if (baseline_univariate_tester(sq, q, alpha, pp, rng).accept) ++accepts_null;
    const UnivariateSamples sp = draw_from(p, n, rng);
    if (!baseline_univariate_tester(sp, q, alpha, pp, rng).accept) ++rejects_alt;
  }
  const double slack = 4.0 * std::sqrt(0.2 * 0.8 / static_cast<double>(trials));
  REQUIRE(static_cast<double>(accepts_null) / trials >= 0.8 - slack);
  REQUIRE(static_cast<double>(rejects_alt) / trials >= 0.8 - slack);

  // Domain size mismatch is a validation error.
  Rng rng(104, 0);
  const UnivariateSamples s = draw_from(q, 10, rng);
  REQUIRE_THROWS_AS(
      baseline_univariate_tester(s, std::vector<double>(5, 0.2), alpha, pp, rng),
      ValidationError);

  // The trace carries the non-private label.
  const UnivariateSamples s2 = draw_from(q, 32, rng);
  const TestOutcome out = baseline_univariate_tester(s2, q, alpha, pp, rng);
  REQUIRE(*out.trace.find("label") == "NON-PRIVATE");
}

TEST_CASE("univariate samples file round trip", "[reductions]") {
  UnivariateSamples s;
  s.k = 7;
  s.values = {1, 7, 3, 3, 2};
  std::stringstream ss;
  write_univariate(s, ss);
  const UnivariateSamples r = read_univariate(ss);
  REQUIRE(r.k == 7);
  REQUIRE(r.values == s.values);

  std::stringstream bad;
  bad << "dpht-univ v1 k=3 n=2\n1\n";
  REQUIRE_THROWS_AS(read_univariate(bad), ParseError);
}

TEST_CASE("extreme spec validation", "[reductions]") {
  const ExtremeSpec ok{{0.01, 0.99}, 1.0};
  REQUIRE_NOTHROW(ok.validate());
  const ExtremeSpec too_balanced{{0.4, 0.4}, 0.5};
  REQUIRE_THROWS_AS(too_balanced.validate(), ValidationError);
  const ExtremeSpec out_of_range{{1.5}, 1.0};
  REQUIRE_THROWS_AS(out_of_range.validate(), ValidationError);
}

TEST_CASE("pm1/binary converters round trip", "[reductions]") {
  Rng rng(105, 0);
  const Dataset x = sample_product(ProductSpec{{0.2, -0.5}}, 100, rng);
  const Dataset b = pm1_to_binary01(x);
  validate_binary01(b);
  const Dataset back = binary01_to_pm1(b);
  REQUIRE(back.entries == x.entries);
}
