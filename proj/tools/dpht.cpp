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

// Command line front end: sample, test, reduce, experiment, audit.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpht/dpht.hpp"

namespace {

std::vector<double> parse_means(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw dpht::ParseError("cannot open output file " + out_path);
    f << text;
  }
}

void banner_if_noiseless(bool noiseless) {
  if (noiseless) {
    std::cerr << "*** NON-PRIVATE: noiseless debug mode, all mechanism draws are 0 ***\n";
  }
}

struct SampleArgs {
  std::string kind = "product";
  std::string means_csv;
  std::int64_t d = 0;
  double fill = 0.0;
  std::int64_t n = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  std::vector<double> means =
      a.means_csv.empty() ? std::vector<double>(static_cast<std::size_t>(a.d), a.fill)
                          : parse_means(a.means_csv);
  dpht::Rng rng(a.seed, a.stream);
  dpht::Dataset ds = a.kind == "product"
                         ? dpht::sample_product(dpht::ProductSpec{means}, a.n, rng)
                         : dpht::sample_gaussian(dpht::GaussianSpec{means}, a.n, rng);
  dpht::write_dataset(ds, a.out);
  std::cout << "wrote " << a.out << " (" << ds.n << " x " << ds.d << ")\n";
  return 0;
}

struct TestArgs {
  std::string tester = "filter";
  std::string in;
  double alpha = 0.5;
  double epsilon = 1.0;
  double delta = 1e-3;
  std::string mode = "shortcut";
  std::string backend = "filter";
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool noiseless = false;
  std::string out;
};

int cmd_test(const TestArgs& a) {
  banner_if_noiseless(a.noiseless);
  const dpht::Dataset x = dpht::read_dataset(a.in);
  const dpht::PrivacyParams pp{a.epsilon, a.delta, a.noiseless};
  dpht::Rng rng(a.seed, a.stream);

  dpht::TestOutcome out{true, {}};
  if (a.tester == "nonprivate") {
    out = dpht::nonprivate_uniformity_test(x, a.alpha);
  } else if (a.tester == "filter") {
    out = dpht::uniformity_test_filter(x, pp, a.alpha, rng).first;
  } else if (a.tester == "lipschitz") {
    const dpht::ExtensionMode mode = a.mode == "exact"
                                         ? dpht::ExtensionMode::ExactBruteForce
                                         : dpht::ExtensionMode::InSetShortcut;
    out = dpht::uniformity_test_lipschitz(x, pp, a.alpha, mode, rng);
  } else if (a.tester == "gauss-direct") {
    out = dpht::gaussian_test_direct(x, pp, a.alpha, rng).first;
  } else if (a.tester == "gauss-reduce") {
    const dpht::BooleanBackend backend = a.backend == "lipschitz"
                                             ? dpht::BooleanBackend::Lipschitz
                                             : dpht::BooleanBackend::Filter;
    out = dpht::gaussian_test_via_reduction(x, pp, a.alpha, backend, rng);
  } else {
    throw dpht::ValidationError("unknown tester " + a.tester);
  }

  std::string text = std::string("outcome=") + (out.accept ? "ACCEPT" : "REJECT") + "\n";
  text += out.trace.serialize();
  emit(text, a.out);
  return 0;
}

struct ReduceArgs {
  std::string kind = "sign";
  std::string in;
  std::string out;
  std::string q_csv;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

int cmd_reduce(const ReduceArgs& a) {
  dpht::Rng rng(a.seed, a.stream);
  if (a.kind == "sign") {
    dpht::write_dataset(dpht::sign_reduce(dpht::read_dataset(a.in)), a.out);
  } else if (a.kind == "balanced") {
    if (a.q_csv.empty()) throw dpht::ValidationError("balanced reduce needs --q");
    const dpht::Dataset x = dpht::read_dataset(a.in);
    dpht::write_dataset(
        dpht::balanced_reduce(x, dpht::ProductSpec{parse_means(a.q_csv)}, rng), a.out);
  } else if (a.kind == "extreme2uni") {
    const dpht::Dataset x = dpht::read_dataset(a.in);
    dpht::write_univariate(dpht::extreme_to_univariate(x), a.out);
  } else if (a.kind == "uni2extreme") {
    if (a.n < 1) throw dpht::ValidationError("uni2extreme needs --n >= 1");
    const dpht::UnivariateSamples s = dpht::read_univariate(a.in);
    const auto r = dpht::univariate_to_extreme(s, a.n, rng);
    if (r.refused) {
      std::cout << "refused=1\n";
      return 3;
    }
    dpht::write_dataset(r.data, a.out);
  } else {
    throw dpht::ValidationError("unknown reduce kind " + a.kind);
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  int workers = 1;
  bool timing = false;
  bool noiseless = false;
  std::int64_t seed_override = -1;
};

int cmd_experiment(const ExperimentArgs& a) {
  dpht::ExperimentConfig cfg = dpht::parse_experiment_config(a.config);
  cfg.workers = a.workers;
  if (a.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed_override);
  if (a.noiseless) cfg.tester.noiseless = true;
  banner_if_noiseless(cfg.tester.noiseless);
  const auto records = dpht::run_power_experiment(cfg);
  if (a.out.empty()) {
    dpht::write_power_csv(records, std::cout, a.timing);
  } else {
    dpht::write_power_csv(records, a.out, a.timing);
    std::cout << "wrote " << a.out << " (" << records.size() << " records)\n";
  }
  return 0;
}

struct AuditArgs {
  std::string tester = "filter";
  std::int64_t n = 2;
  std::int64_t d = 2;
  double alpha = 0.5;
  double epsilon = 0.5;
  double delta = 0.05;
  double eps_claimed = 2.0;
  double delta_claimed = 0.65;
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
};

int cmd_audit(const AuditArgs& a) {
  dpht::TesterConfig tc;
  tc.kind = dpht::tester_kind_from_name(a.tester);
  tc.epsilon = a.epsilon;
  tc.delta = a.delta;
  tc.alpha = a.alpha;
  tc.mode = dpht::ExtensionMode::ExactBruteForce;  // audits need the real extension
  const auto fn = [&](const dpht::Dataset& x, dpht::Rng& rng) {
    return dpht::run_tester(tc, x, rng);
  };
  const dpht::AuditReport rep =
      dpht::audit_privacy(fn, a.tester, a.n, a.d, a.eps_claimed, a.delta_claimed,
                          a.trials, a.seed, a.workers);
  emit(rep.serialize(), a.out);
  return rep.verdict == dpht::AuditReport::Verdict::Violated ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private identity testing toolkit"};
  app.require_subcommand(1);

  SampleArgs sa;
  CLI::App* sample = app.add_subcommand("sample", "draw a dataset and write it to a file");
  sample->add_option("--kind", sa.kind)->check(CLI::IsMember({"product", "gaussian"}));
  sample->add_option("--means", sa.means_csv, "comma-separated mean vector");
  sample->add_option("--d", sa.d, "dimension (with --fill) when --means is omitted");
  sample->add_option("--fill", sa.fill);
  sample->add_option("--n", sa.n)->required();
  sample->add_option("--seed", sa.seed);
  sample->add_option("--stream", sa.stream);
  sample->add_option("--out", sa.out)->required();

  TestArgs ta;
  CLI::App* test = app.add_subcommand("test", "run a tester on a dataset file");
  test->add_option("--tester", ta.tester)
      ->check(CLI::IsMember({"nonprivate", "filter", "lipschitz", "gauss-direct",
                             "gauss-reduce"}));
  test->add_option("--in", ta.in)->required();
  test->add_option("--alpha", ta.alpha)->required();
  test->add_option("--epsilon", ta.epsilon);
  test->add_option("--delta", ta.delta);
  test->add_option("--mode", ta.mode)->check(CLI::IsMember({"exact", "shortcut"}));
  test->add_option("--backend", ta.backend)
      ->check(CLI::IsMember({"filter", "lipschitz"}));
  test->add_option("--seed", ta.seed);
  test->add_option("--stream", ta.stream);
  test->add_flag("--noiseless-debug", ta.noiseless);
  test->add_option("--out", ta.out);

  ReduceArgs ra;
  CLI::App* reduce = app.add_subcommand("reduce", "apply a sample reduction");
  reduce->add_option("--kind", ra.kind)
      ->check(CLI::IsMember({"sign", "balanced", "extreme2uni", "uni2extreme"}));
  reduce->add_option("--in", ra.in)->required();
  reduce->add_option("--out", ra.out)->required();
  reduce->add_option("--q", ra.q_csv, "reference means for the balanced reduction");
  reduce->add_option("--n", ra.n, "target sample count for uni2extreme");
  reduce->add_option("--seed", ra.seed);
  reduce->add_option("--stream", ra.stream);

  ExperimentArgs ea;
  CLI::App* experiment = app.add_subcommand("experiment", "run a power experiment");
  experiment->add_option("--config", ea.config)->required();
  experiment->add_option("--out", ea.out);
  experiment->add_option("--workers", ea.workers);
  experiment->add_flag("--timing", ea.timing,
                       "print measured wall time instead of 0 in the seconds column");
  experiment->add_option("--seed", ea.seed_override, "override the config seed");
  experiment->add_flag("--noiseless-debug", ea.noiseless);

  AuditArgs aa;
  CLI::App* audit = app.add_subcommand("audit", "empirical privacy audit");
  audit->add_option("--tester", aa.tester)
      ->check(CLI::IsMember({"filter", "lipschitz", "nonprivate", "laplace-control",
                             "constant-accept"}));
  audit->add_option("--n", aa.n);
  audit->add_option("--d", aa.d);
  audit->add_option("--alpha", aa.alpha);
  audit->add_option("--epsilon", aa.epsilon);
  audit->add_option("--delta", aa.delta);
  audit->add_option("--eps-claimed", aa.eps_claimed)->required();
  audit->add_option("--delta-claimed", aa.delta_claimed);
  audit->add_option("--trials", aa.trials);
  audit->add_option("--seed", aa.seed);
  audit->add_option("--workers", aa.workers);
  audit->add_option("--out", aa.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return cmd_sample(sa);
    if (*test) return cmd_test(ta);
    if (*reduce) return cmd_reduce(ra);
    if (*experiment) return cmd_experiment(ea);
    if (*audit) return cmd_audit(aa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
