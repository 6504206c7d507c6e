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

// Small power-curve run for the efficient tester: uniform null vs a
// single biased coordinate, CSV on stdout.

#include <iostream>
#include <vector>

#include "dpht/harness.hpp"

int main() {
  dpht::ExperimentConfig cfg;
  cfg.tester.kind = dpht::TesterKind::Filter;
  cfg.tester.alpha = 0.5;
  cfg.tester.epsilon = 1.0;
  cfg.tester.delta = 1e-3;
  cfg.null_spec = {dpht::DistSpec::Kind::Product, std::vector<double>(20, 0.0)};
  cfg.alt_spec = cfg.null_spec;
  cfg.alt_spec.means[0] = 0.7;
  cfg.n_grid = {250, 500, 1000, 2000, 4000};
  cfg.trials = 200;
  cfg.seed = 1;
  cfg.workers = 2;

  dpht::write_power_csv(dpht::run_power_experiment(cfg), std::cout,
                        /*with_timing=*/true);
  return 0;
}
