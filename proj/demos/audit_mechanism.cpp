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

// Audits two testers on tiny instances: the calibrated Laplace release
// (should come back Consistent) and the non-private baseline (should be
// flagged Violated).

#include <iostream>

#include "dpht/harness.hpp"

int main() {
  dpht::TesterConfig control;
  control.kind = dpht::TesterKind::LaplaceControl;
  control.epsilon = 1.0;
  const auto control_fn = [&](const dpht::Dataset& x, dpht::Rng& rng) {
    return dpht::run_tester(control, x, rng);
  };
  std::cout << dpht::audit_privacy(control_fn, "laplace-control", 2, 2, 1.0, 0.0,
                                   200000, 42, 2)
                   .serialize()
            << "\n";

  const auto baseline_fn = [](const dpht::Dataset& x, dpht::Rng&) {
    return dpht::nonprivate_uniformity_test(x, 0.5).accept;
  };
  std::cout << dpht::audit_privacy(baseline_fn, "nonprivate", 2, 2, 1.0, 0.0, 20000,
                                   43, 2)
                   .serialize();
  return 0;
}
