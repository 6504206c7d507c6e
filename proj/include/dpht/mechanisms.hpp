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

#include "dpht/rng.hpp"
#include "dpht/types.hpp"

namespace dpht {

/// Laplace mechanism scale b = Delta_1 f / epsilon.
struct LaplaceScale {
  double b;
  void validate() const {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw ValidationError("LaplaceScale: b must be positive and finite");
    }
  }
};

/// Gaussian mechanism sigma = Delta_2 f * sqrt(2 ln(5/(4 delta))) / epsilon.
struct GaussianSigma {
  double sigma;
  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ValidationError("GaussianSigma: sigma must be positive and finite");
    }
  }
};

inline double gaussian_mechanism_sigma(double l2_sensitivity, double epsilon,
                                       double delta) {
  return l2_sensitivity * std::sqrt(2.0 * std::log(5.0 / (4.0 * delta))) / epsilon;
}

/// One Laplace(0, b) draw by inverse CDF from a single uniform, so one
/// call consumes exactly one u64 from the stream.
inline double laplace_draw(LaplaceScale scale, Rng& rng) {
  scale.validate();
  const double u = rng.uniform_open() - 0.5;  // (-0.5, 0.5)
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return -scale.b * sign * std::log(1.0 - 2.0 * std::fabs(u));
}

/// d i.i.d. Normal(0, sigma^2) coordinates.
inline std::vector<double> gaussian_vector_draw(GaussianSigma sigma, std::int64_t d,
                                                Rng& rng) {
  sigma.validate();
  if (d < 1) throw ValidationError("gaussian_vector_draw: d must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(d));
  for (auto& x : v) x = sigma.sigma * rng.normal();
  return v;
}

/// Laplace noise honoring the noiseless debug switch. Noiseless mode
/// returns 0 without consuming randomness.
inline double noise_laplace(double b, const PrivacyParams& pp, Rng& rng) {
  if (pp.noiseless_debug) return 0.0;
  return laplace_draw(LaplaceScale{b}, rng);
}

struct NoisyMaxResult {
  std::size_t index = 0;
  double noisy_value = 0.0;
};

namespace detail {

inline NoisyMaxResult argmax_with_noise(const std::vector<double>& values,
                                        const std::vector<double>& noise) {
  NoisyMaxResult best{0, values[0] + noise[0]};
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double v = values[i] + noise[i];
    if (v > best.noisy_value) best = {i, v};
  }
  return best;
}

}  // namespace detail

/// Report Noisy Max: adds independent Laplace(sensitivity / epsilon) to
/// every entry and returns the argmax index with its noisy value. Ties
/// break toward the lowest index. Noise is drawn in entry order.
inline NoisyMaxResult report_noisy_max(const std::vector<double>& values,
                                       double sensitivity, const PrivacyParams& pp,
                                       Rng& rng) {
  if (values.empty()) throw ValidationError("report_noisy_max: empty input");
  if (!(sensitivity > 0.0)) {
    throw ValidationError("report_noisy_max: sensitivity must be positive");
  }
  pp.validate();
  std::vector<double> noise(values.size(), 0.0);
  if (!pp.noiseless_debug) {
    const LaplaceScale scale{sensitivity / pp.epsilon};
    for (auto& z : noise) z = laplace_draw(scale, rng);
  }
  return detail::argmax_with_noise(values, noise);
}

}  // namespace dpht
