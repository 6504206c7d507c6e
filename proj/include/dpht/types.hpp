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
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpht {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a gated operation refuses to run because the sample
/// budget is below its documented floor (distinct from Accept/Reject).
class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean vector of a product distribution over {-1,+1}^d; coordinate i
/// is +1 with probability (1 + means[i]) / 2.
struct ProductSpec {
  std::vector<double> means;

  std::size_t dim() const { return means.size(); }

  void validate() const {
    if (means.empty()) throw ValidationError("ProductSpec: d must be >= 1");
    for (double m : means) {
      if (!(m >= -1.0 && m <= 1.0)) {
        throw ValidationError("ProductSpec: mean entry outside [-1, 1]");
      }
    }
  }

  double l2_norm() const {
    double s = 0.0;
    for (double m : means) s += m * m;
    return std::sqrt(s);
  }
};

/// Mean of N(mu, I_{d x d}).
struct GaussianSpec {
  std::vector<double> mean;

  std::size_t dim() const { return mean.size(); }

  void validate() const {
    if (mean.empty()) throw ValidationError("GaussianSpec: d must be >= 1");
    for (double m : mean) {
      if (!std::isfinite(m)) throw ValidationError("GaussianSpec: non-finite mean");
    }
  }

  double l2_norm() const {
    double s = 0.0;
    for (double m : mean) s += m * m;
    return std::sqrt(s);
  }
};

enum class DataKind { PM1, Real };

/// An n x d sample matrix, row-major. PM1 datasets hold exactly +-1.0.
struct Dataset {
  DataKind kind = DataKind::PM1;
  std::int64_t n = 0;
  std::int64_t d = 0;
  std::vector<double> entries;  // n * d, row-major

  static Dataset make(DataKind k, std::int64_t n, std::int64_t d) {
    if (n < 1 || d < 1) throw ValidationError("Dataset: n and d must be >= 1");
    Dataset ds;
    ds.kind = k;
    ds.n = n;
    ds.d = d;
    ds.entries.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(d), 0.0);
    return ds;
  }

  double& at(std::int64_t j, std::int64_t i) {
    return entries[static_cast<std::size_t>(j) * d + i];
  }
  double at(std::int64_t j, std::int64_t i) const {
    return entries[static_cast<std::size_t>(j) * d + i];
  }
  const double* row(std::int64_t j) const {
    return entries.data() + static_cast<std::size_t>(j) * d;
  }
  double* row(std::int64_t j) {
    return entries.data() + static_cast<std::size_t>(j) * d;
  }

  void validate() const {
    if (n < 1 || d < 1) throw ValidationError("Dataset: n and d must be >= 1");
    if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d)) {
      throw ValidationError("Dataset: entry count does not match n x d");
    }
    if (kind == DataKind::PM1) {
      for (double e : entries) {
        if (e != 1.0 && e != -1.0) {
          throw ValidationError("Dataset: PM1 entry not in {-1, +1}");
        }
      }
    }
  }
};

/// (epsilon, delta) target plus the noiseless debug switch. When
/// noiseless_debug is set every mechanism draw is replaced by 0; the
/// run is deterministic and NEVER private, and every trace says so.
struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 0.0;
  bool noiseless_debug = false;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ValidationError("PrivacyParams: epsilon must be positive");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
      throw ValidationError("PrivacyParams: delta must be in [0, 1)");
    }
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Ordered key=value record attached to every test outcome; serialized
/// one pair per line so traces can be diffed and replayed.
struct Trace {
  std::vector<std::pair<std::string, std::string>> fields;

  void put(const std::string& key, const std::string& value) {
    fields.emplace_back(key, value);
  }
  void put(const std::string& key, const char* value) {
    fields.emplace_back(key, std::string(value));
  }
  void put(const std::string& key, double value) {
    fields.emplace_back(key, detail::format_double(value));
  }
  void put(const std::string& key, std::int64_t value) {
    fields.emplace_back(key, std::to_string(value));
  }
  void put(const std::string& key, int value) {
    fields.emplace_back(key, std::to_string(value));
  }
  void put(const std::string& key, bool value) {
    fields.emplace_back(key, value ? "1" : "0");
  }

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : fields) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : fields) {
      out += k;
      out += '=';
      out += v;
      out += '\n';
    }
    return out;
  }
};

struct TestOutcome {
  bool accept = true;
  Trace trace;

  static TestOutcome accepted(Trace t) { return {true, std::move(t)}; }
  static TestOutcome rejected(Trace t) { return {false, std::move(t)}; }
};

}  // namespace dpht
