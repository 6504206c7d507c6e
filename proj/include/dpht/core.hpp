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
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpht/rng.hpp"
#include "dpht/types.hpp"

namespace dpht {

/// n i.i.d. rows from the product distribution with the given means.
/// Coordinate i is +1 iff the uniform draw u < (1 + p_i) / 2, which
/// fixes the measure-zero boundary: p_i = 1 forces +1, p_i = -1 forces -1.
inline Dataset sample_product(const ProductSpec& spec, std::int64_t n, Rng& rng) {
  spec.validate();
  if (n < 1) throw ValidationError("sample_product: n must be >= 1");
  const std::int64_t d = static_cast<std::int64_t>(spec.dim());
  Dataset ds = Dataset::make(DataKind::PM1, n, d);
  std::vector<double> thr(spec.dim());
  for (std::size_t i = 0; i < spec.dim(); ++i) thr[i] = 0.5 * (1.0 + spec.means[i]);
  double* out = ds.entries.data();
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < d; ++i) {
      *out++ = rng.uniform() < thr[i] ? 1.0 : -1.0;
    }
  }
  return ds;
}

inline Dataset sample_product(const ProductSpec& spec, std::int64_t n, RngHandle h) {
  Rng rng(h);
  return sample_product(spec, n, rng);
}

/// n i.i.d. rows from N(mu, I_{d x d}).
inline Dataset sample_gaussian(const GaussianSpec& spec, std::int64_t n, Rng& rng) {
  spec.validate();
  if (n < 1) throw ValidationError("sample_gaussian: n must be >= 1");
  const std::int64_t d = static_cast<std::int64_t>(spec.dim());
  Dataset ds = Dataset::make(DataKind::Real, n, d);
  double* out = ds.entries.data();
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < d; ++i) {
      *out++ = spec.mean[i] + rng.normal();
    }
  }
  return ds;
}

inline Dataset sample_gaussian(const GaussianSpec& spec, std::int64_t n, RngHandle h) {
  Rng rng(h);
  return sample_gaussian(spec, n, rng);
}

enum class TvKind { GaussianPair, ProductVsBalanced };

/// Sandwich on the L1 distance derived from the l2 distance of the mean
/// vectors. has_lower is false when no proven lower constant exists for
/// the requested regime (product case with tau != 1); lower is 0 then.
struct TvBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool has_lower = false;
};

/// Gaussian pair: min(r,1)/100 <= L1 <= 9r for r = ||mu - nu||_2.
/// Product vs tau-balanced nu: L1 <= r / sqrt(tau (1 - tau/2)); a lower
/// bound is emitted only for tau = 1 (nu = 0), where min(r,1)/sqrt(2) is
/// validated exhaustively at small d. The min(.,1) clamps keep the lower
/// bounds below the trivial L1 <= 2 ceiling for large r.
inline TvBounds tv_l2_bounds(TvKind kind, const std::vector<double>& mu,
                             const std::vector<double>& nu, double tau = 1.0) {
  if (mu.size() != nu.size() || mu.empty()) {
    throw ValidationError("tv_l2_bounds: vectors must be nonempty and same length");
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double diff = mu[i] - nu[i];
    r2 += diff * diff;
  }
  const double r = std::sqrt(r2);

  TvBounds b;
  if (kind == TvKind::GaussianPair) {
    b.lower = std::fmin(r, 1.0) / 100.0;
    b.upper = 9.0 * r;
    b.has_lower = true;
    return b;
  }

  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError("tv_l2_bounds: tau must be in (0, 1]");
  }
  for (double v : nu) {
    if (!(v >= -1.0 + tau && v <= 1.0 - tau)) {
      throw ValidationError("tv_l2_bounds: nu is not tau-balanced");
    }
  }
  b.upper = r / std::sqrt(tau * (1.0 - 0.5 * tau));
  if (tau == 1.0) {
    b.lower = std::fmin(r, 1.0) / std::sqrt(2.0);
    b.has_lower = true;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Dataset text format, one file = one matrix:
//   dpht-dataset v1 kind=<pm1|real> n=<int> d=<int>
//   <n lines of d space-separated entries>
// pm1 entries are literally "-1" or "1"; real entries are printed with
// 17 significant digits so read(write(X)) == X exactly.
// ---------------------------------------------------------------------------

inline void write_dataset(const Dataset& ds, std::ostream& os) {
  ds.validate();
  os << "dpht-dataset v1 kind=" << (ds.kind == DataKind::PM1 ? "pm1" : "real")
     << " n=" << ds.n << " d=" << ds.d << "\n";
  char buf[64];
  for (std::int64_t j = 0; j < ds.n; ++j) {
    for (std::int64_t i = 0; i < ds.d; ++i) {
      if (i) os << ' ';
      if (ds.kind == DataKind::PM1) {
        os << (ds.at(j, i) > 0 ? "1" : "-1");
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", ds.at(j, i));
        os << buf;
      }
    }
    os << "\n";
  }
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("write_dataset: cannot open " + path);
  write_dataset(ds, f);
  if (!f) throw ParseError("write_dataset: write failed for " + path);
}

inline Dataset read_dataset(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ParseError("dataset: missing header");
  std::istringstream hs(header);
  std::string magic, version, kind_kv, n_kv, d_kv;
  hs >> magic >> version >> kind_kv >> n_kv >> d_kv;
  if (magic != "dpht-dataset" || version != "v1" ||
      kind_kv.rfind("kind=", 0) != 0 || n_kv.rfind("n=", 0) != 0 ||
      d_kv.rfind("d=", 0) != 0) {
    throw ParseError("dataset: malformed header: " + header);
  }
  const std::string kind_s = kind_kv.substr(5);
  DataKind kind;
  if (kind_s == "pm1") {
    kind = DataKind::PM1;
  } else if (kind_s == "real") {
    kind = DataKind::Real;
  } else {
    throw ParseError("dataset: unknown kind " + kind_s);
  }
  std::int64_t n = 0, d = 0;
  try {
    n = std::stoll(n_kv.substr(2));
    d = std::stoll(d_kv.substr(2));
  } catch (const std::exception&) {
    throw ParseError("dataset: bad n/d in header");
  }
  if (n < 1 || d < 1) throw ParseError("dataset: n and d must be >= 1");

  Dataset ds = Dataset::make(kind, n, d);
  std::string line;
  for (std::int64_t j = 0; j < n; ++j) {
    if (!std::getline(is, line)) throw ParseError("dataset: fewer data rows than n");
    std::istringstream ls(line);
    std::string tok;
    for (std::int64_t i = 0; i < d; ++i) {
      if (!(ls >> tok)) throw ParseError("dataset: ragged row");
      if (kind == DataKind::PM1) {
        if (tok == "1") {
          ds.at(j, i) = 1.0;
        } else if (tok == "-1") {
          ds.at(j, i) = -1.0;
        } else {
          throw ParseError("dataset: pm1 entry must be -1 or 1, got " + tok);
        }
      } else {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
          throw ParseError("dataset: bad real entry " + tok);
        }
        ds.at(j, i) = v;
      }
    }
    if (ls >> tok) throw ParseError("dataset: ragged row (extra entries)");
  }
  while (std::getline(is, line)) {
    if (!line.empty()) throw ParseError("dataset: trailing data after n rows");
  }
  return ds;
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("read_dataset: cannot open " + path);
  return read_dataset(f);
}

}  // namespace dpht
