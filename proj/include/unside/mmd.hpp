// Copyright 2026 The unside authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "unside/rng.hpp"

namespace unside {

using Histogram = std::vector<double>;

inline double squared_distance(const Histogram& a, const Histogram& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("mmd: histogram length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double gaussian_kernel(const Histogram& a, const Histogram& b,
                              double bandwidth) {
  return std::exp(-squared_distance(a, b) / (2.0 * bandwidth * bandwidth));
}

inline void validate_mmd_inputs(const std::vector<Histogram>& a,
                                const std::vector<Histogram>& b,
                                double bandwidth) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("mmd: empty sample");
  }
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("mmd: bandwidth must be positive");
  }
  for (const auto& h : a) squared_distance(h, a.front());
  for (const auto& h : b) squared_distance(h, a.front());
}

/// Unbiased MMD^2 estimate under the Gaussian kernel (diagonal terms
/// excluded); may be negative for close samples.
inline double mmd2_unbiased(const std::vector<Histogram>& a,
                            const std::vector<Histogram>& b, double bandwidth) {
  validate_mmd_inputs(a, b, bandwidth);
  const std::size_t m = a.size(), n = b.size();
  double kaa = 0.0, kbb = 0.0, kab = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) kaa += gaussian_kernel(a[i], a[j], bandwidth);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) kbb += gaussian_kernel(b[i], b[j], bandwidth);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      kab += gaussian_kernel(a[i], b[j], bandwidth);
    }
  }
  double acc = 0.0;
  if (m > 1) acc += kaa / (static_cast<double>(m) * (m - 1));
  if (n > 1) acc += kbb / (static_cast<double>(n) * (n - 1));
  acc -= 2.0 * kab / (static_cast<double>(m) * n);
  return acc;
}

/// Biased (V-statistic) MMD^2; exactly zero for identical samples.
inline double mmd2_biased(const std::vector<Histogram>& a,
                          const std::vector<Histogram>& b, double bandwidth) {
  validate_mmd_inputs(a, b, bandwidth);
  const std::size_t m = a.size(), n = b.size();
  double kaa = 0.0, kbb = 0.0, kab = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      kaa += gaussian_kernel(a[i], a[j], bandwidth);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      kbb += gaussian_kernel(b[i], b[j], bandwidth);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      kab += gaussian_kernel(a[i], b[j], bandwidth);
    }
  }
  return kaa / (static_cast<double>(m) * m) + kbb / (static_cast<double>(n) * n) -
         2.0 * kab / (static_cast<double>(m) * n);
}

/// Unbiased MMD^2 clamped at zero; the headline metric.
inline double mmd_gaussian(const std::vector<Histogram>& a,
                           const std::vector<Histogram>& b, double bandwidth) {
  return std::max(0.0, mmd2_unbiased(a, b, bandwidth));
}

/// Median of pairwise distances across the pooled sample. The usual
/// bandwidth heuristic; falls back to 1 when all points coincide.
inline double median_heuristic_bandwidth(const std::vector<Histogram>& a,
                                         const std::vector<Histogram>& b) {
  std::vector<Histogram> pool;
  pool.reserve(a.size() + b.size());
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  std::vector<double> dists;
  dists.reserve(pool.size() * (pool.size() - 1) / 2);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      dists.push_back(std::sqrt(squared_distance(pool[i], pool[j])));
    }
  }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

struct PermutationTestResult {
  double observed = 0.0;
  double p_value = 1.0;
  double null_p95 = 0.0;
  double null_p99 = 0.0;
};

/// Label-permutation null for the unbiased MMD^2: pools both samples, splits
/// at random, and locates the observed statistic within the null draws.
inline PermutationTestResult mmd_permutation_test(const std::vector<Histogram>& a,
                                                  const std::vector<Histogram>& b,
                                                  double bandwidth, int n_perms,
                                                  RngStream& rng) {
  if (n_perms < 10) {
    throw std::invalid_argument("mmd_permutation_test: too few permutations");
  }
  PermutationTestResult result;
  result.observed = mmd2_unbiased(a, b, bandwidth);
  std::vector<Histogram> pool;
  pool.reserve(a.size() + b.size());
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> null_stats;
  null_stats.reserve(n_perms);
  int exceed = 0;
  for (int p = 0; p < n_perms; ++p) {
    // Fisher-Yates with the explicit stream.
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.uniform_below(i + 1)]);
    }
    std::vector<Histogram> pa, pb;
    pa.reserve(a.size());
    pb.reserve(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) pa.push_back(pool[idx[i]]);
    for (std::size_t i = a.size(); i < idx.size(); ++i) pb.push_back(pool[idx[i]]);
    const double stat = mmd2_unbiased(pa, pb, bandwidth);
    null_stats.push_back(stat);
    if (stat >= result.observed) ++exceed;
  }
  std::sort(null_stats.begin(), null_stats.end());
  const auto percentile = [&](double q) {
    const std::size_t pos = static_cast<std::size_t>(
        std::min(q * null_stats.size(),
                 static_cast<double>(null_stats.size() - 1)));
    return null_stats[pos];
  };
  result.null_p95 = percentile(0.95);
  result.null_p99 = percentile(0.99);
  result.p_value = (exceed + 1.0) / (n_perms + 1.0);
  return result;
}

}  // namespace unside
