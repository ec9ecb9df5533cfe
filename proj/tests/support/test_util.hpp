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

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include <unside/posterior.hpp>
#include <unside/schedule.hpp>

namespace unside::test {

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / (v.size() - 1);
}

inline double std_error_of_mean(const std::vector<double>& v) {
  return std::sqrt(variance_of(v) / v.size());
}

inline double binomial_se(double p, std::int64_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
}

/// Mean and variance of a single Dirichlet coordinate.
inline double dirichlet_mean(double alpha_i, double alpha_sum) {
  return alpha_i / alpha_sum;
}
inline double dirichlet_coord_var(double alpha_i, double alpha_sum) {
  return alpha_i * (alpha_sum - alpha_i) /
         (alpha_sum * alpha_sum * (alpha_sum + 1.0));
}

/// Total variation between an empirical count map and an exact distribution
/// over the same index space.
inline double tv_distance(const std::map<int, std::int64_t>& counts,
                          const std::map<int, double>& exact,
                          std::int64_t total) {
  double acc = 0.0;
  std::map<int, double> merged = exact;
  for (const auto& [idx, c] : counts) merged.try_emplace(idx, 0.0);
  for (const auto& [idx, p] : merged) {
    const auto it = counts.find(idx);
    const double emp =
        it == counts.end()
            ? 0.0
            : static_cast<double>(it->second) / static_cast<double>(total);
    acc += std::abs(emp - p);
  }
  return 0.5 * acc;
}

/// The toy finite-support distribution used across sampling and training
/// tests: L = 3, K = 3, four equiprobable atoms.
inline AtomDataset toy_dataset() {
  return AtomDataset::equiprobable(
      {{0, 1, 2}, {2, 1, 0}, {0, 0, 0}, {1, 2, 2}}, 3);
}

inline DirichletPath toy_path(double a = 3.0, double kappa = 0.0) {
  return DirichletPath(NoiseSchedule(a, kappa, 0.999), 3);
}

/// Flat index of an L=3, K=3 category vector in [0, 27).
inline int toy_state_index(const std::vector<int>& cats) {
  return cats[0] * 9 + cats[1] * 3 + cats[2];
}

/// log density of the one-step kernel mixture sum_k pi_k Dir(1 + alpha e_k).
inline double mixture_log_density(const CategoricalDist& pi, double alpha,
                                  const SimplexPoint& x) {
  const int K = pi.num_categories();
  std::vector<double> terms(K);
  for (int k = 0; k < K; ++k) {
    terms[k] = pi.log_prob(k) +
               dirichlet_log_density(
                   DirichletParams::one_plus_scaled_vertex(k, K, alpha), x);
  }
  return log_sum_exp(terms);
}

inline double categorical_kl(const CategoricalDist& p, const CategoricalDist& q) {
  double acc = 0.0;
  for (int k = 0; k < p.num_categories(); ++k) {
    if (p.prob(k) > 0.0) acc += p.prob(k) * (p.log_prob(k) - q.log_prob(k));
  }
  return acc;
}

}  // namespace unside::test
