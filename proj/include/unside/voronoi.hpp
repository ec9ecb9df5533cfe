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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "unside/schedule.hpp"
#include "unside/simplex.hpp"

namespace unside {

/// Query for the probability that a draw from Dir(1 + alpha e_i) stays in the
/// Voronoi region of its origin vertex e_i (i.e. coordinate i stays maximal).
struct VoronoiQuery {
  int num_categories = 2;
  double alpha = 0.0;

  VoronoiQuery() = default;
  VoronoiQuery(int K, double a) : num_categories(K), alpha(a) {
    if (K < 2) {
      throw std::invalid_argument("VoronoiQuery: need at least two categories");
    }
    if (!(alpha >= 0.0)) {
      throw std::invalid_argument("VoronoiQuery: alpha must be nonnegative");
    }
  }
};

/// Closed-form Voronoi probability
///
///   P = sum_{k=0}^{K-1} (-1)^k C(K-1, k) / (k+1)^(alpha+1).
///
/// The exponent is alpha + 1, the Dirichlet parameter of the distinguished
/// coordinate: the variant with exponent alpha - 1 fails the exact K = 2
/// identity P = 1 - 2^-(alpha+1) (a Beta(alpha+1, 1) CDF evaluation) as well
/// as Monte-Carlo estimation, so it is not offered.
///
/// The alternating sum is Kahan-compensated; beyond K = 64 the cancellation
/// exceeds double precision and the query is rejected.
inline double voronoi_prob_closed_form(const VoronoiQuery& q) {
  if (q.num_categories > 64) {
    throw std::invalid_argument(
        "voronoi_prob_closed_form: K > 64 unsupported (alternating-sum "
        "cancellation)");
  }
  const int K = q.num_categories;
  const double expo = q.alpha + 1.0;
  double sum = 0.0;
  double comp = 0.0;  // Kahan carry
  for (int k = 0; k < K; ++k) {
    const double mag =
        std::exp(log_binomial(K - 1, k) - expo * std::log1p(static_cast<double>(k)));
    const double term = (k % 2 == 0) ? mag : -mag;
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::clamp(sum, 0.0, 1.0);
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo oracle for the Voronoi probability: draws from Dir(1 + alpha e_0)
/// and counts draws whose nearest vertex is still 0. Ties resolve to the
/// lowest index, matching nearest_vertex.
inline MonteCarloEstimate voronoi_prob_mc(const VoronoiQuery& q,
                                          std::int64_t n_samples,
                                          RngStream& rng) {
  if (n_samples < 1000) {
    throw std::invalid_argument("voronoi_prob_mc: need at least 1000 samples");
  }
  const DirichletParams params =
      DirichletParams::one_plus_scaled_vertex(0, q.num_categories, q.alpha);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    if (nearest_vertex(sample_dirichlet(params, rng)) == 0) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                              static_cast<double>(n_samples));
  return {p, se};
}

struct CalibrationRow {
  double t = 0.0;
  double alpha = 0.0;
  double voronoi_prob = 0.0;
};

/// Voronoi probability along a schedule, on a uniform t-grid over [0, t_max].
/// The curve is the calibration diagnostic for choosing the schedule strength.
inline std::vector<CalibrationRow> calibration_curve(const NoiseSchedule& schedule,
                                                     int num_categories,
                                                     int n_points) {
  if (n_points < 2) {
    throw std::invalid_argument("calibration_curve: need at least two points");
  }
  std::vector<CalibrationRow> rows;
  rows.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double t = schedule.t_max * static_cast<double>(i) /
                     static_cast<double>(n_points - 1);
    const double alpha = schedule.alpha(t);
    rows.push_back({t, alpha,
                    voronoi_prob_closed_form({num_categories, alpha})});
  }
  return rows;
}

}  // namespace unside
