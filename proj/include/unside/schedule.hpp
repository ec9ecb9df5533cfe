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
#include <set>
#include <stdexcept>
#include <vector>

#include "unside/simplex.hpp"

namespace unside {

/// Log-schedule concentration: alpha(t) = kappa - a*log(1 - min(t, t_max)).
///
/// `a` controls how fast the path concentrates; 3 is the general-purpose
/// default, 2 suits sparse block-structured graphs. `kappa_offset` shifts the
/// start so that alpha(0) = kappa, matching a marginal-mixture prior with the
/// same concentration. The clamp t_max = 1 - eps_t bounds alpha near
/// a*log(1/eps_t) since the raw schedule diverges at t = 1.
struct NoiseSchedule {
  double a = 3.0;
  double kappa_offset = 0.0;
  double t_max = 0.999;

  NoiseSchedule() = default;
  NoiseSchedule(double strength, double kappa = 0.0, double tmax = 0.999)
      : a(strength), kappa_offset(kappa), t_max(tmax) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("NoiseSchedule: a must be positive");
    }
    if (!(kappa_offset >= 0.0)) {
      throw std::invalid_argument("NoiseSchedule: kappa must be nonnegative");
    }
    if (!(t_max > 0.0) || !(t_max < 1.0)) {
      throw std::invalid_argument("NoiseSchedule: t_max must lie in (0, 1)");
    }
  }

  double alpha(double t) const {
    if (!(t >= 0.0) || !(t < 1.0)) {
      throw std::invalid_argument("NoiseSchedule: t must lie in [0, 1)");
    }
    return kappa_offset - a * std::log1p(-std::min(t, t_max));
  }
};

inline double alpha_of_t(const NoiseSchedule& schedule, double t) {
  return schedule.alpha(t);
}

/// The explicit Dirichlet probability path q_t(. | x1) = Dir(1 + alpha_t e_x1).
/// Full support on S_K for every t in [0, 1).
struct DirichletPath {
  NoiseSchedule schedule;
  int num_categories = 2;

  DirichletPath() = default;
  DirichletPath(NoiseSchedule s, int K) : schedule(s), num_categories(K) {
    if (K < 2) {
      throw std::invalid_argument("DirichletPath: need at least two categories");
    }
  }

  DirichletParams params_at(int clean_category, double t) const {
    if (clean_category < 0 || clean_category >= num_categories) {
      throw std::invalid_argument("DirichletPath: category index out of range");
    }
    return DirichletParams::one_plus_scaled_vertex(clean_category,
                                                   num_categories,
                                                   schedule.alpha(t));
  }

  double log_density(int clean_category, double t, const SimplexPoint& x) const {
    return dirichlet_log_density(params_at(clean_category, t), x);
  }
};

/// Forward noising of one dimension: a draw from Dir(1 + alpha_t e_x1).
inline SimplexPoint noise_forward(const DirichletPath& path, int clean_category,
                                  double t, RngStream& rng) {
  return sample_dirichlet(path.params_at(clean_category, t), rng);
}

/// Forward noising of an L-dimensional instance; dimensions are independent.
inline MultiSimplexState noise_forward_multi(const DirichletPath& path,
                                             const std::vector<int>& clean,
                                             double t, RngStream& rng) {
  std::vector<SimplexPoint> dims;
  dims.reserve(clean.size());
  for (int c : clean) {
    dims.push_back(noise_forward(path, c, t, rng));
  }
  return MultiSimplexState(std::move(dims), std::min(t, path.schedule.t_max));
}

/// The linear interpolant x_t = abar*x1 + (1-abar)*x0. Kept for demos and
/// tests of its support pathology; the sampler never uses it.
struct InterpolantPath {
  double alpha_bar = 0.0;
  int num_categories = 2;

  InterpolantPath() = default;
  InterpolantPath(double abar, int K) : alpha_bar(abar), num_categories(K) {
    if (!(alpha_bar >= 0.0) || !(alpha_bar <= 1.0)) {
      throw std::invalid_argument("InterpolantPath: weight must lie in [0, 1]");
    }
    if (K < 2) {
      throw std::invalid_argument("InterpolantPath: need at least two categories");
    }
  }
};

inline SimplexPoint interpolant_forward(const InterpolantPath& path,
                                        int clean_category,
                                        const SimplexPoint& x0) {
  if (x0.num_categories() != path.num_categories) {
    throw std::invalid_argument("interpolant_forward: dimension mismatch");
  }
  std::vector<double> c(x0.coords());
  for (double& v : c) v *= 1.0 - path.alpha_bar;
  c[clean_category] += path.alpha_bar;
  return SimplexPoint(std::move(c));
}

/// Vertices with nonzero interpolant posterior given x_t: since x0 >= 0
/// forces x_t[x1] >= abar, only coordinates at least abar are feasible.
/// At most K-1 of them once abar > 1/K, and exactly one once abar > 1/2.
inline std::set<int> interpolant_feasible_vertices(const SimplexPoint& x_t,
                                                   double alpha_bar) {
  std::set<int> feasible;
  for (int j = 0; j < x_t.num_categories(); ++j) {
    if (x_t[j] >= alpha_bar - 1e-12) feasible.insert(j);
  }
  return feasible;
}

}  // namespace unside
