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
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "unside/rng.hpp"
#include "unside/special.hpp"

namespace unside {

/// Interior floor applied to simplex coordinates. Densities require strictly
/// positive coordinates; every sampled or externally supplied point is clamped
/// to coordinates >= kCoordFloor and renormalized.
inline constexpr double kCoordFloor = 1e-10;

/// Absolute tolerance on the coordinate sum of a valid simplex point.
inline constexpr double kSumTol = 1e-9;

/// A point on the probability simplex S_K: K nonnegative coordinates summing
/// to one, kept strictly interior by the kCoordFloor clamp.
class SimplexPoint {
 public:
  SimplexPoint() = default;

  /// Takes ownership of `coords`, clamps to the interior and renormalizes.
  explicit SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) {
      throw std::invalid_argument("SimplexPoint: need at least two categories");
    }
    clamp_to_interior();
  }

  /// Vertex e_k, nudged to the interior: coordinate k is 1 - (K-1)*floor.
  static SimplexPoint vertex(int k, int num_categories) {
    if (num_categories < 2 || k < 0 || k >= num_categories) {
      throw std::invalid_argument("SimplexPoint::vertex: index out of range");
    }
    std::vector<double> c(num_categories, kCoordFloor);
    c[k] = 1.0 - (num_categories - 1) * kCoordFloor;
    SimplexPoint p;
    p.coords_ = std::move(c);
    return p;
  }

  static SimplexPoint uniform(int num_categories) {
    return SimplexPoint(std::vector<double>(num_categories,
                                            1.0 / num_categories));
  }

  int num_categories() const { return static_cast<int>(coords_.size()); }
  const std::vector<double>& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  double sum() const {
    return std::accumulate(coords_.begin(), coords_.end(), 0.0);
  }

 private:
  void clamp_to_interior() {
    double total = 0.0;
    for (double c : coords_) {
      if (!std::isfinite(c) || c < -1e-9) {
        throw std::invalid_argument("SimplexPoint: invalid coordinate");
      }
      total += c;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw std::invalid_argument("SimplexPoint: coordinates are far from a distribution");
    }
    // Pin coordinates below the floor and rescale the rest so the sum stays
    // exactly one. Rescaling can drag another coordinate under the floor, so
    // iterate; two passes settle it for any realistic K.
    for (int pass = 0; pass < 4; ++pass) {
      int low = 0;
      double high_mass = 0.0;
      for (double c : coords_) {
        if (c <= kCoordFloor) {
          ++low;
        } else {
          high_mass += c;
        }
      }
      const double target = 1.0 - low * kCoordFloor;
      bool dirty = false;
      for (double& c : coords_) {
        if (c <= kCoordFloor) {
          c = kCoordFloor;
        } else {
          c *= target / high_mass;
          dirty |= c < kCoordFloor;
        }
      }
      if (!dirty) break;
    }
  }

  std::vector<double> coords_;
};

/// Index of the nearest simplex vertex, i.e. the argmax coordinate.
/// Ties break toward the lowest index.
inline int nearest_vertex(const SimplexPoint& x) {
  const auto& c = x.coords();
  return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
}

/// An L-dimensional point on the product simplex at time t. Component K may
/// differ across dimensions (graph states mix node and edge categories).
struct MultiSimplexState {
  std::vector<SimplexPoint> dims;
  double t = 0.0;

  MultiSimplexState() = default;
  MultiSimplexState(std::vector<SimplexPoint> d, double time)
      : dims(std::move(d)), t(time) {
    if (t < 0.0 || t >= 1.0) {
      throw std::invalid_argument("MultiSimplexState: t must lie in [0, 1)");
    }
  }

  std::size_t size() const { return dims.size(); }
};

/// A categorical distribution over K categories, stored with log-probabilities
/// for numerical work.
class CategoricalDist {
 public:
  CategoricalDist() = default;

  static CategoricalDist from_probs(std::vector<double> probs) {
    CategoricalDist d;
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("CategoricalDist: probabilities must be nonnegative");
      }
      total += p;
    }
    if (total <= 0.0) {
      throw std::invalid_argument("CategoricalDist: zero mass");
    }
    d.probs_ = std::move(probs);
    d.log_probs_.resize(d.probs_.size());
    for (std::size_t i = 0; i < d.probs_.size(); ++i) {
      d.probs_[i] /= total;
      d.log_probs_[i] = d.probs_[i] > 0.0
                            ? std::log(d.probs_[i])
                            : -std::numeric_limits<double>::infinity();
    }
    return d;
  }

  static CategoricalDist from_logits(std::vector<double> logits) {
    CategoricalDist d;
    const double lse = log_sum_exp(logits);
    d.log_probs_.resize(logits.size());
    d.probs_.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
      d.log_probs_[i] = logits[i] - lse;
      d.probs_[i] = std::exp(d.log_probs_[i]);
    }
    return d;
  }

  static CategoricalDist uniform(int num_categories) {
    return from_probs(std::vector<double>(num_categories, 1.0));
  }

  int num_categories() const { return static_cast<int>(probs_.size()); }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  double prob(int k) const { return probs_[k]; }
  double log_prob(int k) const { return log_probs_[k]; }

  /// Inverse-CDF draw; category order fixes tie handling.
  int sample(RngStream& rng) const {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      acc += probs_[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs_.size()) - 1;
  }

  int argmax() const {
    return static_cast<int>(
        std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
  }

 private:
  std::vector<double> probs_;
  std::vector<double> log_probs_;
};

/// Dirichlet concentration parameters; all entries strictly positive.
struct DirichletParams {
  std::vector<double> alpha;

  explicit DirichletParams(std::vector<double> a) : alpha(std::move(a)) {
    if (alpha.size() < 2) {
      throw std::invalid_argument("DirichletParams: need at least two categories");
    }
    for (double v : alpha) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("DirichletParams: concentrations must be positive");
      }
    }
  }

  /// Dir(1 + concentration * e_k) on K categories.
  static DirichletParams one_plus_scaled_vertex(int k, int num_categories,
                                                double concentration) {
    std::vector<double> a(num_categories, 1.0);
    a[k] += concentration;
    return DirichletParams(std::move(a));
  }

  int num_categories() const { return static_cast<int>(alpha.size()); }
};

/// Gamma(shape, 1) draw. Marsaglia-Tsang squeeze/rejection for shape >= 1,
/// with the uniform-power boost for shape < 1.
inline double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("sample_gamma: shape must be positive");
  }
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform_pos(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Dirichlet draw by Gamma normalization, clamped to the simplex interior.
inline SimplexPoint sample_dirichlet(const DirichletParams& params,
                                     RngStream& rng) {
  std::vector<double> g(params.alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = sample_gamma(params.alpha[i], rng);
    total += g[i];
  }
  for (double& v : g) v /= total;
  return SimplexPoint(std::move(g));
}

/// log Dir(x; alpha) for an interior point x.
inline double dirichlet_log_density(const DirichletParams& params,
                                    const SimplexPoint& x) {
  if (params.num_categories() != x.num_categories()) {
    throw std::invalid_argument("dirichlet_log_density: dimension mismatch");
  }
  double acc = -log_beta(params.alpha);
  for (int i = 0; i < x.num_categories(); ++i) {
    acc += (params.alpha[i] - 1.0) * std::log(x[i]);
  }
  return acc;
}

/// Marginal-weighted Dirichlet mixture prior: sum_k m_k Dir(1 + kappa e_k).
/// kappa = 0 degenerates to the uniform prior Dir(1).
struct MarginalMixturePrior {
  CategoricalDist marginals;
  double kappa = 0.0;

  MarginalMixturePrior() = default;
  MarginalMixturePrior(CategoricalDist m, double k)
      : marginals(std::move(m)), kappa(k) {
    if (!(kappa >= 0.0)) {
      throw std::invalid_argument("MarginalMixturePrior: kappa must be nonnegative");
    }
  }

  static MarginalMixturePrior uniform(int num_categories) {
    return MarginalMixturePrior(CategoricalDist::uniform(num_categories), 0.0);
  }

  int num_categories() const { return marginals.num_categories(); }
};

inline SimplexPoint sample_marginal_prior(const MarginalMixturePrior& prior,
                                          RngStream& rng) {
  const int k = prior.marginals.sample(rng);
  return sample_dirichlet(
      DirichletParams::one_plus_scaled_vertex(k, prior.num_categories(),
                                              prior.kappa),
      rng);
}

}  // namespace unside
