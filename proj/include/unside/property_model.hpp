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
#include <vector>

#include "unside/params.hpp"
#include "unside/simplex.hpp"
#include "unside/training.hpp"

namespace unside {

/// A regression example for property models: a noisy state and the scalar
/// property value of the clean instance it came from.
struct RegressionExample {
  MultiSimplexState state;
  double target = 0.0;
};

/// Linear Gaussian property regressor over the flattened state plus time
/// features: f(x, t) = w . [flatten(x); sin 2*pi*t; cos 2*pi*t] + b with
/// log p(y | x, t) = -(y - f)^2 / 2 + const (unit noise scale). Trained
/// across all noise levels so its input gradient is usable at any step of
/// the reverse process.
class PropertyRegressor {
 public:
  PropertyRegressor(int num_dims, int num_categories)
      : L_(num_dims), K_(num_categories), in_(num_dims * num_categories + 2) {
    w_ = store_.add("w", {1, static_cast<std::size_t>(in_)});
    b_ = store_.add("b", {1});
  }

  int num_dims() const { return L_; }
  int num_categories() const { return K_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  double predict(const MultiSimplexState& state) const {
    const std::vector<double> phi = features(state);
    const auto w = store_.values(w_, in_);
    double f = store_.values(b_, 1)[0];
    for (int i = 0; i < in_; ++i) f += w[i] * phi[i];
    return f;
  }

  double log_likelihood(const MultiSimplexState& state, double y) const {
    const double r = y - predict(state);
    return -0.5 * r * r - 0.91893853320467274178;  // log sqrt(2 pi)
  }

  /// d log p(y | x, t) / dx, reshaped per dimension: (y - f) * w_l.
  std::vector<std::vector<double>> input_gradient(const MultiSimplexState& state,
                                                  double y) const {
    const double r = y - predict(state);
    const auto w = store_.values(w_, in_);
    std::vector<std::vector<double>> grad(L_);
    for (int l = 0; l < L_; ++l) {
      grad[l].assign(w.begin() + l * K_, w.begin() + (l + 1) * K_);
      for (double& g : grad[l]) g *= r;
    }
    return grad;
  }

  /// Squared-error loss (the Gaussian NLL up to a constant); accumulates
  /// scale * gradient. The gamma argument is ignored; the train() loop passes
  /// it for all model kinds.
  double nll_backward(const RegressionExample& ex, double /*gamma*/,
                      double scale) {
    const std::vector<double> phi = features(ex.state);
    const auto w = store_.values(w_, in_);
    double f = store_.values(b_, 1)[0];
    for (int i = 0; i < in_; ++i) f += w[i] * phi[i];
    const double r = f - ex.target;
    auto gw = store_.grads(w_, in_);
    for (int i = 0; i < in_; ++i) gw[i] += scale * r * phi[i];
    store_.grads(b_, 1)[0] += scale * r;
    return 0.5 * r * r;
  }

 private:
  std::vector<double> features(const MultiSimplexState& state) const {
    if (static_cast<int>(state.size()) != L_) {
      throw std::invalid_argument("PropertyRegressor: state length mismatch");
    }
    std::vector<double> phi;
    phi.reserve(in_);
    for (const auto& dim : state.dims) {
      if (dim.num_categories() != K_) {
        throw std::invalid_argument("PropertyRegressor: state K mismatch");
      }
      phi.insert(phi.end(), dim.coords().begin(), dim.coords().end());
    }
    append_time_features(state.t, phi);
    return phi;
  }

  int L_, K_, in_;
  ParamStore store_;
  std::size_t w_ = 0, b_ = 0;
};

/// Analytic input gradient of log p(y | x_t, t) for the property model,
/// one K-vector per state dimension.
inline std::vector<std::vector<double>> classifier_input_gradient(
    const PropertyRegressor& model, const MultiSimplexState& state, double y) {
  return model.input_gradient(state, y);
}

}  // namespace unside
