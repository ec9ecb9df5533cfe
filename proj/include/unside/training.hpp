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
#include <span>
#include <string>
#include <vector>

#include "unside/errors.hpp"
#include "unside/posterior.hpp"
#include "unside/schedule.hpp"
#include "unside/simplex.hpp"

namespace unside {

/// One supervised pair: the clean categories and a noisy state drawn from the
/// path at the state's time. The first `node_dims` dimensions form the node
/// group for the gamma weighting; the rest are edges. Flat categorical data
/// sets node_dims = L (everything is a node and gamma = 1 applies).
struct TrainExample {
  std::vector<int> target;
  MultiSimplexState state;
  std::size_t node_dims = 0;
};

/// Time featurization shared by the trainable models: (sin pi*t, cos pi*t)
/// appended to the flat input features. The half period matters: with period
/// one, t -> 0 and t -> 1 collapse onto the same feature point, and denoisers
/// then blur the near-deterministic high-t posteriors with the near-uniform
/// low-t ones. On [0, 1) the half-period pair is injective with the endpoints
/// maximally separated.
inline void append_time_features(double t, std::vector<double>& features) {
  constexpr double kPi = 3.14159265358979323846;
  features.push_back(std::sin(kPi * t));
  features.push_back(std::cos(kPi * t));
}

enum class Optimizer { kSgd, kMomentum };

struct TrainConfig {
  double gamma = 1.0;       // node/edge loss weight
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kMomentum;
  double momentum = 0.9;
  int steps = 1000;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gamma >= 0.0) || !(gamma <= 1.0)) {
      throw std::invalid_argument("TrainConfig: gamma must lie in [0, 1]");
    }
    if (!(learning_rate > 0.0)) {
      throw std::invalid_argument("TrainConfig: learning rate must be positive");
    }
    if (steps < 0 || batch_size < 1) {
      throw std::invalid_argument("TrainConfig: bad step or batch count");
    }
  }
};

/// Weighted NLL of predicted per-dimension posteriors against the targets:
/// gamma * mean over node dims + (1 - gamma) * mean over edge dims.
inline double weighted_nll(const std::vector<CategoricalDist>& pi,
                           const std::vector<int>& target,
                           std::size_t node_dims, double gamma) {
  if (pi.size() != target.size()) {
    throw std::invalid_argument("weighted_nll: size mismatch");
  }
  double node_acc = 0.0, edge_acc = 0.0;
  for (std::size_t l = 0; l < pi.size(); ++l) {
    const double nll = -pi[l].log_prob(target[l]);
    if (l < node_dims) {
      node_acc += nll;
    } else {
      edge_acc += nll;
    }
  }
  const std::size_t edge_dims = pi.size() - node_dims;
  double loss = 0.0;
  if (node_dims > 0) loss += gamma * node_acc / static_cast<double>(node_dims);
  if (edge_dims > 0) loss += (1.0 - gamma) * edge_acc / static_cast<double>(edge_dims);
  return loss;
}

/// Per-logit gradient of the weighted NLL for one dimension: softmax minus
/// one-hot, scaled by the group's weight / group size.
inline void nll_logit_grad(const CategoricalDist& pi, int target,
                           double group_weight, std::span<double> out) {
  for (int k = 0; k < pi.num_categories(); ++k) {
    out[k] = group_weight * (pi.prob(k) - (k == target ? 1.0 : 0.0));
  }
}

/// Draws a training example from a finite-support dataset: t ~ U(0, t_max),
/// clean atom ~ weights, noisy state from the path.
inline TrainExample make_atom_example(const AtomDataset& dataset,
                                      const DirichletPath& path,
                                      RngStream& rng) {
  const double t = rng.uniform01() * path.schedule.t_max;
  const auto& atom = dataset.atom(dataset.sample_index(rng));
  TrainExample ex;
  ex.target = atom;
  ex.state = noise_forward_multi(path, atom, t, rng);
  ex.node_dims = atom.size();
  return ex;
}

/// SGD with optional momentum over a model's flat parameters. The `Model`
/// concept: store() -> ParamStore&, nll_backward(example, gamma, scale) ->
/// example loss while accumulating scale * gradient.
template <class Model, class ExampleSampler>
std::vector<double> train(Model& model, ExampleSampler&& sample_example,
                          const TrainConfig& config) {
  config.validate();
  RngStream rng(config.seed);
  auto& store = model.store();
  std::vector<double> velocity(store.size(), 0.0);
  std::vector<double> trace;
  trace.reserve(config.steps);

  for (int step = 0; step < config.steps; ++step) {
    store.zero_grads();
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b) {
      const auto ex = sample_example(rng);
      loss += scale * model.nll_backward(ex, config.gamma, scale);
    }
    if (!std::isfinite(loss)) {
      throw TrainError("training diverged (non-finite loss) at step " +
                       std::to_string(step));
    }
    auto& values = store.values();
    auto& grads = store.grads();
    if (config.optimizer == Optimizer::kMomentum) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] - config.learning_rate * grads[i];
        values[i] += velocity[i];
      }
    } else {
      for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] -= config.learning_rate * grads[i];
      }
    }
    trace.push_back(loss);
  }
  if (!store.all_finite()) {
    throw TrainError("training diverged (non-finite parameters)");
  }
  return trace;
}

/// Mean weighted NLL of a model over a fixed set of examples.
template <class ModelLike>
double mean_nll(const ModelLike& model, const std::vector<TrainExample>& batch,
                double gamma) {
  double acc = 0.0;
  for (const auto& ex : batch) {
    acc += weighted_nll(model.evaluate(ex.state), ex.target, ex.node_dims, gamma);
  }
  return acc / static_cast<double>(batch.size());
}

}  // namespace unside
