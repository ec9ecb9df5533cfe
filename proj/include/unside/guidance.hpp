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
#include <stdexcept>
#include <vector>

#include "unside/posterior.hpp"
#include "unside/property_model.hpp"
#include "unside/simplex.hpp"

namespace unside {

enum class GuidanceMode { kNone, kClassifierFree, kClassifier };

/// Guidance settings for the reverse process. Classifier-free guidance needs
/// an unconditional model next to the conditional one the sampler already
/// holds; classifier guidance needs a property model with input gradients
/// and a target value.
struct GuidanceConfig {
  GuidanceMode mode = GuidanceMode::kNone;
  double omega = 1.0;
  const PosteriorModel* unconditional = nullptr;
  const PropertyRegressor* property_model = nullptr;
  double target = 0.0;

  void validate() const {
    if (mode == GuidanceMode::kNone) return;
    if (!(omega > 0.0)) {
      throw std::invalid_argument("GuidanceConfig: omega must be positive");
    }
    if (mode == GuidanceMode::kClassifierFree && unconditional == nullptr) {
      throw std::invalid_argument("GuidanceConfig: missing unconditional model");
    }
    if (mode == GuidanceMode::kClassifier && property_model == nullptr) {
      throw std::invalid_argument("GuidanceConfig: missing property model");
    }
  }
};

/// Classifier-free combination: log pi = omega*log pi_cond + (1-omega)*log
/// pi_uncond, renormalized. omega = 1 and omega = 0 return the respective
/// input exactly.
inline CategoricalDist guided_posterior_cf(const CategoricalDist& cond,
                                           const CategoricalDist& uncond,
                                           double omega) {
  if (cond.num_categories() != uncond.num_categories()) {
    throw std::invalid_argument("guided_posterior_cf: K mismatch");
  }
  if (omega == 1.0) return cond;
  if (omega == 0.0) return uncond;
  std::vector<double> logits(cond.num_categories());
  for (int k = 0; k < cond.num_categories(); ++k) {
    logits[k] = omega * cond.log_prob(k) + (1.0 - omega) * uncond.log_prob(k);
  }
  return CategoricalDist::from_logits(std::move(logits));
}

/// Classifier tilt of a categorical posterior: pi_k proportional to
/// pi_k * exp(omega * grad_k). This is the first-order tilt of the
/// Dirichlet-mixture kernel evaluated at the component vertices, where
/// x^T grad reduces to grad_k.
inline CategoricalDist guided_posterior_classifier(const CategoricalDist& pi,
                                                   const std::vector<double>& grad,
                                                   double omega) {
  if (static_cast<int>(grad.size()) != pi.num_categories()) {
    throw std::invalid_argument("guided_posterior_classifier: K mismatch");
  }
  std::vector<double> logits(pi.num_categories());
  for (int k = 0; k < pi.num_categories(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw std::invalid_argument("guided_posterior_classifier: non-finite gradient");
    }
    logits[k] = pi.log_prob(k) + omega * grad[k];
  }
  return CategoricalDist::from_logits(std::move(logits));
}

/// Per-dimension posteriors with the configured guidance applied.
inline std::vector<CategoricalDist> guided_posteriors(
    const PosteriorModel& model, const GuidanceConfig& guidance,
    const MultiSimplexState& state) {
  std::vector<CategoricalDist> pi = model.evaluate(state);
  switch (guidance.mode) {
    case GuidanceMode::kNone:
      break;
    case GuidanceMode::kClassifierFree: {
      const std::vector<CategoricalDist> uncond =
          guidance.unconditional->evaluate(state);
      for (std::size_t l = 0; l < pi.size(); ++l) {
        pi[l] = guided_posterior_cf(pi[l], uncond[l], guidance.omega);
      }
      break;
    }
    case GuidanceMode::kClassifier: {
      const auto grads =
          guidance.property_model->input_gradient(state, guidance.target);
      for (std::size_t l = 0; l < pi.size(); ++l) {
        pi[l] = guided_posterior_classifier(pi[l], grads[l], guidance.omega);
      }
      break;
    }
  }
  return pi;
}

}  // namespace unside
