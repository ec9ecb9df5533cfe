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
#include <stdexcept>
#include <vector>

#include "unside/guidance.hpp"
#include "unside/posterior.hpp"
#include "unside/schedule.hpp"
#include "unside/simplex.hpp"

namespace unside {

enum class DecodeMode { kSamplePosterior, kArgmaxPosterior };

/// Reverse-process run settings. T is the number of function evaluations;
/// the step size is uniform, dt = (t_max - t0) / T. The prior is applied
/// per dimension (kappa = 0 gives the uniform prior).
struct SampleRunConfig {
  int num_steps = 64;  // T (NFE)
  int correctors_per_step = 0;
  int num_dims = 1;  // L
  MarginalMixturePrior prior = MarginalMixturePrior::uniform(2);
  DecodeMode decode = DecodeMode::kSamplePosterior;
  std::uint64_t seed = 0;
  double t0 = 0.0;

  void validate() const {
    if (num_steps < 1) {
      throw std::invalid_argument("SampleRunConfig: T must be at least 1");
    }
    if (correctors_per_step < 0 || num_dims < 1) {
      throw std::invalid_argument("SampleRunConfig: bad corrector or dim count");
    }
    if (!(t0 >= 0.0) || !(t0 < 1.0)) {
      throw std::invalid_argument("SampleRunConfig: t0 must lie in [0, 1)");
    }
  }
};

/// Re-noise every dimension from its categorical posterior: draw a clean
/// category x1 ~ pi_l, then x ~ Dir(1 + alpha(t_next) e_x1). Each dimension
/// uses an independent sub-stream, keyed in dimension order, so one
/// dimension's rejection-sampling appetite never shifts another's draws.
inline MultiSimplexState renoise_from_posteriors(
    const std::vector<CategoricalDist>& pi, double t_next,
    const NoiseSchedule& schedule, RngStream& rng) {
  const double alpha = schedule.alpha(t_next);
  const std::uint64_t step_key = rng.next_u64();
  std::vector<SimplexPoint> dims;
  dims.reserve(pi.size());
  for (std::size_t l = 0; l < pi.size(); ++l) {
    RngStream sub(derive_seed(step_key, l));
    const int clean = pi[l].sample(sub);
    dims.push_back(sample_dirichlet(
        DirichletParams::one_plus_scaled_vertex(clean, pi[l].num_categories(),
                                                alpha),
        sub));
  }
  return MultiSimplexState(std::move(dims), std::min(t_next, schedule.t_max));
}

/// One non-Markovian denoising transition to time t_next > state.t:
/// sample a clean element from the posterior, then re-noise it at t_next.
inline MultiSimplexState denoise_step(const PosteriorModel& model,
                                      const MultiSimplexState& state,
                                      double t_next, const DirichletPath& path,
                                      RngStream& rng) {
  if (!(t_next > state.t)) {
    throw std::invalid_argument(
        "denoise_step: t_next must exceed the state time (use corrector_step "
        "to hold time fixed)");
  }
  if (!(t_next <= path.schedule.t_max)) {
    throw std::invalid_argument("denoise_step: t_next beyond t_max");
  }
  return renoise_from_posteriors(model.evaluate(state), t_next, path.schedule,
                                 rng);
}

/// A denoising transition with the time index held fixed. Iterating it is a
/// Markov chain whose stationary law is the time-t noisy marginal.
inline MultiSimplexState corrector_step(const PosteriorModel& model,
                                        const MultiSimplexState& state,
                                        const DirichletPath& path,
                                        RngStream& rng) {
  return renoise_from_posteriors(model.evaluate(state), state.t, path.schedule,
                                 rng);
}

/// Draw the initial state: num_dims independent prior draws at time t0.
inline MultiSimplexState sample_prior_state(const SampleRunConfig& config,
                                            RngStream& rng) {
  std::vector<SimplexPoint> dims;
  dims.reserve(config.num_dims);
  for (int l = 0; l < config.num_dims; ++l) {
    dims.push_back(sample_marginal_prior(config.prior, rng));
  }
  return MultiSimplexState(std::move(dims), config.t0);
}

inline std::vector<int> decode_posteriors(const std::vector<CategoricalDist>& pi,
                                          DecodeMode mode, RngStream& rng) {
  std::vector<int> out(pi.size());
  if (mode == DecodeMode::kArgmaxPosterior) {
    for (std::size_t l = 0; l < pi.size(); ++l) out[l] = pi[l].argmax();
    return out;
  }
  const std::uint64_t step_key = rng.next_u64();
  for (std::size_t l = 0; l < pi.size(); ++l) {
    RngStream sub(derive_seed(step_key, l));
    out[l] = pi[l].sample(sub);
  }
  return out;
}

/// Full reverse process: prior draw at t0, T-1 uniform denoising steps with
/// optional correctors after each, then a final decode from the posterior.
/// Guidance, when configured, applies to every posterior evaluation.
inline std::vector<int> sample(const PosteriorModel& model,
                               const SampleRunConfig& config,
                               const GuidanceConfig& guidance,
                               const DirichletPath& path, RngStream& rng,
                               std::vector<MultiSimplexState>* trace = nullptr) {
  config.validate();
  guidance.validate();
  MultiSimplexState state = sample_prior_state(config, rng);
  if (trace) trace->push_back(state);
  const double dt = (path.schedule.t_max - config.t0) /
                    static_cast<double>(config.num_steps);
  for (int k = 1; k < config.num_steps; ++k) {
    const double t_next = config.t0 + dt * static_cast<double>(k);
    state = renoise_from_posteriors(guided_posteriors(model, guidance, state),
                                    t_next, path.schedule, rng);
    for (int c = 0; c < config.correctors_per_step; ++c) {
      state = renoise_from_posteriors(guided_posteriors(model, guidance, state),
                                      t_next, path.schedule, rng);
    }
    if (trace) trace->push_back(state);
  }
  return decode_posteriors(guided_posteriors(model, guidance, state),
                           config.decode, rng);
}

/// Self-normalized importance-sampling transition used to validate the
/// classifier-guidance tilt: draws candidates from the untilted kernel and
/// resamples them with weights exp(omega * x . grad). Asymptotically exact
/// for the tilted kernel, so it serves as the oracle the cheap vertex-level
/// tilt is checked against.
inline MultiSimplexState guided_denoise_step_snis(
    const PosteriorModel& model, const MultiSimplexState& state, double t_next,
    const DirichletPath& path,
    const std::vector<std::vector<double>>& grads, double omega,
    RngStream& rng, int num_candidates = 32) {
  if (!(t_next >= state.t)) {
    throw std::invalid_argument("guided_denoise_step_snis: t_next below state time");
  }
  const std::vector<CategoricalDist> pi = model.evaluate(state);
  const double alpha = path.schedule.alpha(t_next);
  const std::uint64_t step_key = rng.next_u64();
  std::vector<SimplexPoint> dims;
  dims.reserve(pi.size());
  for (std::size_t l = 0; l < pi.size(); ++l) {
    RngStream sub(derive_seed(step_key, l));
    std::vector<SimplexPoint> candidates;
    std::vector<double> logw;
    candidates.reserve(num_candidates);
    logw.reserve(num_candidates);
    for (int c = 0; c < num_candidates; ++c) {
      const int clean = pi[l].sample(sub);
      SimplexPoint x = sample_dirichlet(
          DirichletParams::one_plus_scaled_vertex(
              clean, pi[l].num_categories(), alpha),
          sub);
      double dot = 0.0;
      for (int k = 0; k < x.num_categories(); ++k) dot += x[k] * grads[l][k];
      logw.push_back(omega * dot);
      candidates.push_back(std::move(x));
    }
    dims.push_back(candidates[CategoricalDist::from_logits(logw).sample(sub)]);
  }
  return MultiSimplexState(std::move(dims), std::min(t_next, path.schedule.t_max));
}

}  // namespace unside
