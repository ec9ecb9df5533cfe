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
#include <memory>
#include <stdexcept>
#include <vector>

#include "unside/schedule.hpp"
#include "unside/simplex.hpp"

namespace unside {

/// A denoiser: maps a noisy multi-simplex state at time t to per-dimension
/// categorical posteriors over the clean categories. Evaluation must be
/// deterministic given the state.
class PosteriorModel {
 public:
  virtual ~PosteriorModel() = default;
  virtual std::vector<CategoricalDist> evaluate(
      const MultiSimplexState& state) const = 0;
};

/// A finite-support data distribution: M distinct clean states (vectors of L
/// category indices) with normalized weights. Small enough to enumerate.
class AtomDataset {
 public:
  AtomDataset(std::vector<std::vector<int>> atoms, std::vector<double> weights,
              int num_categories)
      : atoms_(std::move(atoms)),
        num_categories_(num_categories) {
    if (atoms_.empty()) {
      throw std::invalid_argument("AtomDataset: need at least one atom");
    }
    if (atoms_.size() != weights.size()) {
      throw std::invalid_argument("AtomDataset: atoms/weights size mismatch");
    }
    const std::size_t L = atoms_.front().size();
    for (const auto& a : atoms_) {
      if (a.size() != L) {
        throw std::invalid_argument("AtomDataset: atoms have unequal length");
      }
      for (int c : a) {
        if (c < 0 || c >= num_categories_) {
          throw std::invalid_argument("AtomDataset: category out of range");
        }
      }
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
        if (atoms_[i] == atoms_[j]) {
          throw std::invalid_argument("AtomDataset: atoms must be distinct");
        }
      }
    }
    weights_ = CategoricalDist::from_probs(std::move(weights));
  }

  static AtomDataset equiprobable(std::vector<std::vector<int>> atoms,
                                  int num_categories) {
    const std::size_t m = atoms.size();
    return AtomDataset(std::move(atoms), std::vector<double>(m, 1.0),
                       num_categories);
  }

  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t num_dims() const { return atoms_.front().size(); }
  int num_categories() const { return num_categories_; }
  const std::vector<int>& atom(std::size_t m) const { return atoms_[m]; }
  const CategoricalDist& weights() const { return weights_; }

  /// Draw an index m ~ weights.
  std::size_t sample_index(RngStream& rng) const {
    return static_cast<std::size_t>(weights_.sample(rng));
  }

  /// Per-dimension marginal distribution over categories.
  std::vector<CategoricalDist> marginals() const {
    std::vector<CategoricalDist> out;
    out.reserve(num_dims());
    for (std::size_t l = 0; l < num_dims(); ++l) {
      std::vector<double> p(num_categories_, 0.0);
      for (std::size_t m = 0; m < atoms_.size(); ++m) {
        p[atoms_[m][l]] += weights_.prob(static_cast<int>(m));
      }
      out.push_back(CategoricalDist::from_probs(std::move(p)));
    }
    return out;
  }

 private:
  std::vector<std::vector<int>> atoms_;
  CategoricalDist weights_;
  int num_categories_;
};

/// The exact posterior over clean states for a finite-support dataset under
/// the Dirichlet path: weights each atom by its likelihood of producing the
/// observed noisy state, in log space, then marginalizes per dimension.
class ExactPosterior : public PosteriorModel {
 public:
  ExactPosterior(AtomDataset dataset, DirichletPath path)
      : dataset_(std::move(dataset)), path_(std::move(path)) {
    if (dataset_.num_categories() != path_.num_categories) {
      throw std::invalid_argument("ExactPosterior: dataset/path K mismatch");
    }
  }

  const AtomDataset& dataset() const { return dataset_; }
  const DirichletPath& path() const { return path_; }

  /// Posterior weights over atoms given the state (softmax of log joint).
  CategoricalDist atom_posterior(const MultiSimplexState& state) const {
    if (state.size() != dataset_.num_dims()) {
      throw std::invalid_argument("ExactPosterior: state length mismatch");
    }
    const double alpha = path_.schedule.alpha(state.t);
    const int K = dataset_.num_categories();
    // log B(1 + alpha e_k) is the same for every k; it cancels in the
    // softmax but keeping it makes the per-atom terms true log densities.
    const double log_beta_term =
        log_gamma(1.0 + alpha) - log_gamma(static_cast<double>(K) + alpha);
    std::vector<double> log_w(dataset_.num_atoms());
    for (std::size_t m = 0; m < dataset_.num_atoms(); ++m) {
      double acc = dataset_.weights().log_prob(static_cast<int>(m));
      const auto& atom = dataset_.atom(m);
      for (std::size_t l = 0; l < dataset_.num_dims(); ++l) {
        if (state.dims[l].num_categories() != K) {
          throw std::invalid_argument("ExactPosterior: state K mismatch");
        }
        acc += alpha * std::log(state.dims[l][atom[l]]) - log_beta_term;
      }
      log_w[m] = acc;
    }
    return CategoricalDist::from_logits(std::move(log_w));
  }

  std::vector<CategoricalDist> evaluate(
      const MultiSimplexState& state) const override {
    const CategoricalDist atom_post = atom_posterior(state);
    const int K = dataset_.num_categories();
    std::vector<CategoricalDist> out;
    out.reserve(dataset_.num_dims());
    for (std::size_t l = 0; l < dataset_.num_dims(); ++l) {
      std::vector<double> p(K, 0.0);
      for (std::size_t m = 0; m < dataset_.num_atoms(); ++m) {
        p[dataset_.atom(m)[l]] += atom_post.prob(static_cast<int>(m));
      }
      out.push_back(CategoricalDist::from_probs(std::move(p)));
    }
    return out;
  }

 private:
  AtomDataset dataset_;
  DirichletPath path_;
};

inline std::vector<CategoricalDist> exact_posterior_evaluate(
    const ExactPosterior& model, const MultiSimplexState& state) {
  return model.evaluate(state);
}

/// A posterior that ignores the state and always returns fixed marginals.
/// Useful as a degenerate/perturbed reference in tests and benchmarks.
class FixedPosterior : public PosteriorModel {
 public:
  explicit FixedPosterior(std::vector<CategoricalDist> dists)
      : dists_(std::move(dists)) {}

  std::vector<CategoricalDist> evaluate(
      const MultiSimplexState& state) const override {
    if (state.size() != dists_.size()) {
      throw std::invalid_argument("FixedPosterior: state length mismatch");
    }
    return dists_;
  }

 private:
  std::vector<CategoricalDist> dists_;
};

}  // namespace unside
