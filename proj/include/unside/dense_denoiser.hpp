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
#include "unside/posterior.hpp"
#include "unside/training.hpp"

namespace unside {

/// A flat denoiser: one hidden ReLU layer over the flattened state plus time
/// features, then L softmax heads of size K. Backprop is hand-rolled.
class DenseDenoiser : public PosteriorModel {
 public:
  DenseDenoiser(int num_dims, int num_categories, int hidden,
                std::uint64_t init_seed = 1)
      : L_(num_dims), K_(num_categories), H_(hidden),
        in_(num_dims * num_categories + 2) {
    w1_ = store_.add("w1", {static_cast<std::size_t>(H_),
                            static_cast<std::size_t>(in_)});
    b1_ = store_.add("b1", {static_cast<std::size_t>(H_)});
    w2_ = store_.add("w2", {static_cast<std::size_t>(L_ * K_),
                            static_cast<std::size_t>(H_)});
    b2_ = store_.add("b2", {static_cast<std::size_t>(L_ * K_)});
    RngStream rng(init_seed);
    store_.init_random(rng);
  }

  int num_dims() const { return L_; }
  int num_categories() const { return K_; }
  int hidden() const { return H_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  std::vector<CategoricalDist> evaluate(
      const MultiSimplexState& state) const override {
    Tape tape;
    forward(state, tape);
    std::vector<CategoricalDist> out;
    out.reserve(L_);
    for (int l = 0; l < L_; ++l) {
      out.push_back(CategoricalDist::from_logits(std::vector<double>(
          tape.logits.begin() + l * K_, tape.logits.begin() + (l + 1) * K_)));
    }
    return out;
  }

  /// Example loss; accumulates scale * gradient into the store.
  double nll_backward(const TrainExample& ex, double gamma, double scale) {
    Tape tape;
    forward(ex.state, tape);
    std::vector<CategoricalDist> pi;
    pi.reserve(L_);
    for (int l = 0; l < L_; ++l) {
      pi.push_back(CategoricalDist::from_logits(std::vector<double>(
          tape.logits.begin() + l * K_, tape.logits.begin() + (l + 1) * K_)));
    }
    const double loss = weighted_nll(pi, ex.target, ex.node_dims, gamma);

    const std::size_t edge_dims = static_cast<std::size_t>(L_) - ex.node_dims;
    std::vector<double> dlogits(static_cast<std::size_t>(L_) * K_, 0.0);
    for (int l = 0; l < L_; ++l) {
      const bool is_node = static_cast<std::size_t>(l) < ex.node_dims;
      const double group_weight =
          is_node ? gamma / static_cast<double>(ex.node_dims)
                  : (1.0 - gamma) / static_cast<double>(edge_dims);
      nll_logit_grad(pi[l], ex.target[l], scale * group_weight,
                     {dlogits.data() + l * K_, static_cast<std::size_t>(K_)});
    }

    // logits = w2 h + b2
    std::vector<double> dh(H_, 0.0);
    matvec_backward(store_.values(w2_, L_ * K_ * H_), store_.grads(w2_, L_ * K_ * H_),
                    L_ * K_, H_, tape.h, dh, dlogits);
    auto gb2 = store_.grads(b2_, L_ * K_);
    for (int i = 0; i < L_ * K_; ++i) gb2[i] += dlogits[i];

    // h = relu(z1), z1 = w1 u + b1
    for (int i = 0; i < H_; ++i) {
      if (tape.z1[i] <= 0.0) dh[i] = 0.0;
    }
    matvec_backward(store_.values(w1_, H_ * in_), store_.grads(w1_, H_ * in_),
                    H_, in_, tape.input, {}, dh);
    auto gb1 = store_.grads(b1_, H_);
    for (int i = 0; i < H_; ++i) gb1[i] += dh[i];
    return loss;
  }

 private:
  struct Tape {
    std::vector<double> input;
    std::vector<double> z1;
    std::vector<double> h;
    std::vector<double> logits;
  };

  void forward(const MultiSimplexState& state, Tape& tape) const {
    if (static_cast<int>(state.size()) != L_) {
      throw std::invalid_argument("DenseDenoiser: state length mismatch");
    }
    tape.input.reserve(in_);
    for (const auto& dim : state.dims) {
      if (dim.num_categories() != K_) {
        throw std::invalid_argument("DenseDenoiser: state K mismatch");
      }
      tape.input.insert(tape.input.end(), dim.coords().begin(),
                        dim.coords().end());
    }
    append_time_features(state.t, tape.input);

    tape.z1.assign(H_, 0.0);
    const auto b1 = store_.values(b1_, H_);
    for (int i = 0; i < H_; ++i) tape.z1[i] = b1[i];
    matvec_acc(store_.values(w1_, H_ * in_), H_, in_, tape.input, tape.z1);
    tape.h.resize(H_);
    for (int i = 0; i < H_; ++i) tape.h[i] = std::max(tape.z1[i], 0.0);

    tape.logits.assign(L_ * K_, 0.0);
    const auto b2 = store_.values(b2_, L_ * K_);
    for (int i = 0; i < L_ * K_; ++i) tape.logits[i] = b2[i];
    matvec_acc(store_.values(w2_, L_ * K_ * H_), L_ * K_, H_, tape.h,
               tape.logits);
  }

  int L_, K_, H_, in_;
  ParamStore store_;
  std::size_t w1_, b1_, w2_, b2_;
};

inline std::vector<CategoricalDist> dense_forward(const DenseDenoiser& model,
                                                  const MultiSimplexState& state) {
  return model.evaluate(state);
}

}  // namespace unside
