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
#include <string>
#include <vector>

#include "unside/params.hpp"
#include "unside/posterior.hpp"
#include "unside/training.hpp"

namespace unside {

/// Multi-simplex layout of a graph state: node dimensions first (omitted when
/// K_v = 1, which carries no information), then upper-triangular edge
/// dimensions in row-major pair order.
struct GraphStateLayout {
  int n = 0;
  int num_node_categories = 1;
  int num_edge_categories = 2;

  bool has_node_channel() const { return num_node_categories >= 2; }
  int node_dims() const { return has_node_channel() ? n : 0; }
  int edge_dims() const { return n * (n - 1) / 2; }
  int total_dims() const { return node_dims() + edge_dims(); }

  /// Index of pair (i, j), i < j, within the edge channel.
  int pair_index(int i, int j) const {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }
};

/// Recover the node count from a state length, given the channel layout.
inline int infer_node_count(std::size_t num_dims, bool node_channel) {
  // node_channel: L = n(n+1)/2, otherwise L = n(n-1)/2.
  const double L = static_cast<double>(num_dims);
  const double root = node_channel ? (-1.0 + std::sqrt(1.0 + 8.0 * L)) / 2.0
                                   : (1.0 + std::sqrt(1.0 + 8.0 * L)) / 2.0;
  const int n = static_cast<int>(std::lround(root));
  const std::size_t expect = node_channel
                                 ? static_cast<std::size_t>(n) * (n + 1) / 2
                                 : static_cast<std::size_t>(n) * (n - 1) / 2;
  if (n < 2 || expect != num_dims) {
    throw std::invalid_argument("infer_node_count: state length is not a graph layout");
  }
  return n;
}

/// A small permutation-equivariant message-passing denoiser over noisy graph
/// states. Each round computes directed messages
///
///   h_ij = relu(W_src x_i + W_trg x_j + W_edge e_ij + b)
///
/// then updates edges e_ij <- f_edge(h_ij) and nodes by residual sum
/// aggregation x_i <- x_i + sum_j f_node(h_ij). Edge logits are symmetrized
/// by averaging the two directions. No attention or layer norm; f_node and
/// f_edge are single linear maps so the backward pass stays hand-checkable.
class MiniMpnn : public PosteriorModel {
 public:
  MiniMpnn(int num_node_categories, int num_edge_categories, int hidden,
           int rounds, std::uint64_t init_seed = 1)
      : K_v_(num_node_categories),
        K_e_(num_edge_categories),
        d_h_(hidden),
        d_e_(hidden / 4),
        rounds_(rounds) {
    if (hidden % 4 != 0 || hidden < 4) {
      throw std::invalid_argument("MiniMpnn: hidden size must be a positive multiple of 4");
    }
    if (K_v_ < 1 || K_e_ < 2 || rounds_ < 1) {
      throw std::invalid_argument("MiniMpnn: bad channel or round configuration");
    }
    const std::size_t dh = d_h_, de = d_e_;
    const std::size_t node_in = node_feature_dim();
    w_nemb_ = store_.add("node_embed_w", {dh, node_in});
    b_nemb_ = store_.add("node_embed_b", {dh});
    w_eemb_ = store_.add("edge_embed_w", {de, static_cast<std::size_t>(K_e_)});
    b_eemb_ = store_.add("edge_embed_b", {de});
    for (int r = 0; r < rounds_; ++r) {
      const std::string tag = "round" + std::to_string(r) + "_";
      rw_.push_back({store_.add(tag + "src_w", {de, dh}),
                     store_.add(tag + "trg_w", {de, dh}),
                     store_.add(tag + "edge_w", {de, de}),
                     store_.add(tag + "msg_b", {de}),
                     store_.add(tag + "fnode_w", {dh, de}),
                     store_.add(tag + "fnode_b", {dh}),
                     store_.add(tag + "fedge_w", {de, de}),
                     store_.add(tag + "fedge_b", {de})});
    }
    if (has_node_channel()) {
      w_nout_ = store_.add("node_out_w", {static_cast<std::size_t>(K_v_), dh});
      b_nout_ = store_.add("node_out_b", {static_cast<std::size_t>(K_v_)});
    }
    w_eout_ = store_.add("edge_out_w", {static_cast<std::size_t>(K_e_), de});
    b_eout_ = store_.add("edge_out_b", {static_cast<std::size_t>(K_e_)});
    RngStream rng(init_seed);
    store_.init_random(rng);
  }

  bool has_node_channel() const { return K_v_ >= 2; }
  int num_node_categories() const { return K_v_; }
  int num_edge_categories() const { return K_e_; }
  int hidden() const { return d_h_; }
  int rounds() const { return rounds_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  std::vector<CategoricalDist> evaluate(
      const MultiSimplexState& state) const override {
    Tape tape;
    forward(state, tape);
    std::vector<CategoricalDist> out;
    out.reserve(state.size());
    if (has_node_channel()) {
      for (int i = 0; i < tape.n; ++i) {
        out.push_back(CategoricalDist::from_logits(std::vector<double>(
            tape.node_logits.begin() + i * K_v_,
            tape.node_logits.begin() + (i + 1) * K_v_)));
      }
    }
    for (int p = 0; p < tape.n * (tape.n - 1) / 2; ++p) {
      out.push_back(CategoricalDist::from_logits(std::vector<double>(
          tape.edge_logits.begin() + p * K_e_,
          tape.edge_logits.begin() + (p + 1) * K_e_)));
    }
    return out;
  }

  double nll_backward(const TrainExample& ex, double gamma, double scale) {
    Tape tape;
    forward(ex.state, tape);
    const int n = tape.n;
    const int pairs = n * (n - 1) / 2;
    const std::size_t node_dims = has_node_channel() ? n : 0;
    if (ex.node_dims != node_dims ||
        ex.target.size() != node_dims + static_cast<std::size_t>(pairs)) {
      throw std::invalid_argument("MiniMpnn: example layout mismatch");
    }

    double loss = 0.0;
    std::vector<double> dx(static_cast<std::size_t>(n) * d_h_, 0.0);
    if (has_node_channel()) {
      std::vector<double> dz(K_v_);
      for (int i = 0; i < n; ++i) {
        auto pi = CategoricalDist::from_logits(std::vector<double>(
            tape.node_logits.begin() + i * K_v_,
            tape.node_logits.begin() + (i + 1) * K_v_));
        const int target = ex.target[i];
        loss += gamma * -pi.log_prob(target) / static_cast<double>(n);
        nll_logit_grad(pi, target, scale * gamma / static_cast<double>(n), dz);
        matvec_backward(store_.values(w_nout_, K_v_ * d_h_),
                        store_.grads(w_nout_, K_v_ * d_h_), K_v_, d_h_,
                        node_view(tape.x_rounds.back(), i), node_span(dx, i), dz);
        auto gb = store_.grads(b_nout_, K_v_);
        for (int k = 0; k < K_v_; ++k) gb[k] += dz[k];
      }
    }

    // Symmetrized edge logits: each direction receives half the gradient.
    std::vector<double> de_grad(static_cast<std::size_t>(n) * n * d_e_, 0.0);
    {
      std::vector<double> dy(K_e_), dy_half(K_e_);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const int p = layout_for(n).pair_index(i, j);
          auto pi = CategoricalDist::from_logits(std::vector<double>(
              tape.edge_logits.begin() + p * K_e_,
              tape.edge_logits.begin() + (p + 1) * K_e_));
          const int target = ex.target[node_dims + p];
          loss += (1.0 - gamma) * -pi.log_prob(target) / static_cast<double>(pairs);
          nll_logit_grad(pi, target,
                         scale * (1.0 - gamma) / static_cast<double>(pairs), dy);
          for (int k = 0; k < K_e_; ++k) dy_half[k] = 0.5 * dy[k];
          for (int dir = 0; dir < 2; ++dir) {
            const int a = dir == 0 ? i : j;
            const int b = dir == 0 ? j : i;
            matvec_backward(store_.values(w_eout_, K_e_ * d_e_),
                            store_.grads(w_eout_, K_e_ * d_e_), K_e_, d_e_,
                            edge_view(tape.e_rounds.back(), n, a, b),
                            edge_span(de_grad, n, a, b), dy_half);
            auto gb = store_.grads(b_eout_, K_e_);
            for (int k = 0; k < K_e_; ++k) gb[k] += dy_half[k];
          }
        }
      }
    }

    backward_rounds(tape, dx, de_grad);
    return loss;
  }

 private:
  struct RoundWeights {
    std::size_t src_w, trg_w, edge_w, msg_b, fnode_w, fnode_b, fedge_w, fedge_b;
  };

  struct Tape {
    int n = 0;
    std::vector<double> node_inputs;              // n x node_feature_dim
    std::vector<double> edge_inputs;              // pairs x K_e
    std::vector<std::vector<double>> x_rounds;    // rounds+1 entries, n x d_h
    std::vector<std::vector<double>> e_rounds;    // rounds+1 entries, n*n x d_e
    std::vector<std::vector<double>> pre_rounds;  // rounds entries, n*n x d_e
    std::vector<double> node_logits;              // n x K_v
    std::vector<double> edge_logits;              // pairs x K_e
  };

  int node_feature_dim() const { return (has_node_channel() ? K_v_ : 0) + 2; }

  GraphStateLayout layout_for(int n) const { return {n, K_v_, K_e_}; }

  static std::span<const double> slice(const std::vector<double>& v, int idx,
                                       int width) {
    return {v.data() + static_cast<std::size_t>(idx) * width,
            static_cast<std::size_t>(width)};
  }
  static std::span<double> slice(std::vector<double>& v, int idx, int width) {
    return {v.data() + static_cast<std::size_t>(idx) * width,
            static_cast<std::size_t>(width)};
  }
  std::span<const double> node_view(const std::vector<double>& x, int i) const {
    return slice(x, i, d_h_);
  }
  std::span<double> node_span(std::vector<double>& x, int i) const {
    return slice(x, i, d_h_);
  }
  std::span<const double> edge_view(const std::vector<double>& e, int n, int i,
                                    int j) const {
    return slice(e, i * n + j, d_e_);
  }
  std::span<double> edge_span(std::vector<double>& e, int n, int i, int j) const {
    return slice(e, i * n + j, d_e_);
  }

  void forward(const MultiSimplexState& state, Tape& tape) const {
    const int n = infer_node_count(state.size(), has_node_channel());
    const GraphStateLayout layout = layout_for(n);
    tape.n = n;
    const int pairs = layout.edge_dims();
    const int nfeat = node_feature_dim();

    tape.node_inputs.assign(static_cast<std::size_t>(n) * nfeat, 0.0);
    for (int i = 0; i < n; ++i) {
      std::vector<double> feats;
      feats.reserve(nfeat);
      if (has_node_channel()) {
        const auto& dim = state.dims[i];
        if (dim.num_categories() != K_v_) {
          throw std::invalid_argument("MiniMpnn: node channel K mismatch");
        }
        feats.insert(feats.end(), dim.coords().begin(), dim.coords().end());
      }
      append_time_features(state.t, feats);
      std::copy(feats.begin(), feats.end(),
                tape.node_inputs.begin() + static_cast<std::size_t>(i) * nfeat);
    }
    tape.edge_inputs.assign(static_cast<std::size_t>(pairs) * K_e_, 0.0);
    for (int p = 0; p < pairs; ++p) {
      const auto& dim = state.dims[layout.node_dims() + p];
      if (dim.num_categories() != K_e_) {
        throw std::invalid_argument("MiniMpnn: edge channel K mismatch");
      }
      std::copy(dim.coords().begin(), dim.coords().end(),
                tape.edge_inputs.begin() + static_cast<std::size_t>(p) * K_e_);
    }

    // Embeddings.
    tape.x_rounds.assign(1, std::vector<double>(static_cast<std::size_t>(n) * d_h_, 0.0));
    tape.e_rounds.assign(1, std::vector<double>(static_cast<std::size_t>(n) * n * d_e_, 0.0));
    auto& x0 = tape.x_rounds[0];
    auto& e0 = tape.e_rounds[0];
    const auto bn = store_.values(b_nemb_, d_h_);
    for (int i = 0; i < n; ++i) {
      auto xi = slice(x0, i, d_h_);
      for (int k = 0; k < d_h_; ++k) xi[k] = bn[k];
      matvec_acc(store_.values(w_nemb_, d_h_ * nfeat), d_h_, nfeat,
                 slice(tape.node_inputs, i, nfeat), xi);
    }
    const auto be = store_.values(b_eemb_, d_e_);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const int p = layout.pair_index(std::min(i, j), std::max(i, j));
        auto eij = edge_span(e0, n, i, j);
        for (int k = 0; k < d_e_; ++k) eij[k] = be[k];
        matvec_acc(store_.values(w_eemb_, d_e_ * K_e_), d_e_, K_e_,
                   slice(tape.edge_inputs, p, K_e_), eij);
      }
    }

    // Message rounds.
    for (int r = 0; r < rounds_; ++r) {
      const auto& rw = rw_[r];
      const auto& x_in = tape.x_rounds[r];
      const auto& e_in = tape.e_rounds[r];
      tape.pre_rounds.emplace_back(static_cast<std::size_t>(n) * n * d_e_, 0.0);
      auto& pre = tape.pre_rounds.back();
      std::vector<double> x_out(x_in);
      std::vector<double> e_out(static_cast<std::size_t>(n) * n * d_e_, 0.0);
      const auto bmsg = store_.values(rw.msg_b, d_e_);
      const auto bfn = store_.values(rw.fnode_b, d_h_);
      const auto bfe = store_.values(rw.fedge_b, d_e_);
      std::vector<double> h(d_e_);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          auto pij = edge_span(pre, n, i, j);
          for (int k = 0; k < d_e_; ++k) pij[k] = bmsg[k];
          matvec_acc(store_.values(rw.src_w, d_e_ * d_h_), d_e_, d_h_,
                     node_view(x_in, i), pij);
          matvec_acc(store_.values(rw.trg_w, d_e_ * d_h_), d_e_, d_h_,
                     node_view(x_in, j), pij);
          matvec_acc(store_.values(rw.edge_w, d_e_ * d_e_), d_e_, d_e_,
                     edge_view(e_in, n, i, j), pij);
          for (int k = 0; k < d_e_; ++k) h[k] = std::max(pij[k], 0.0);

          auto eij = edge_span(e_out, n, i, j);
          for (int k = 0; k < d_e_; ++k) eij[k] = bfe[k];
          matvec_acc(store_.values(rw.fedge_w, d_e_ * d_e_), d_e_, d_e_, h, eij);

          auto xi = slice(x_out, i, d_h_);
          for (int k = 0; k < d_h_; ++k) xi[k] += bfn[k];
          matvec_acc(store_.values(rw.fnode_w, d_h_ * d_e_), d_h_, d_e_, h, xi);
        }
      }
      tape.x_rounds.push_back(std::move(x_out));
      tape.e_rounds.push_back(std::move(e_out));
    }

    // Output heads.
    const auto& xR = tape.x_rounds.back();
    const auto& eR = tape.e_rounds.back();
    if (has_node_channel()) {
      tape.node_logits.assign(static_cast<std::size_t>(n) * K_v_, 0.0);
      const auto b = store_.values(b_nout_, K_v_);
      for (int i = 0; i < n; ++i) {
        auto zi = slice(tape.node_logits, i, K_v_);
        for (int k = 0; k < K_v_; ++k) zi[k] = b[k];
        matvec_acc(store_.values(w_nout_, K_v_ * d_h_), K_v_, d_h_,
                   node_view(xR, i), zi);
      }
    }
    tape.edge_logits.assign(static_cast<std::size_t>(pairs) * K_e_, 0.0);
    const auto b = store_.values(b_eout_, K_e_);
    std::vector<double> y(K_e_);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        auto out = slice(tape.edge_logits, layout.pair_index(i, j), K_e_);
        for (int dir = 0; dir < 2; ++dir) {
          const int a = dir == 0 ? i : j;
          const int bnode = dir == 0 ? j : i;
          for (int k = 0; k < K_e_; ++k) y[k] = b[k];
          matvec_acc(store_.values(w_eout_, K_e_ * d_e_), K_e_, d_e_,
                     edge_view(eR, n, a, bnode), y);
          for (int k = 0; k < K_e_; ++k) out[k] += 0.5 * y[k];
        }
      }
    }
  }

  /// Propagates dL/dx^R and dL/de^R back through all rounds and embeddings.
  void backward_rounds(const Tape& tape, std::vector<double>& dx,
                       std::vector<double>& de) {
    const int n = tape.n;
    const GraphStateLayout layout = layout_for(n);
    std::vector<double> dh(d_e_), dpre(d_e_);
    for (int r = rounds_ - 1; r >= 0; --r) {
      const auto& rw = rw_[r];
      const auto& x_in = tape.x_rounds[r];
      const auto& e_in = tape.e_rounds[r];
      const auto& pre = tape.pre_rounds[r];
      std::vector<double> dx_in(dx);  // residual connection on nodes
      std::vector<double> de_in(static_cast<std::size_t>(n) * n * d_e_, 0.0);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          // dL/dh from the node update of x_i and the edge update of e_ij.
          std::fill(dh.begin(), dh.end(), 0.0);
          matvec_backward(store_.values(rw.fnode_w, d_h_ * d_e_),
                          store_.grads(rw.fnode_w, d_h_ * d_e_), d_h_, d_e_,
                          relu_of(pre, n, i, j), dh, node_view(dx, i));
          {
            auto gb = store_.grads(rw.fnode_b, d_h_);
            const auto g = node_view(dx, i);
            for (int k = 0; k < d_h_; ++k) gb[k] += g[k];
          }
          matvec_backward(store_.values(rw.fedge_w, d_e_ * d_e_),
                          store_.grads(rw.fedge_w, d_e_ * d_e_), d_e_, d_e_,
                          relu_of(pre, n, i, j), dh, edge_view(de, n, i, j));
          {
            auto gb = store_.grads(rw.fedge_b, d_e_);
            const auto g = edge_view(de, n, i, j);
            for (int k = 0; k < d_e_; ++k) gb[k] += g[k];
          }
          const auto pij = edge_view(pre, n, i, j);
          for (int k = 0; k < d_e_; ++k) {
            dpre[k] = pij[k] > 0.0 ? dh[k] : 0.0;
          }
          {
            auto gb = store_.grads(rw.msg_b, d_e_);
            for (int k = 0; k < d_e_; ++k) gb[k] += dpre[k];
          }
          matvec_backward(store_.values(rw.src_w, d_e_ * d_h_),
                          store_.grads(rw.src_w, d_e_ * d_h_), d_e_, d_h_,
                          node_view(x_in, i), node_span(dx_in, i), dpre);
          matvec_backward(store_.values(rw.trg_w, d_e_ * d_h_),
                          store_.grads(rw.trg_w, d_e_ * d_h_), d_e_, d_h_,
                          node_view(x_in, j), node_span(dx_in, j), dpre);
          matvec_backward(store_.values(rw.edge_w, d_e_ * d_e_),
                          store_.grads(rw.edge_w, d_e_ * d_e_), d_e_, d_e_,
                          edge_view(e_in, n, i, j), edge_span(de_in, n, i, j),
                          dpre);
        }
      }
      dx = std::move(dx_in);
      de = std::move(de_in);
    }

    // Embedding layers.
    const int nfeat = node_feature_dim();
    for (int i = 0; i < n; ++i) {
      matvec_backward(store_.values(w_nemb_, d_h_ * nfeat),
                      store_.grads(w_nemb_, d_h_ * nfeat), d_h_, nfeat,
                      slice(tape.node_inputs, i, nfeat), {}, node_view(dx, i));
      auto gb = store_.grads(b_nemb_, d_h_);
      const auto g = node_view(dx, i);
      for (int k = 0; k < d_h_; ++k) gb[k] += g[k];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const int p = layout.pair_index(std::min(i, j), std::max(i, j));
        matvec_backward(store_.values(w_eemb_, d_e_ * K_e_),
                        store_.grads(w_eemb_, d_e_ * K_e_), d_e_, K_e_,
                        slice(tape.edge_inputs, p, K_e_), {},
                        edge_view(de, n, i, j));
        auto gb = store_.grads(b_eemb_, d_e_);
        const auto g = edge_view(de, n, i, j);
        for (int k = 0; k < d_e_; ++k) gb[k] += g[k];
      }
    }
  }

  /// relu(pre_ij) recomputed on the fly; cheaper than taping h separately.
  std::span<const double> relu_of(const std::vector<double>& pre, int n, int i,
                                  int j) const {
    relu_buf_.resize(d_e_);
    const auto p = edge_view(pre, n, i, j);
    for (int k = 0; k < d_e_; ++k) relu_buf_[k] = std::max(p[k], 0.0);
    return {relu_buf_.data(), static_cast<std::size_t>(d_e_)};
  }

  int K_v_, K_e_, d_h_, d_e_, rounds_;
  ParamStore store_;
  std::size_t w_nemb_ = 0, b_nemb_ = 0, w_eemb_ = 0, b_eemb_ = 0;
  std::size_t w_nout_ = 0, b_nout_ = 0, w_eout_ = 0, b_eout_ = 0;
  std::vector<RoundWeights> rw_;
  mutable std::vector<double> relu_buf_;
};

inline std::vector<CategoricalDist> mpnn_forward(const MiniMpnn& model,
                                                 const MultiSimplexState& state) {
  return model.evaluate(state);
}

}  // namespace unside
