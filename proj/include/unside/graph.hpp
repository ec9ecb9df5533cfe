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
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "unside/mpnn.hpp"
#include "unside/schedule.hpp"
#include "unside/simplex.hpp"
#include "unside/training.hpp"

namespace unside {

/// An undirected attributed graph: node categories plus edge categories over
/// the upper triangle. Edge category 0 means "no edge"; symmetry holds by
/// construction since only i < j pairs are stored.
struct GraphInstance {
  int n = 0;
  std::vector<int> node_cats;  // size n
  std::vector<int> edge_cats;  // size n(n-1)/2, row-major upper triangle

  GraphInstance() = default;
  explicit GraphInstance(int num_nodes)
      : n(num_nodes),
        node_cats(num_nodes, 0),
        edge_cats(static_cast<std::size_t>(num_nodes) * (num_nodes - 1) / 2, 0) {
    if (num_nodes < 1) {
      throw std::invalid_argument("GraphInstance: need at least one node");
    }
  }

  int pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

  int edge_cat(int i, int j) const { return edge_cats[pair_index(i, j)]; }
  void set_edge(int i, int j, int cat) { edge_cats[pair_index(i, j)] = cat; }
  bool has_edge(int i, int j) const { return edge_cat(i, j) != 0; }

  int num_edges() const {
    return static_cast<int>(
        std::count_if(edge_cats.begin(), edge_cats.end(),
                      [](int c) { return c != 0; }));
  }

  int degree(int i) const {
    int d = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i && has_edge(i, j)) ++d;
    }
    return d;
  }

  bool operator==(const GraphInstance& other) const = default;
};

enum class GraphGenerator { kErdosRenyi, kTwoBlockSbm, kPathGraph };

/// Toy graph dataset recipe; deterministic given the seed.
struct GraphDatasetSpec {
  GraphGenerator generator = GraphGenerator::kErdosRenyi;
  int n = 8;
  int count = 1;
  double p = 0.3;       // Erdos-Renyi edge probability
  double p_in = 0.3;    // SBM within-block density
  double p_out = 0.05;  // SBM across-block density
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || count < 1) {
      throw std::invalid_argument("GraphDatasetSpec: bad n or count");
    }
    for (double q : {p, p_in, p_out}) {
      if (!(q >= 0.0) || !(q <= 1.0)) {
        throw std::invalid_argument("GraphDatasetSpec: probability out of [0, 1]");
      }
    }
  }
};

inline std::vector<GraphInstance> generate_dataset(const GraphDatasetSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed);
  std::vector<GraphInstance> out;
  out.reserve(spec.count);
  for (int c = 0; c < spec.count; ++c) {
    GraphInstance g(spec.n);
    switch (spec.generator) {
      case GraphGenerator::kErdosRenyi:
        for (int i = 0; i < spec.n; ++i) {
          for (int j = i + 1; j < spec.n; ++j) {
            if (rng.uniform01() < spec.p) g.set_edge(i, j, 1);
          }
        }
        break;
      case GraphGenerator::kTwoBlockSbm: {
        const int half = spec.n / 2;
        for (int i = 0; i < spec.n; ++i) {
          for (int j = i + 1; j < spec.n; ++j) {
            const bool same_block = (i < half) == (j < half);
            if (rng.uniform01() < (same_block ? spec.p_in : spec.p_out)) {
              g.set_edge(i, j, 1);
            }
          }
        }
        break;
      }
      case GraphGenerator::kPathGraph:
        for (int i = 0; i + 1 < spec.n; ++i) g.set_edge(i, i + 1, 1);
        break;
    }
    out.push_back(std::move(g));
  }
  return out;
}

/// Clean category layout of a graph under the multi-simplex encoding. The
/// node channel is dropped when K_v = 1 since it carries no information.
inline std::vector<int> encode_graph(const GraphInstance& g,
                                     const GraphStateLayout& layout) {
  if (g.n != layout.n) {
    throw std::invalid_argument("encode_graph: node count mismatch");
  }
  std::vector<int> cats;
  cats.reserve(layout.total_dims());
  if (layout.has_node_channel()) {
    for (int c : g.node_cats) {
      if (c < 0 || c >= layout.num_node_categories) {
        throw std::invalid_argument("encode_graph: node category out of range");
      }
      cats.push_back(c);
    }
  }
  for (int c : g.edge_cats) {
    if (c < 0 || c >= layout.num_edge_categories) {
      throw std::invalid_argument("encode_graph: edge category out of range");
    }
    cats.push_back(c);
  }
  return cats;
}

/// Argmax decoding of a (possibly noisy) state back to a graph.
inline GraphInstance decode_graph(const MultiSimplexState& state,
                                  const GraphStateLayout& layout) {
  if (static_cast<int>(state.size()) != layout.total_dims()) {
    throw std::invalid_argument("decode_graph: state length mismatch");
  }
  GraphInstance g(layout.n);
  for (int i = 0; i < layout.node_dims(); ++i) {
    g.node_cats[i] = nearest_vertex(state.dims[i]);
  }
  for (int p = 0; p < layout.edge_dims(); ++p) {
    g.edge_cats[p] = nearest_vertex(state.dims[layout.node_dims() + p]);
  }
  return g;
}

/// Decoding from clean categories (inverse of encode_graph).
inline GraphInstance decode_graph(const std::vector<int>& cats,
                                  const GraphStateLayout& layout) {
  if (static_cast<int>(cats.size()) != layout.total_dims()) {
    throw std::invalid_argument("decode_graph: category count mismatch");
  }
  GraphInstance g(layout.n);
  for (int i = 0; i < layout.node_dims(); ++i) g.node_cats[i] = cats[i];
  for (int p = 0; p < layout.edge_dims(); ++p) {
    g.edge_cats[p] = cats[layout.node_dims() + p];
  }
  return g;
}

/// Forward-noises a graph into a multi-simplex state, noising node dims with
/// K_v categories and edge dims with K_e categories under a shared schedule.
inline MultiSimplexState noise_graph(const GraphInstance& g,
                                     const GraphStateLayout& layout,
                                     const NoiseSchedule& schedule, double t,
                                     RngStream& rng) {
  std::vector<SimplexPoint> dims;
  dims.reserve(layout.total_dims());
  const double alpha = schedule.alpha(t);
  for (int i = 0; i < layout.node_dims(); ++i) {
    dims.push_back(sample_dirichlet(
        DirichletParams::one_plus_scaled_vertex(
            g.node_cats[i], layout.num_node_categories, alpha),
        rng));
  }
  for (int p = 0; p < layout.edge_dims(); ++p) {
    dims.push_back(sample_dirichlet(
        DirichletParams::one_plus_scaled_vertex(
            g.edge_cats[p], layout.num_edge_categories, alpha),
        rng));
  }
  return MultiSimplexState(std::move(dims), std::min(t, schedule.t_max));
}

/// Training example sampler for graph datasets.
inline TrainExample make_graph_example(const std::vector<GraphInstance>& graphs,
                                       const GraphStateLayout& layout,
                                       const NoiseSchedule& schedule,
                                       RngStream& rng) {
  const auto& g = graphs[rng.uniform_below(graphs.size())];
  const double t = rng.uniform01() * schedule.t_max;
  TrainExample ex;
  ex.target = encode_graph(g, layout);
  ex.state = noise_graph(g, layout, schedule, t, rng);
  ex.node_dims = layout.node_dims();
  return ex;
}

// ---------------------------------------------------------------------------
// Statistics

/// Union-find connected-component count.
inline int connected_components(const GraphInstance& g) {
  std::vector<int> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  int components = g.n;
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (!g.has_edge(i, j)) continue;
      const int a = find(i), b = find(j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components;
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
/// Matrices here are graph Laplacians of at most a few dozen nodes.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n,
                                                 double tol = 1e-8,
                                                 int max_sweeps = 64) {
  const auto at = [&](int r, int c) -> double& { return a[r * n + c]; };
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) off += at(r, c) * at(r, c);
    }
    if (std::sqrt(2.0 * off) <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t =
            sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline std::vector<double> laplacian_spectrum(const GraphInstance& g) {
  std::vector<double> lap(static_cast<std::size_t>(g.n) * g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (g.has_edge(i, j)) {
        lap[i * g.n + j] = -1.0;
        lap[j * g.n + i] = -1.0;
        lap[i * g.n + i] += 1.0;
        lap[j * g.n + j] += 1.0;
      }
    }
  }
  return symmetric_eigenvalues(std::move(lap), g.n);
}

inline int triangle_count(const GraphInstance& g) {
  int count = 0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (!g.has_edge(i, j)) continue;
      for (int k = j + 1; k < g.n; ++k) {
        if (g.has_edge(i, k) && g.has_edge(j, k)) ++count;
      }
    }
  }
  return count;
}

inline constexpr int kStatsBins = 20;

/// Normalized summary histograms for MMD evaluation.
struct GraphStats {
  std::vector<double> degree_hist;      // over degrees 0..n-1
  std::vector<double> clustering_hist;  // kStatsBins bins on [0, 1]
  std::vector<double> spectral_hist;    // kStatsBins bins on [0, 2*max degree]
  int triangles = 0;
};

inline void normalize_hist(std::vector<double>& h) {
  const double total = std::accumulate(h.begin(), h.end(), 0.0);
  if (total > 0.0) {
    for (double& v : h) v /= total;
  }
}

inline GraphStats compute_stats(const GraphInstance& g) {
  GraphStats stats;
  stats.degree_hist.assign(g.n, 0.0);
  int max_degree = 0;
  std::vector<int> degrees(g.n);
  for (int i = 0; i < g.n; ++i) {
    degrees[i] = g.degree(i);
    max_degree = std::max(max_degree, degrees[i]);
    stats.degree_hist[degrees[i]] += 1.0;
  }
  normalize_hist(stats.degree_hist);

  stats.clustering_hist.assign(kStatsBins, 0.0);
  for (int i = 0; i < g.n; ++i) {
    double coeff = 0.0;
    if (degrees[i] >= 2) {
      int wedges_closed = 0;
      for (int j = 0; j < g.n; ++j) {
        if (j == i || !g.has_edge(i, j)) continue;
        for (int k = j + 1; k < g.n; ++k) {
          if (k == i || !g.has_edge(i, k)) continue;
          if (g.has_edge(j, k)) ++wedges_closed;
        }
      }
      coeff = static_cast<double>(wedges_closed) /
              (0.5 * degrees[i] * (degrees[i] - 1));
    }
    const int bin = std::min(kStatsBins - 1,
                             static_cast<int>(coeff * kStatsBins));
    stats.clustering_hist[bin] += 1.0;
  }
  normalize_hist(stats.clustering_hist);

  stats.spectral_hist.assign(kStatsBins, 0.0);
  const std::vector<double> eig = laplacian_spectrum(g);
  const double hi = 2.0 * std::max(max_degree, 1);
  for (double ev : eig) {
    // Laplacian eigenvalues of small integer-weighted graphs often land on
    // bin edges; snapping absorbs the eigensolver's residual so binning does
    // not depend on node labeling.
    const double snapped = std::round(ev * 1e6) / 1e6;
    const double clamped = std::clamp(snapped, 0.0, hi);
    const int bin = std::min(kStatsBins - 1,
                             static_cast<int>(clamped / hi * kStatsBins));
    stats.spectral_hist[bin] += 1.0;
  }
  normalize_hist(stats.spectral_hist);

  stats.triangles = triangle_count(g);
  return stats;
}

}  // namespace unside
