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

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unside/unside.hpp"

namespace unside::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 2;
inline constexpr int kIoError = 3;
inline constexpr int kNumericError = 4;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

namespace detail {

/// Deduplicate a graph list into weighted atoms under the given layout.
inline AtomDataset graphs_to_atoms(const std::vector<GraphInstance>& graphs,
                                   const GraphStateLayout& layout) {
  std::map<std::vector<int>, double> counts;
  for (const auto& g : graphs) counts[encode_graph(g, layout)] += 1.0;
  std::vector<std::vector<int>> atoms;
  std::vector<double> weights;
  for (auto& [cats, c] : counts) {
    atoms.push_back(cats);
    weights.push_back(c);
  }
  return AtomDataset(std::move(atoms), std::move(weights),
                     layout.num_edge_categories);
}

inline MarginalMixturePrior marginal_prior_from(const AtomDataset& ds,
                                                double kappa) {
  std::vector<double> mass(ds.num_categories(), 0.0);
  for (std::size_t m = 0; m < ds.num_atoms(); ++m) {
    const double w = ds.weights().prob(static_cast<int>(m));
    for (int c : ds.atom(m)) mass[c] += w;
  }
  return MarginalMixturePrior(CategoricalDist::from_probs(std::move(mass)),
                              kappa);
}

/// Run `count` independent sampling chains, optionally across threads.
/// Chain c always uses the stream derived from (seed, c), so results do not
/// depend on the thread count; outputs are collected in chain order.
inline std::vector<std::vector<int>> run_chains(
    const PosteriorModel& model, const SampleRunConfig& config,
    const GuidanceConfig& guidance, const DirichletPath& path, int count,
    int threads, std::vector<std::vector<MultiSimplexState>>* traces = nullptr) {
  std::vector<std::vector<int>> results(count);
  if (traces) traces->assign(count, {});
  const auto worker = [&](int begin, int end) {
    for (int c = begin; c < end; ++c) {
      RngStream rng(derive_seed(config.seed, static_cast<std::uint64_t>(c)));
      results[c] = sample(model, config, guidance, path, rng,
                          traces ? &(*traces)[c] : nullptr);
    }
  };
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    worker(0, count);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

inline std::vector<double> edge_counts(const std::vector<GraphInstance>& graphs) {
  std::vector<double> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(static_cast<double>(g.num_edges()));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// calibrate: Voronoi-probability curves for schedule calibration.

struct CalibrateOptions {
  int K = 3;
  std::vector<double> a_values{3.0};
  int points = 50;
  double kappa = 0.0;
  double eps_t = 1e-3;
};

inline int run_calibrate(const GlobalOptions& global,
                         const CalibrateOptions& opt) {
  const std::filesystem::path dir =
      global.out.empty() ? std::filesystem::path(".")
                         : std::filesystem::path(global.out);
  std::filesystem::create_directories(dir);
  for (double a : opt.a_values) {
    const NoiseSchedule schedule(a, opt.kappa, 1.0 - opt.eps_t);
    const auto rows = calibration_curve(schedule, opt.K, opt.points);
    std::ostringstream name;
    name << "calibration_a" << a << "_K" << opt.K << ".csv";
    write_calibration_csv((dir / name.str()).string(), rows);
    std::cout << "wrote " << (dir / name.str()).string() << " (" << rows.size()
              << " rows)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// noise-demo: forward point clouds under both paths, for external plotting.

struct NoiseDemoOptions {
  int K = 3;
  int count = 500;
  double a = 3.0;
  double kappa = 0.0;
  double eps_t = 1e-3;
};

inline int run_noise_demo(const GlobalOptions& global,
                          const NoiseDemoOptions& opt) {
  if (global.out.empty()) throw std::invalid_argument("noise-demo needs --out");
  RngStream rng(global.seed);
  const NoiseSchedule schedule(opt.a, opt.kappa, 1.0 - opt.eps_t);
  const DirichletPath path(schedule, opt.K);
  const std::vector<double> times = {1.0, 0.75, 0.5, 0.25, 0.0};

  nlohmann::json doc;
  doc["K"] = opt.K;
  doc["count"] = opt.count;
  doc["schedule"] = {{"a", opt.a}, {"kappa", opt.kappa}, {"eps_t", opt.eps_t}};
  doc["clouds"] = nlohmann::json::array();
  for (double t : times) {
    nlohmann::json dir_cloud, interp_cloud;
    dir_cloud["path"] = "dirichlet";
    dir_cloud["t"] = t;
    dir_cloud["points"] = nlohmann::json::array();
    interp_cloud["path"] = "interpolant";
    interp_cloud["t"] = t;
    interp_cloud["points"] = nlohmann::json::array();
    const InterpolantPath interp(t, opt.K);
    for (int i = 0; i < opt.count; ++i) {
      const int origin = i % opt.K;
      const SimplexPoint xd =
          noise_forward(path, origin, std::min(t, schedule.t_max), rng);
      dir_cloud["points"].push_back({{"origin", origin}, {"x", xd.coords()}});
      const SimplexPoint x0 =
          sample_dirichlet(DirichletParams(std::vector<double>(opt.K, 1.0)), rng);
      const SimplexPoint xi = interpolant_forward(interp, origin, x0);
      interp_cloud["points"].push_back({{"origin", origin}, {"x", xi.coords()}});
    }
    doc["clouds"].push_back(std::move(dir_cloud));
    doc["clouds"].push_back(std::move(interp_cloud));
  }
  const std::string complaint = validate_noise_demo_json(doc);
  if (!complaint.empty()) {
    throw NumericError("noise-demo produced an invalid document: " + complaint);
  }
  write_json(global.out, doc);
  std::cout << "wrote " << global.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string dataset;
  std::string model = "dense";
  int steps = 20000;
  double lr = 1e-3;
  int batch = 32;
  double gamma = -1.0;  // negative means: 1.0 for flat data, 0.5 for graphs
  int hidden = 64;
  int rounds = 2;
  int node_categories = 1;
  double a = 3.0;
  double kappa = 0.0;
  double eps_t = 1e-3;
  std::string trace_out;
};

inline int run_train(const GlobalOptions& global, const TrainOptions& opt) {
  if (global.out.empty()) throw std::invalid_argument("train needs --out");
  const NoiseSchedule schedule(opt.a, opt.kappa, 1.0 - opt.eps_t);
  TrainConfig config;
  config.learning_rate = opt.lr;
  config.steps = opt.steps;
  config.batch_size = opt.batch;
  config.seed = global.seed;

  std::vector<double> trace;
  if (opt.model == "dense") {
    const AtomDataset ds = read_atom_dataset(opt.dataset);
    config.gamma = opt.gamma < 0.0 ? 1.0 : opt.gamma;
    const DirichletPath path(schedule, ds.num_categories());
    DenseDenoiser model(static_cast<int>(ds.num_dims()), ds.num_categories(),
                        opt.hidden, derive_seed(global.seed, 0x1));
    trace = train(model,
                  [&](RngStream& rng) { return make_atom_example(ds, path, rng); },
                  config);
    save_checkpoint(global.out, "dense",
                    {{"L", ds.num_dims()},
                     {"K", ds.num_categories()},
                     {"hidden", opt.hidden},
                     {"schedule", {{"a", opt.a}, {"kappa", opt.kappa}, {"eps_t", opt.eps_t}}}},
                    model.store());
  } else if (opt.model == "mpnn") {
    const std::vector<GraphInstance> graphs = read_graphs_jsonl(opt.dataset);
    config.gamma = opt.gamma < 0.0 ? 0.5 : opt.gamma;
    const GraphStateLayout layout{graphs.front().n, opt.node_categories, 2};
    MiniMpnn model(opt.node_categories, 2, opt.hidden, opt.rounds,
                   derive_seed(global.seed, 0x2));
    trace = train(model,
                  [&](RngStream& rng) {
                    return make_graph_example(graphs, layout, schedule, rng);
                  },
                  config);
    save_checkpoint(global.out, "mpnn",
                    {{"K_v", opt.node_categories},
                     {"K_e", 2},
                     {"hidden", opt.hidden},
                     {"rounds", opt.rounds},
                     {"n", layout.n},
                     {"schedule", {{"a", opt.a}, {"kappa", opt.kappa}, {"eps_t", opt.eps_t}}}},
                    model.store());
  } else {
    throw std::invalid_argument("train: unknown model '" + opt.model + "'");
  }
  if (!opt.trace_out.empty()) write_loss_trace_csv(opt.trace_out, trace);
  std::cout << "wrote " << global.out;
  if (!trace.empty()) std::cout << " (final loss " << trace.back() << ")";
  std::cout << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// sample

struct SampleOptions {
  std::string ckpt;
  bool exact_posterior = false;
  std::string dataset;
  std::string uncond_ckpt;
  std::string regressor_ckpt;
  int count = 100;
  int T = 64;
  int correctors = 0;
  std::string decode = "sample";
  std::string prior = "uniform";
  double kappa = 0.0;
  double a = 3.0;
  double eps_t = 1e-3;
  std::string guidance = "none";
  double omega = 1.0;
  double target = 0.0;
  bool trace = false;
};

namespace detail {

struct ResolvedModel {
  std::unique_ptr<PosteriorModel> model;
  std::unique_ptr<AtomDataset> atoms;  // set when backing an exact posterior
  int num_dims = 0;
  int num_categories = 0;
  bool graph_output = false;
  GraphStateLayout layout;
};

inline ResolvedModel resolve_model(const SampleOptions& opt,
                                   const NoiseSchedule& schedule) {
  ResolvedModel r;
  if (opt.exact_posterior) {
    if (opt.dataset.empty()) {
      throw std::invalid_argument("--exact-posterior needs --dataset");
    }
    if (opt.dataset.ends_with(".jsonl")) {
      const auto graphs = read_graphs_jsonl(opt.dataset);
      r.layout = GraphStateLayout{graphs.front().n, 1, 2};
      r.atoms = std::make_unique<AtomDataset>(
          graphs_to_atoms(graphs, r.layout));
      r.graph_output = true;
    } else {
      r.atoms = std::make_unique<AtomDataset>(read_atom_dataset(opt.dataset));
    }
    r.num_dims = static_cast<int>(r.atoms->num_dims());
    r.num_categories = r.atoms->num_categories();
    r.model = std::make_unique<ExactPosterior>(
        *r.atoms, DirichletPath(schedule, r.num_categories));
    return r;
  }
  if (opt.ckpt.empty()) {
    throw std::invalid_argument("sample needs --ckpt or --exact-posterior");
  }
  const Checkpoint ckpt = load_checkpoint(opt.ckpt);
  if (ckpt.model == "dense") {
    const int L = ckpt.hyper.at("L").get<int>();
    const int K = ckpt.hyper.at("K").get<int>();
    auto model = std::make_unique<DenseDenoiser>(
        L, K, ckpt.hyper.at("hidden").get<int>());
    restore_params(ckpt, model->store());
    r.num_dims = L;
    r.num_categories = K;
    r.model = std::move(model);
    return r;
  }
  if (ckpt.model == "mpnn") {
    const int K_v = ckpt.hyper.at("K_v").get<int>();
    if (K_v != 1) {
      throw std::invalid_argument(
          "sample: only unattributed graph models (K_v = 1) can be sampled");
    }
    const int n = ckpt.hyper.at("n").get<int>();
    auto model = std::make_unique<MiniMpnn>(
        K_v, ckpt.hyper.at("K_e").get<int>(),
        ckpt.hyper.at("hidden").get<int>(), ckpt.hyper.at("rounds").get<int>());
    restore_params(ckpt, model->store());
    r.layout = GraphStateLayout{n, K_v, ckpt.hyper.at("K_e").get<int>()};
    r.num_dims = r.layout.total_dims();
    r.num_categories = r.layout.num_edge_categories;
    r.graph_output = true;
    r.model = std::move(model);
    return r;
  }
  throw IoError("unknown model kind in checkpoint: " + ckpt.model);
}

}  // namespace detail

inline int run_sample(const GlobalOptions& global, const SampleOptions& opt) {
  if (global.out.empty()) throw std::invalid_argument("sample needs --out");
  const NoiseSchedule schedule(opt.a, opt.kappa, 1.0 - opt.eps_t);
  detail::ResolvedModel resolved = detail::resolve_model(opt, schedule);
  const DirichletPath path(schedule, resolved.num_categories);

  SampleRunConfig config;
  config.num_steps = opt.T;
  config.correctors_per_step = opt.correctors;
  config.num_dims = resolved.num_dims;
  config.seed = global.seed;
  config.decode = opt.decode == "argmax" ? DecodeMode::kArgmaxPosterior
                                         : DecodeMode::kSamplePosterior;
  if (opt.prior == "marginal") {
    if (!resolved.atoms) {
      throw std::invalid_argument("--prior marginal needs an exact-posterior dataset");
    }
    config.prior = detail::marginal_prior_from(*resolved.atoms, opt.kappa);
  } else {
    config.prior = MarginalMixturePrior::uniform(resolved.num_categories);
  }

  GuidanceConfig guidance;
  std::unique_ptr<PosteriorModel> uncond_keepalive;
  std::unique_ptr<AtomDataset> uncond_atoms;
  std::unique_ptr<PropertyRegressor> regressor;
  if (opt.guidance == "classifier-free") {
    guidance.mode = GuidanceMode::kClassifierFree;
    guidance.omega = opt.omega;
    if (opt.uncond_ckpt.empty()) {
      // Conditional and unconditional models coincide; omega = 1 then
      // reproduces the unguided stream exactly.
      guidance.unconditional = resolved.model.get();
    } else {
      SampleOptions uncond_opt = opt;
      uncond_opt.ckpt = opt.uncond_ckpt;
      uncond_opt.exact_posterior = false;
      auto sub = detail::resolve_model(uncond_opt, schedule);
      uncond_keepalive = std::move(sub.model);
      uncond_atoms = std::move(sub.atoms);
      guidance.unconditional = uncond_keepalive.get();
    }
  } else if (opt.guidance == "classifier") {
    guidance.mode = GuidanceMode::kClassifier;
    guidance.omega = opt.omega;
    guidance.target = opt.target;
    if (opt.regressor_ckpt.empty()) {
      throw std::invalid_argument("--guidance classifier needs --regressor");
    }
    const Checkpoint ckpt = load_checkpoint(opt.regressor_ckpt);
    if (ckpt.model != "property_regressor") {
      throw IoError("not a property-regressor checkpoint: " + opt.regressor_ckpt);
    }
    regressor = std::make_unique<PropertyRegressor>(
        ckpt.hyper.at("L").get<int>(), ckpt.hyper.at("K").get<int>());
    restore_params(ckpt, regressor->store());
    guidance.property_model = regressor.get();
  } else if (opt.guidance != "none") {
    throw std::invalid_argument("sample: unknown guidance mode '" + opt.guidance + "'");
  }

  std::vector<std::vector<MultiSimplexState>> traces;
  const auto results = detail::run_chains(
      *resolved.model, config, guidance, path, opt.count, global.threads,
      opt.trace ? &traces : nullptr);

  std::ofstream out(global.out);
  if (!out) throw IoError("cannot write samples: " + global.out);
  for (int c = 0; c < opt.count; ++c) {
    nlohmann::json rec;
    if (resolved.graph_output) {
      rec = graph_to_json(decode_graph(results[c], resolved.layout));
    } else {
      rec["cats"] = results[c];
    }
    if (opt.trace) {
      auto steps = nlohmann::json::array();
      for (const auto& state : traces[c]) {
        std::vector<int> snapshot(state.size());
        for (std::size_t l = 0; l < state.size(); ++l) {
          snapshot[l] = nearest_vertex(state.dims[l]);
        }
        steps.push_back({{"t", state.t}, {"nearest", snapshot}});
      }
      rec["trace"] = std::move(steps);
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("short write on samples: " + global.out);
  std::cout << "wrote " << global.out << " (" << opt.count << " samples)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval: MMD report between generated and reference graph files.

struct EvalOptions {
  std::vector<std::string> generated;
  std::string reference;
  int perms = 500;
  int runs = 1;
  double bandwidth = 0.0;  // 0 = median heuristic
};

inline int run_eval(const GlobalOptions& global, const EvalOptions& opt) {
  if (global.out.empty()) throw std::invalid_argument("eval needs --out");
  if (opt.generated.empty()) throw std::invalid_argument("eval needs --generated");
  const auto reference = read_graphs_jsonl(opt.reference);

  // One stats pass per graph set.
  const auto stats_of = [](const std::vector<GraphInstance>& graphs) {
    std::vector<GraphStats> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(compute_stats(g));
    return out;
  };
  const auto ref_stats = stats_of(reference);

  // Runs: either one file per run, or one file split into equal chunks.
  std::vector<std::vector<GraphStats>> run_stats;
  if (opt.generated.size() > 1) {
    for (const auto& path : opt.generated) {
      run_stats.push_back(stats_of(read_graphs_jsonl(path)));
    }
  } else {
    const auto all = stats_of(read_graphs_jsonl(opt.generated.front()));
    const int runs = std::max(1, opt.runs);
    const std::size_t chunk = all.size() / runs;
    if (chunk == 0) throw std::invalid_argument("eval: too few graphs for --runs");
    for (int r = 0; r < runs; ++r) {
      run_stats.emplace_back(all.begin() + r * chunk,
                             all.begin() + (r + 1) * chunk);
    }
  }

  struct Metric {
    const char* name;
    std::function<Histogram(const GraphStats&)> pick;
  };
  const std::vector<Metric> metrics = {
      {"degree", [](const GraphStats& s) { return s.degree_hist; }},
      {"clustering", [](const GraphStats& s) { return s.clustering_hist; }},
      {"spectral", [](const GraphStats& s) { return s.spectral_hist; }}};

  nlohmann::json report;
  report["reference"] = opt.reference;
  report["runs"] = run_stats.size();
  report["n_perms"] = opt.perms;
  RngStream rng(global.seed);
  for (const auto& metric : metrics) {
    std::vector<Histogram> ref_h;
    ref_h.reserve(ref_stats.size());
    for (const auto& s : ref_stats) ref_h.push_back(metric.pick(s));
    std::vector<double> mmds, pvals;
    double p95 = 0.0, p99 = 0.0, bandwidth = 0.0;
    for (const auto& run : run_stats) {
      std::vector<Histogram> gen_h;
      gen_h.reserve(run.size());
      for (const auto& s : run) gen_h.push_back(metric.pick(s));
      bandwidth = opt.bandwidth > 0.0 ? opt.bandwidth
                                      : median_heuristic_bandwidth(gen_h, ref_h);
      const auto test =
          mmd_permutation_test(gen_h, ref_h, bandwidth, opt.perms, rng);
      mmds.push_back(std::max(0.0, test.observed));
      pvals.push_back(test.p_value);
      p95 = test.null_p95;
      p99 = test.null_p99;
    }
    double mean = 0.0;
    for (double m : mmds) mean += m;
    mean /= mmds.size();
    double var = 0.0;
    for (double m : mmds) var += (m - mean) * (m - mean);
    const double stddev = mmds.size() > 1 ? std::sqrt(var / (mmds.size() - 1)) : 0.0;
    report["metrics"][metric.name] = {
        {"mmd2_mean", mean},     {"mmd2_std", stddev},
        {"mmd2_runs", mmds},     {"p_values", pvals},
        {"null_p95", p95},       {"null_p99", p99},
        {"bandwidth", bandwidth}};
  }
  write_json(global.out, report);
  std::cout << "wrote " << global.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// guidance-demo: edge-count steering, guided vs unguided MAE.

struct GuidanceDemoOptions {
  std::string dataset;
  double omega = 2.0;
  int count = 300;
  int T = 32;
  int seeds = 3;
  int regressor_steps = 4000;
  double regressor_lr = 5e-3;
  double a = 3.0;
  double eps_t = 1e-3;
};

inline int run_guidance_demo(const GlobalOptions& global,
                             const GuidanceDemoOptions& opt) {
  if (global.out.empty()) throw std::invalid_argument("guidance-demo needs --out");
  const auto graphs = read_graphs_jsonl(opt.dataset);
  const GraphStateLayout layout{graphs.front().n, 1, 2};
  const NoiseSchedule schedule(opt.a, 0.0, 1.0 - opt.eps_t);
  const AtomDataset atoms = detail::graphs_to_atoms(graphs, layout);
  const DirichletPath path(schedule, 2);
  const ExactPosterior posterior(atoms, path);

  // Property regressor for the edge count, trained across noise levels.
  PropertyRegressor regressor(layout.total_dims(), 2);
  TrainConfig rc;
  rc.steps = opt.regressor_steps;
  rc.learning_rate = opt.regressor_lr;
  rc.batch_size = 32;
  rc.seed = derive_seed(global.seed, 0x9);
  train(regressor,
        [&](RngStream& rng) {
          const auto& g = graphs[rng.uniform_below(graphs.size())];
          const double t = rng.uniform01() * schedule.t_max;
          return RegressionExample{noise_graph(g, layout, schedule, t, rng),
                                   static_cast<double>(g.num_edges())};
        },
        rc);

  nlohmann::json report;
  report["omega"] = opt.omega;
  report["count"] = opt.count;
  report["property"] = "edge_count";
  report["per_seed"] = nlohmann::json::array();
  double mean_unguided = 0.0, mean_guided = 0.0;
  for (int s = 0; s < opt.seeds; ++s) {
    const std::uint64_t seed = derive_seed(global.seed, 100 + s);
    RngStream target_rng(derive_seed(seed, 0x7a));
    std::vector<double> targets(opt.count);
    for (double& y : targets) {
      y = static_cast<double>(graphs[target_rng.uniform_below(graphs.size())]
                                  .num_edges());
    }
    SampleRunConfig config;
    config.num_steps = opt.T;
    config.num_dims = layout.total_dims();
    config.prior = MarginalMixturePrior::uniform(2);
    double mae_unguided = 0.0, mae_guided = 0.0;
    for (int c = 0; c < opt.count; ++c) {
      config.seed = derive_seed(seed, static_cast<std::uint64_t>(c));
      RngStream rng_u(config.seed);
      const auto plain =
          sample(posterior, config, GuidanceConfig{}, path, rng_u);
      mae_unguided += std::abs(
          static_cast<double>(decode_graph(plain, layout).num_edges()) -
          targets[c]);

      GuidanceConfig guidance;
      guidance.mode = GuidanceMode::kClassifier;
      guidance.omega = opt.omega;
      guidance.property_model = &regressor;
      guidance.target = targets[c];
      RngStream rng_g(config.seed);
      const auto steered = sample(posterior, config, guidance, path, rng_g);
      mae_guided += std::abs(
          static_cast<double>(decode_graph(steered, layout).num_edges()) -
          targets[c]);
    }
    mae_unguided /= opt.count;
    mae_guided /= opt.count;
    mean_unguided += mae_unguided / opt.seeds;
    mean_guided += mae_guided / opt.seeds;
    report["per_seed"].push_back({{"seed", seed},
                                  {"unguided_mae", mae_unguided},
                                  {"guided_mae", mae_guided}});
  }
  report["unguided_mae"] = mean_unguided;
  report["guided_mae"] = mean_guided;
  write_json(global.out, report);
  std::cout << "unguided MAE " << mean_unguided << ", guided MAE "
            << mean_guided << " -> " << global.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"unside: unrestrained simplex denoising toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value configuration file");

  GlobalOptions global;
  app.add_option("--seed", global.seed, "random seed")->capture_default_str();
  app.add_option("--out", global.out, "output file or directory");
  app.add_option("--threads", global.threads, "worker threads for sampling")
      ->capture_default_str();

  CalibrateOptions cal;
  auto* calibrate = app.add_subcommand(
      "calibrate", "emit Voronoi-probability curves as CSV");
  calibrate->add_option("--K", cal.K, "category count")->capture_default_str();
  calibrate->add_option("--a", cal.a_values, "schedule strengths")
      ->delimiter(',')
      ->capture_default_str();
  calibrate->add_option("--points", cal.points, "grid size")->capture_default_str();
  calibrate->add_option("--kappa", cal.kappa, "schedule offset")->capture_default_str();
  calibrate->add_option("--eps-t", cal.eps_t, "time clamp")->capture_default_str();

  NoiseDemoOptions demo;
  auto* noise_demo = app.add_subcommand(
      "noise-demo", "emit forward-noising point clouds as JSON");
  noise_demo->add_option("--K", demo.K)->capture_default_str();
  noise_demo->add_option("--count", demo.count)->capture_default_str();
  noise_demo->add_option("--a", demo.a)->capture_default_str();
  noise_demo->add_option("--kappa", demo.kappa)->capture_default_str();
  noise_demo->add_option("--eps-t", demo.eps_t)->capture_default_str();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "train a denoiser");
  train_cmd->add_option("--dataset", tr.dataset, "atoms JSON or graphs JSONL")
      ->required();
  train_cmd->add_option("--model", tr.model, "dense|mpnn")->capture_default_str();
  train_cmd->add_option("--steps", tr.steps)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--batch", tr.batch)->capture_default_str();
  train_cmd->add_option("--gamma", tr.gamma, "node/edge loss weight");
  train_cmd->add_option("--hidden", tr.hidden)->capture_default_str();
  train_cmd->add_option("--rounds", tr.rounds)->capture_default_str();
  train_cmd->add_option("--node-categories", tr.node_categories)
      ->capture_default_str();
  train_cmd->add_option("--a", tr.a)->capture_default_str();
  train_cmd->add_option("--kappa", tr.kappa)->capture_default_str();
  train_cmd->add_option("--eps-t", tr.eps_t)->capture_default_str();
  train_cmd->add_option("--trace", tr.trace_out, "loss trace CSV path");

  SampleOptions sa;
  auto* sample_cmd = app.add_subcommand("sample", "run the reverse process");
  sample_cmd->add_option("--ckpt", sa.ckpt, "model checkpoint");
  sample_cmd->add_flag("--exact-posterior", sa.exact_posterior,
                       "use the enumeration posterior over --dataset");
  sample_cmd->add_option("--dataset", sa.dataset);
  sample_cmd->add_option("--uncond-ckpt", sa.uncond_ckpt,
                         "unconditional model for classifier-free guidance");
  sample_cmd->add_option("--regressor", sa.regressor_ckpt,
                         "property regressor checkpoint");
  sample_cmd->add_option("--count", sa.count)->capture_default_str();
  sample_cmd->add_option("--T", sa.T, "function evaluations")->capture_default_str();
  sample_cmd->add_option("--correctors", sa.correctors)->capture_default_str();
  sample_cmd->add_option("--decode", sa.decode, "sample|argmax")->capture_default_str();
  sample_cmd->add_option("--prior", sa.prior, "uniform|marginal")->capture_default_str();
  sample_cmd->add_option("--kappa", sa.kappa)->capture_default_str();
  sample_cmd->add_option("--a", sa.a)->capture_default_str();
  sample_cmd->add_option("--eps-t", sa.eps_t)->capture_default_str();
  sample_cmd->add_option("--guidance", sa.guidance, "none|classifier-free|classifier")
      ->capture_default_str();
  sample_cmd->add_option("--omega", sa.omega)->capture_default_str();
  sample_cmd->add_option("--target", sa.target)->capture_default_str();
  sample_cmd->add_flag("--trace", sa.trace, "record per-step diagnostics");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "MMD report between sample files");
  eval_cmd->add_option("--generated", ev.generated, "sample files (one per run)")
      ->delimiter(',')
      ->required();
  eval_cmd->add_option("--reference", ev.reference)->required();
  eval_cmd->add_option("--perms", ev.perms)->capture_default_str();
  eval_cmd->add_option("--runs", ev.runs)->capture_default_str();
  eval_cmd->add_option("--bandwidth", ev.bandwidth, "0 = median heuristic")
      ->capture_default_str();

  GuidanceDemoOptions gd;
  auto* guidance_cmd = app.add_subcommand(
      "guidance-demo", "edge-count steering report, guided vs unguided");
  guidance_cmd->add_option("--dataset", gd.dataset)->required();
  guidance_cmd->add_option("--omega", gd.omega)->capture_default_str();
  guidance_cmd->add_option("--count", gd.count)->capture_default_str();
  guidance_cmd->add_option("--T", gd.T)->capture_default_str();
  guidance_cmd->add_option("--seeds", gd.seeds)->capture_default_str();
  guidance_cmd->add_option("--regressor-steps", gd.regressor_steps)
      ->capture_default_str();
  guidance_cmd->add_option("--regressor-lr", gd.regressor_lr)->capture_default_str();
  guidance_cmd->add_option("--a", gd.a)->capture_default_str();
  guidance_cmd->add_option("--eps-t", gd.eps_t)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (calibrate->parsed()) return run_calibrate(global, cal);
    if (noise_demo->parsed()) return run_noise_demo(global, demo);
    if (train_cmd->parsed()) return run_train(global, tr);
    if (sample_cmd->parsed()) return run_sample(global, sa);
    if (eval_cmd->parsed()) return run_eval(global, ev);
    if (guidance_cmd->parsed()) return run_guidance_demo(global, gd);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const TrainError& e) {
    std::cerr << "training failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kNumericError;
  }
  return kValidationError;
}

}  // namespace unside::cli
