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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include <unside/dense_denoiser.hpp>
#include <unside/graph.hpp>
#include <unside/mpnn.hpp>
#include <unside/training.hpp>

#include "support/test_util.hpp"

using namespace unside;
using Catch::Approx;

TEST_CASE("zero training steps leave the model unchanged") {
  DenseDenoiser model(3, 3, 8, 5);
  const std::vector<double> before = model.store().values();
  TrainConfig config;
  config.steps = 0;
  const AtomDataset ds = test::toy_dataset();
  const DirichletPath path = test::toy_path();
  const auto trace = train(
      model, [&](RngStream& rng) { return make_atom_example(ds, path, rng); },
      config);
  REQUIRE(trace.empty());
  REQUIRE(model.store().values() == before);
}

TEST_CASE("training reduces the loss and stays finite") {
  DenseDenoiser model(3, 3, 32, 7);
  const AtomDataset ds = test::toy_dataset();
  const DirichletPath path = test::toy_path();
  TrainConfig config;
  config.steps = 1500;
  config.batch_size = 16;
  config.seed = 11;
  const auto trace = train(
      model, [&](RngStream& rng) { return make_atom_example(ds, path, rng); },
      config);
  REQUIRE(trace.size() == 1500);
  for (double v : trace) REQUIRE(std::isfinite(v));
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 100; ++i) head += trace[i];
  for (int i = 0; i < 100; ++i) tail += trace[trace.size() - 100 + i];
  REQUIRE(tail < head);
}

TEST_CASE("training is deterministic given the seed") {
  const AtomDataset ds = test::toy_dataset();
  const DirichletPath path = test::toy_path();
  TrainConfig config;
  config.steps = 200;
  config.seed = 31;
  DenseDenoiser a(3, 3, 16, 9), b(3, 3, 16, 9);
  const auto ta = train(
      a, [&](RngStream& rng) { return make_atom_example(ds, path, rng); },
      config);
  const auto tb = train(
      b, [&](RngStream& rng) { return make_atom_example(ds, path, rng); },
      config);
  REQUIRE(ta == tb);
  REQUIRE(a.store().values() == b.store().values());
}

TEST_CASE("divergent training reports the failing step") {
  DenseDenoiser model(3, 3, 16, 13);
  // Poison one weight; the first loss evaluation is then non-finite and the
  // loop must stop with the step index in the message.
  model.store().values()[7] = std::numeric_limits<double>::quiet_NaN();
  const AtomDataset ds = test::toy_dataset();
  const DirichletPath path = test::toy_path();
  TrainConfig config;
  config.steps = 10;
  try {
    train(model,
          [&](RngStream& rng) { return make_atom_example(ds, path, rng); },
          config);
    FAIL("expected TrainError");
  } catch (const TrainError& e) {
    REQUIRE(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("graph training drives the mpnn toward the data") {
  const GraphDatasetSpec spec{GraphGenerator::kErdosRenyi, 5, 12, 0.4, 0.0,
                              0.0, 77};
  const auto graphs = generate_dataset(spec);
  const GraphStateLayout layout{5, 1, 2};
  const NoiseSchedule schedule(3.0);
  MiniMpnn model(1, 2, 16, 2, 15);
  TrainConfig config;
  config.gamma = 0.5;
  config.steps = 800;
  config.batch_size = 8;
  config.seed = 3;
  const auto trace = train(
      model,
      [&](RngStream& rng) {
        return make_graph_example(graphs, layout, schedule, rng);
      },
      config);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 50; ++i) head += trace[i];
  for (int i = 0; i < 50; ++i) tail += trace[trace.size() - 50 + i];
  REQUIRE(tail < head);
  // At high t the posterior must favor the clean edge category.
  RngStream rng(5);
  const auto& g = graphs.front();
  const auto state = noise_graph(g, layout, schedule, 0.99, rng);
  const auto pi = model.evaluate(state);
  int correct = 0;
  for (int p = 0; p < layout.edge_dims(); ++p) {
    if (pi[p].argmax() == g.edge_cats[p]) ++correct;
  }
  REQUIRE(correct >= layout.edge_dims() * 2 / 3);
}

TEST_CASE("trainable config validation") {
  TrainConfig config;
  config.gamma = 1.5;
  REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
  config.gamma = 0.5;
  config.learning_rate = 0.0;
  REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
}
