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

#include <filesystem>
#include <fstream>

#include <unside/checkpoint.hpp>
#include <unside/dense_denoiser.hpp>
#include <unside/io.hpp>

#include "support/test_util.hpp"

using namespace unside;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "unside_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("checkpoint round-trip is byte-identical") {
  DenseDenoiser model(3, 3, 8, 21);
  const auto p1 = temp_file("ckpt_a.bin");
  const auto p2 = temp_file("ckpt_b.bin");
  const nlohmann::json hyper = {{"L", 3}, {"K", 3}, {"hidden", 8}};
  save_checkpoint(p1.string(), "dense", hyper, model.store());

  const Checkpoint loaded = load_checkpoint(p1.string());
  REQUIRE(loaded.model == "dense");
  REQUIRE(loaded.hyper.at("hidden").get<int>() == 8);
  DenseDenoiser restored(3, 3, 8, 99);
  restore_params(loaded, restored.store());
  REQUIRE(restored.store().values() == model.store().values());

  save_checkpoint(p2.string(), "dense", hyper, restored.store());
  REQUIRE(slurp(p1) == slurp(p2));
}

TEST_CASE("checkpoint format errors carry the version tag") {
  const auto bad = temp_file("bad.ckpt");
  {
    std::ofstream out(bad);
    out << R"({"format":"unside-ckpt-v999","model":"dense","tensors":[]})" << "\n";
  }
  try {
    load_checkpoint(bad.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("unside-ckpt-v1") != std::string::npos);
    REQUIRE(msg.find("unside-ckpt-v999") != std::string::npos);
  }
  REQUIRE_THROWS_AS(load_checkpoint("/nonexistent/path.ckpt"), IoError);
}

TEST_CASE("checkpoint layout mismatches are rejected") {
  DenseDenoiser model(3, 3, 8, 21);
  const auto p = temp_file("ckpt_layout.bin");
  save_checkpoint(p.string(), "dense", {}, model.store());
  const Checkpoint loaded = load_checkpoint(p.string());
  DenseDenoiser other(3, 3, 16, 21);
  REQUIRE_THROWS_AS(restore_params(loaded, other.store()), IoError);
}

TEST_CASE("graph JSONL round-trip") {
  RngStream rng(5);
  GraphDatasetSpec spec{GraphGenerator::kErdosRenyi, 6, 25, 0.4, 0.0, 0.0, 11};
  auto graphs = generate_dataset(spec);
  graphs[3].node_cats = {1, 0, 2, 1, 0, 2};
  const auto p = temp_file("graphs.jsonl");
  write_graphs_jsonl(p.string(), graphs);
  const auto back = read_graphs_jsonl(p.string());
  REQUIRE(back == graphs);

  SECTION("bad records are reported with the line number") {
    const auto badp = temp_file("bad.jsonl");
    std::ofstream out(badp);
    out << R"({"n": 3, "edges": [[0, 1]]})" << "\n";
    out << "{not json}\n";
    out.close();
    try {
      read_graphs_jsonl(badp.string());
      FAIL("expected IoError");
    } catch (const IoError& e) {
      REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SECTION("self-loops are rejected") {
    const auto badp = temp_file("loop.jsonl");
    std::ofstream out(badp);
    out << R"({"n": 3, "edges": [[1, 1]]})" << "\n";
    out.close();
    REQUIRE_THROWS_AS(read_graphs_jsonl(badp.string()), IoError);
  }
}

TEST_CASE("atom dataset JSON round-trip") {
  const AtomDataset ds = test::toy_dataset();
  const auto p = temp_file("atoms.json");
  write_atom_dataset(p.string(), ds);
  const auto back = read_atom_dataset(p.string());
  REQUIRE(back.num_atoms() == ds.num_atoms());
  REQUIRE(back.num_categories() == ds.num_categories());
  for (std::size_t m = 0; m < ds.num_atoms(); ++m) {
    REQUIRE(back.atom(m) == ds.atom(m));
    REQUIRE(back.weights().prob(static_cast<int>(m)) ==
            Approx(ds.weights().prob(static_cast<int>(m))));
  }
  REQUIRE_THROWS_AS(read_atom_dataset("/nonexistent/atoms.json"), IoError);
}

TEST_CASE("samples JSONL round-trip") {
  const std::vector<std::vector<int>> samples = {{0, 1, 2}, {2, 2, 2}, {1, 0, 1}};
  const auto p = temp_file("samples.jsonl");
  write_samples_jsonl(p.string(), samples);
  REQUIRE(read_samples_jsonl(p.string()) == samples);
}

TEST_CASE("calibration CSV round-trip") {
  const auto rows = calibration_curve(NoiseSchedule(3.0), 3, 9);
  const auto p = temp_file("curve.csv");
  write_calibration_csv(p.string(), rows);
  const auto back = read_calibration_csv(p.string());
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(back[i].t == Approx(rows[i].t).epsilon(1e-10));
    REQUIRE(back[i].voronoi_prob == Approx(rows[i].voronoi_prob).epsilon(1e-10));
  }
}

TEST_CASE("noise demo schema validation rejects malformed documents") {
  nlohmann::json good;
  good["K"] = 3;
  good["count"] = 1;
  good["clouds"] = nlohmann::json::array();
  good["clouds"].push_back(
      {{"path", "dirichlet"},
       {"t", 0.5},
       {"points", nlohmann::json::array(
                      {{{"origin", 0}, {"x", {0.2, 0.3, 0.5}}}})}});
  REQUIRE(validate_noise_demo_json(good).empty());

  nlohmann::json bad = good;
  bad["clouds"][0]["points"][0]["x"] = {0.5, 0.5};
  REQUIRE_FALSE(validate_noise_demo_json(bad).empty());
  bad = good;
  bad.erase("K");
  REQUIRE_FALSE(validate_noise_demo_json(bad).empty());
}
