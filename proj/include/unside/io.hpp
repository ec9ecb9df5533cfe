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

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unside/errors.hpp"
#include "unside/graph.hpp"
#include "unside/posterior.hpp"
#include "unside/voronoi.hpp"

namespace unside {

// ---------------------------------------------------------------------------
// Graph datasets and samples: JSON lines, one graph per line:
//   {"n": 8, "edges": [[0,1], ...], "node_cats": [...]}
// node_cats may be omitted for unattributed graphs.

inline nlohmann::json graph_to_json(const GraphInstance& g) {
  nlohmann::json rec;
  rec["n"] = g.n;
  auto edges = nlohmann::json::array();
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (g.has_edge(i, j)) edges.push_back({i, j});
    }
  }
  rec["edges"] = std::move(edges);
  bool attributed = false;
  for (int c : g.node_cats) attributed |= c != 0;
  if (attributed) rec["node_cats"] = g.node_cats;
  return rec;
}

inline GraphInstance graph_from_json(const nlohmann::json& rec) {
  GraphInstance g(rec.at("n").get<int>());
  for (const auto& e : rec.value("edges", nlohmann::json::array())) {
    const int i = e.at(0).get<int>();
    const int j = e.at(1).get<int>();
    if (i == j || i < 0 || j < 0 || i >= g.n || j >= g.n) {
      throw IoError("graph record has an invalid edge");
    }
    g.set_edge(i, j, 1);
  }
  if (rec.contains("node_cats")) {
    g.node_cats = rec.at("node_cats").get<std::vector<int>>();
    if (static_cast<int>(g.node_cats.size()) != g.n) {
      throw IoError("graph record node_cats length mismatch");
    }
  }
  return g;
}

inline void write_graphs_jsonl(const std::string& path,
                               const std::vector<GraphInstance>& graphs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write graph file: " + path);
  for (const auto& g : graphs) out << graph_to_json(g).dump() << '\n';
  if (!out) throw IoError("short write on graph file: " + path);
}

inline std::vector<GraphInstance> read_graphs_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read graph file: " + path);
  std::vector<GraphInstance> graphs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      graphs.push_back(graph_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad JSON in " + path + " line " + std::to_string(lineno) +
                    ": " + e.what());
    }
  }
  if (graphs.empty()) throw IoError("no graphs in " + path);
  return graphs;
}

// ---------------------------------------------------------------------------
// Flat categorical datasets: a single JSON document
//   {"kind": "atoms", "K": 3, "atoms": [{"cats": [0,1,2], "weight": 0.25}, ...]}

inline void write_atom_dataset(const std::string& path, const AtomDataset& ds) {
  nlohmann::json doc;
  doc["kind"] = "atoms";
  doc["K"] = ds.num_categories();
  auto atoms = nlohmann::json::array();
  for (std::size_t m = 0; m < ds.num_atoms(); ++m) {
    atoms.push_back({{"cats", ds.atom(m)},
                     {"weight", ds.weights().prob(static_cast<int>(m))}});
  }
  doc["atoms"] = std::move(atoms);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset: " + path);
  out << doc.dump(2) << '\n';
}

inline AtomDataset read_atom_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad JSON in " + path + ": " + e.what());
  }
  if (doc.value("kind", "") != "atoms") {
    throw IoError("dataset " + path + " is not an atoms file");
  }
  std::vector<std::vector<int>> atoms;
  std::vector<double> weights;
  for (const auto& a : doc.at("atoms")) {
    atoms.push_back(a.at("cats").get<std::vector<int>>());
    weights.push_back(a.value("weight", 1.0));
  }
  return AtomDataset(std::move(atoms), std::move(weights),
                     doc.at("K").get<int>());
}

// ---------------------------------------------------------------------------
// Flat categorical samples: JSON lines {"cats": [...]}.

inline void write_samples_jsonl(const std::string& path,
                                const std::vector<std::vector<int>>& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write samples: " + path);
  for (const auto& s : samples) {
    out << nlohmann::json{{"cats", s}}.dump() << '\n';
  }
  if (!out) throw IoError("short write on samples: " + path);
}

inline std::vector<std::vector<int>> read_samples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read samples: " + path);
  std::vector<std::vector<int>> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    samples.push_back(
        nlohmann::json::parse(line).at("cats").get<std::vector<int>>());
  }
  return samples;
}

// ---------------------------------------------------------------------------
// CSV curves.

inline void write_calibration_csv(const std::string& path,
                                  const std::vector<CalibrationRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve: " + path);
  out << "t,alpha,voronoi_prob\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.t << ',' << r.alpha << ',' << r.voronoi_prob << '\n';
  }
  if (!out) throw IoError("short write on curve: " + path);
}

inline std::vector<CalibrationRow> read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read curve: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,alpha,voronoi_prob") {
    throw IoError("unexpected CSV header in " + path);
  }
  std::vector<CalibrationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    CalibrationRow r;
    char c1 = 0, c2 = 0;
    if (!(ss >> r.t >> c1 >> r.alpha >> c2 >> r.voronoi_prob) || c1 != ',' ||
        c2 != ',') {
      throw IoError("bad CSV row in " + path + ": " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

inline void write_loss_trace_csv(const std::string& path,
                                 const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write loss trace: " + path);
  out << "step,loss\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << trace[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Generic JSON report.

inline void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("short write on report: " + path);
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad JSON in " + path + ": " + e.what());
  }
  return doc;
}

/// Schema check for noise-demo output; returns a human-readable complaint or
/// the empty string when the document conforms.
inline std::string validate_noise_demo_json(const nlohmann::json& doc) {
  if (!doc.contains("K") || !doc["K"].is_number_integer()) return "missing K";
  if (!doc.contains("count")) return "missing count";
  if (!doc.contains("clouds") || !doc["clouds"].is_array()) return "missing clouds";
  for (const auto& cloud : doc["clouds"]) {
    if (!cloud.contains("path") || !cloud["path"].is_string()) return "cloud missing path";
    if (!cloud.contains("t")) return "cloud missing t";
    if (!cloud.contains("points") || !cloud["points"].is_array()) return "cloud missing points";
    for (const auto& pt : cloud["points"]) {
      if (!pt.contains("origin")) return "point missing origin";
      if (!pt.contains("x") || !pt["x"].is_array()) return "point missing x";
      if (pt["x"].size() != doc["K"].get<std::size_t>()) return "point has wrong arity";
    }
  }
  return "";
}

}  // namespace unside
