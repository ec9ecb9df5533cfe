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

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unside/errors.hpp"
#include "unside/params.hpp"

namespace unside {

inline constexpr const char* kCheckpointFormat = "unside-ckpt-v1";

/// Model checkpoints: one JSON header line (format tag, model kind, model
/// hyperparameters, named tensor shapes) followed by the flat parameter
/// vector as little-endian 64-bit floats in tensor order.
struct Checkpoint {
  std::string model;
  nlohmann::json hyper;
  std::vector<ParamStore::TensorInfo> tensors;
  std::vector<double> values;
};

inline void save_checkpoint(const std::string& path, const std::string& model,
                            const nlohmann::json& hyper,
                            const ParamStore& store) {
  nlohmann::json header;
  header["format"] = kCheckpointFormat;
  header["model"] = model;
  header["hyper"] = hyper;
  header["tensors"] = nlohmann::json::array();
  for (const auto& info : store.tensors()) {
    header["tensors"].push_back({{"name", info.name}, {"shape", info.shape}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << header.dump() << '\n';
  const auto& values = store.values();
  for (double v : values) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.write(buf, 8);
  }
  if (!out) throw IoError("short write on checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw IoError("checkpoint missing header: " + path);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint header is not JSON (" + path + "): " + e.what());
  }
  const std::string format = header.value("format", "");
  if (format != kCheckpointFormat) {
    throw IoError("checkpoint format mismatch in " + path + ": expected " +
                  std::string(kCheckpointFormat) + ", found '" + format + "'");
  }
  Checkpoint ckpt;
  ckpt.model = header.value("model", "");
  ckpt.hyper = header.value("hyper", nlohmann::json::object());
  std::size_t total = 0;
  for (const auto& t : header.at("tensors")) {
    ParamStore::TensorInfo info;
    info.name = t.at("name").get<std::string>();
    info.shape = t.at("shape").get<std::vector<std::size_t>>();
    info.size = 1;
    for (std::size_t d : info.shape) info.size *= d;
    info.offset = total;
    total += info.size;
    ckpt.tensors.push_back(std::move(info));
  }
  ckpt.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    char buf[8];
    if (!in.read(buf, 8)) {
      throw IoError("checkpoint truncated: " + path);
    }
    std::memcpy(&ckpt.values[i], buf, 8);
  }
  return ckpt;
}

/// Copies checkpoint values into a freshly constructed model's store,
/// verifying the tensor layout matches.
inline void restore_params(const Checkpoint& ckpt, ParamStore& store) {
  const auto& expect = store.tensors();
  if (expect.size() != ckpt.tensors.size()) {
    throw IoError("checkpoint tensor count mismatch");
  }
  for (std::size_t i = 0; i < expect.size(); ++i) {
    if (expect[i].name != ckpt.tensors[i].name ||
        expect[i].shape != ckpt.tensors[i].shape) {
      throw IoError("checkpoint tensor layout mismatch at '" +
                    ckpt.tensors[i].name + "'");
    }
  }
  if (store.size() != ckpt.values.size()) {
    throw IoError("checkpoint parameter count mismatch");
  }
  store.values() = ckpt.values;
}

}  // namespace unside
