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
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "unside/rng.hpp"

namespace unside {

/// Flat parameter storage with named tensor views and a matching gradient
/// buffer. Models register tensors once at construction; training and
/// checkpointing then see a uniform layout.
class ParamStore {
 public:
  struct TensorInfo {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  std::size_t add(std::string name, std::vector<std::size_t> shape) {
    std::size_t size = 1;
    for (std::size_t d : shape) size *= d;
    const std::size_t offset = values_.size();
    tensors_.push_back({std::move(name), std::move(shape), offset, size});
    values_.resize(offset + size, 0.0);
    grads_.resize(offset + size, 0.0);
    return offset;
  }

  std::span<double> values(std::size_t offset, std::size_t size) {
    return {values_.data() + offset, size};
  }
  std::span<const double> values(std::size_t offset, std::size_t size) const {
    return {values_.data() + offset, size};
  }
  std::span<double> grads(std::size_t offset, std::size_t size) {
    return {grads_.data() + offset, size};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& grads() { return grads_; }
  const std::vector<double>& grads() const { return grads_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t size() const { return values_.size(); }

  void zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

  /// Gaussian init, scaled per tensor by 1/sqrt(fan_in); bias tensors
  /// (rank 1) start at zero.
  void init_random(RngStream& rng) {
    for (const auto& info : tensors_) {
      auto v = values(info.offset, info.size);
      if (info.shape.size() < 2) {
        for (double& x : v) x = 0.0;
        continue;
      }
      const double fan_in = static_cast<double>(info.shape.back());
      const double scale = 1.0 / std::sqrt(fan_in);
      for (double& x : v) x = scale * rng.normal();
    }
  }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<TensorInfo> tensors_;
};

/// y += W x for a row-major (rows x cols) matrix view.
inline void matvec_acc(std::span<const double> w, std::size_t rows,
                       std::size_t cols, std::span<const double> x,
                       std::span<double> y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

/// x_grad += W^T y_grad and W_grad += y_grad x^T.
inline void matvec_backward(std::span<const double> w, std::span<double> w_grad,
                            std::size_t rows, std::size_t cols,
                            std::span<const double> x, std::span<double> x_grad,
                            std::span<const double> y_grad) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = y_grad[r];
    if (g == 0.0) continue;
    const double* row = w.data() + r * cols;
    double* grow = w_grad.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      grow[c] += g * x[c];
      if (!x_grad.empty()) x_grad[c] += g * row[c];
    }
  }
}

}  // namespace unside
