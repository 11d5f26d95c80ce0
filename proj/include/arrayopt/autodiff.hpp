// SPDX-License-Identifier: Apache-2.0
//
// arrayopt - sparse phased-array layout optimization with neural surrogates
// Copyright (C) 2026 The arrayopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace arrayopt {

// Dense row-major float64 array. Operations on the tape treat rank-1 tensors
// of length n as 1 x n rows.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept { return shape_.size() >= 2 ? shape_[0] : 1; }
  std::size_t cols() const noexcept { return shape_.empty() ? 0 : shape_.back(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  void fill(double v);
  std::string shape_string() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() {
    grad.fill(0.0);
    stepped_since_zero = false;
  }
  // Set by Adam::step, cleared by zero_grad; backward asserts on it in debug
  // builds to catch gradients leaking from one step into the next.
  bool stepped_since_zero = false;
};

class Tape;

// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
};

// Reverse-mode record. Nodes are appended in evaluation order, which is a
// topological order, so backward() is a single reverse sweep. A tape is
// single-threaded; use one per worker.
class Tape {
 public:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;  // parameter value referenced without copying
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;        // accumulate into this parameter's grad
    std::function<void(Tape&, std::uint32_t)> backward;

    const Tensor& val() const { return external ? *external : value; }
  };

  Var constant(Tensor t);
  // Differentiable leaf; read its gradient with grad() after backward().
  Var input(Tensor t);
  // Parameter leaf. With track = false the parameter is read-only on this tape.
  Var param(Parameter& p, bool track = true);
  Var param(const Parameter& p);

  // Appends an op node. Used by the primitives; requires_grad is derived from inputs.
  Var record(Tensor value, std::initializer_list<Var> inputs, std::function<void(Tape&, std::uint32_t)> backward);

  // Zeroes node gradients, seeds d out / d out = 1 and sweeps. Parameter
  // gradients are accumulated (+=); zero them between steps.
  void backward(Var out);

  const Tensor& value(Var v) const { return nodes_[v.id].val(); }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  Node& node(std::uint32_t id) { return nodes_[id]; }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  Var push(Node n);
  std::vector<Node> nodes_;
};

// Primitives. Shape mismatches throw Error(ErrorCode::shape) naming the op.
namespace ad {

Var matmul(Var a, Var b);     // (m x k)(k x n)
Var matmul_nt(Var a, Var b);  // (m x k)(n x k)^T
Var add_bias(Var x, Var b);   // row-broadcast b (n) onto x (m x n)
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise
Var scale(Var a, double s);
Var relu(Var x);
Var softmax_rows(Var x);
Var log(Var x);
Var reciprocal(Var x);
Var sum(Var x);               // -> scalar
Var mean(Var x);              // -> scalar
Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var scaled_dot_attention(Var q, Var k, Var v, double scale);

}  // namespace ad

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// One Adam update of `params` in place. Throws ErrorCode::divergence naming
// `what` on a non-finite gradient entry.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg,
               const std::string& what = "parameter");

// Adam over a set of Parameters; reads Parameter::grad.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg);
  void step();
  void zero_grad();
  std::uint64_t steps() const noexcept { return states_.empty() ? 0 : states_.front().t; }

 private:
  std::vector<Parameter*> params_;
  std::vector<AdamState> states_;
  AdamConfig cfg_;
};

}  // namespace arrayopt
