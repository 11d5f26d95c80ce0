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

#include "arrayopt/autodiff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "arrayopt/error.hpp"

namespace arrayopt {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  data_.assign(n, fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  if (n != data_.size())
    fail(ErrorCode::shape, "Tensor: shape " + shape_string() + " does not hold " + std::to_string(data_.size()) +
                               " values");
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "x" : "") + std::to_string(shape_[i]);
  return s + "]";
}

const Tensor& Var::value() const { return tape->value(*this); }
const Tensor& Var::grad() const { return tape->grad(*this); }

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor t) {
  Node n;
  n.value = std::move(t);
  return push(std::move(n));
}

Var Tape::input(Tensor t) {
  Node n;
  n.value = std::move(t);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::param(Parameter& p, bool track) {
  Node n;
  n.external = &p.value;
  n.requires_grad = track;
  n.param = track ? &p : nullptr;
  return push(std::move(n));
}

Var Tape::param(const Parameter& p) {
  Node n;
  n.external = &p.value;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs,
                 std::function<void(Tape&, std::uint32_t)> backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& v : inputs) n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::backward(Var out) {
  if (out.tape != this) fail(ErrorCode::invalid_argument, "Tape::backward: variable belongs to another tape");
  if (nodes_[out.id].val().size() != 1)
    fail(ErrorCode::shape, "Tape::backward: output must be a scalar, got " + nodes_[out.id].val().shape_string());
  for (std::uint32_t i = 0; i <= out.id; ++i) {
    Node& n = nodes_[i];
    if (n.requires_grad)
      n.grad = Tensor(n.val().shape(), 0.0);
    else
      n.grad = Tensor();
  }
  if (!nodes_[out.id].requires_grad) return;
  nodes_[out.id].grad[0] = 1.0;
  for (std::uint32_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param) {
      assert(!n.param->stepped_since_zero && "parameter gradient not zeroed since the last optimizer step");
      auto& pg = n.param->grad;
      if (pg.size() != n.grad.size()) pg = Tensor(n.param->value.shape(), 0.0);
      for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += n.grad[j];
    }
  }
}

namespace ad {
namespace {

void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  fail(ErrorCode::shape, std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

void same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.size() != b.size() || a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

Tape& tape_of(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) fail(ErrorCode::invalid_argument, "ad: operands live on different tapes");
  return *a.tape;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.cols() != B.rows()) shape_error("matmul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* c = C.data() + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double x = A.data()[i * k + kk];
      if (x == 0.0) continue;
      const double* brow = B.data() + kk * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += x * brow[j];
    }
  }
  const std::uint32_t ia = a.id, ib = b.id;
  return t.record(std::move(C), {a, b}, [ia, ib, m, k, n](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& na = tp.node(ia);
    auto& nb = tp.node(ib);
    const Tensor& Av = na.val();
    const Tensor& Bv = nb.val();
    if (na.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = G.data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double* brow = Bv.data() + kk * n;
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[j] * brow[j];
          na.grad[i * k + kk] += s;
        }
      }
    }
    if (nb.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = G.data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double x = Av.data()[i * k + kk];
          if (x == 0.0) continue;
          double* db = nb.grad.data() + kk * n;
          for (std::size_t j = 0; j < n; ++j) db[j] += x * g[j];
        }
      }
    }
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.cols() != B.cols()) shape_error("matmul_nt", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.rows();
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = A.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = B.data() + j * k;
      double s = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
      C.data()[i * n + j] = s;
    }
  }
  const std::uint32_t ia = a.id, ib = b.id;
  return t.record(std::move(C), {a, b}, [ia, ib, m, k, n](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& na = tp.node(ia);
    auto& nb = tp.node(ib);
    const Tensor& Av = na.val();
    const Tensor& Bv = nb.val();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double g = G.data()[i * n + j];
        if (g == 0.0) continue;
        if (na.requires_grad) {
          double* da = na.grad.data() + i * k;
          const double* brow = Bv.data() + j * k;
          for (std::size_t kk = 0; kk < k; ++kk) da[kk] += g * brow[kk];
        }
        if (nb.requires_grad) {
          double* db = nb.grad.data() + j * k;
          const double* arow = Av.data() + i * k;
          for (std::size_t kk = 0; kk < k; ++kk) db[kk] += g * arow[kk];
        }
      }
    }
  });
}

Var add_bias(Var x, Var b) {
  Tape& t = tape_of(x, b);
  const Tensor& X = t.value(x);
  const Tensor& B = t.value(b);
  if (B.size() != X.cols()) shape_error("add_bias", X, B);
  const std::size_t m = X.rows(), n = X.cols();
  Tensor Y = X;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) Y.data()[i * n + j] += B[j];
  const std::uint32_t ix = x.id, ib = b.id;
  return t.record(std::move(Y), {x, b}, [ix, ib, m, n](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& nx = tp.node(ix);
    auto& nb = tp.node(ib);
    if (nx.requires_grad)
      for (std::size_t i = 0; i < G.size(); ++i) nx.grad[i] += G[i];
    if (nb.requires_grad)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) nb.grad[j] += G.data()[i * n + j];
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  same_shape("add", t.value(a), t.value(b));
  Tensor Y = t.value(a);
  const Tensor& B = t.value(b);
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] += B[i];
  const std::uint32_t ia = a.id, ib = b.id;
  return t.record(std::move(Y), {a, b}, [ia, ib](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    for (std::uint32_t id : {ia, ib}) {
      auto& n = tp.node(id);
      if (n.requires_grad)
        for (std::size_t i = 0; i < G.size(); ++i) n.grad[i] += G[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  same_shape("sub", t.value(a), t.value(b));
  Tensor Y = t.value(a);
  const Tensor& B = t.value(b);
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] -= B[i];
  const std::uint32_t ia = a.id, ib = b.id;
  return t.record(std::move(Y), {a, b}, [ia, ib](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& na = tp.node(ia);
    auto& nb = tp.node(ib);
    if (na.requires_grad)
      for (std::size_t i = 0; i < G.size(); ++i) na.grad[i] += G[i];
    if (nb.requires_grad)
      for (std::size_t i = 0; i < G.size(); ++i) nb.grad[i] -= G[i];
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  same_shape("mul", t.value(a), t.value(b));
  Tensor Y = t.value(a);
  const Tensor& B = t.value(b);
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] *= B[i];
  const std::uint32_t ia = a.id, ib = b.id;
  return t.record(std::move(Y), {a, b}, [ia, ib](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& na = tp.node(ia);
    auto& nb = tp.node(ib);
    if (na.requires_grad)
      for (std::size_t i = 0; i < G.size(); ++i) na.grad[i] += G[i] * nb.val()[i];
    if (nb.requires_grad)
      for (std::size_t i = 0; i < G.size(); ++i) nb.grad[i] += G[i] * na.val()[i];
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  Tensor Y = t.value(a);
  for (auto& y : Y.values()) y *= s;
  const std::uint32_t ia = a.id;
  return t.record(std::move(Y), {a}, [ia, s](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& na = tp.node(ia);
    for (std::size_t i = 0; i < G.size(); ++i) na.grad[i] += s * G[i];
  });
}

Var relu(Var x) {
  Tape& t = *x.tape;
  Tensor Y = t.value(x);
  for (auto& y : Y.values()) y = y > 0.0 ? y : 0.0;
  const std::uint32_t ix = x.id;
  return t.record(std::move(Y), {x}, [ix](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& nx = tp.node(ix);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (nx.val()[i] > 0.0) nx.grad[i] += G[i];
  });
}

Var softmax_rows(Var x) {
  Tape& t = *x.tape;
  Tensor Y = t.value(x);
  const std::size_t m = Y.rows(), n = Y.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = Y.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (row[j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < n; ++j) row[j] /= z;
  }
  const std::uint32_t ix = x.id;
  return t.record(std::move(Y), {x}, [ix, m, n](Tape& tp, std::uint32_t self) {
    const auto& out = tp.node(self);
    auto& nx = tp.node(ix);
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = out.value.data() + i * n;
      const double* g = out.grad.data() + i * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < n; ++j) nx.grad[i * n + j] += y[j] * (g[j] - dot);
    }
  });
}

Var log(Var x) {
  Tape& t = *x.tape;
  Tensor Y = t.value(x);
  for (auto& y : Y.values()) {
    if (!(y > 0.0)) fail(ErrorCode::invalid_argument, "ad::log: non-positive input");
    y = std::log(y);
  }
  const std::uint32_t ix = x.id;
  return t.record(std::move(Y), {x}, [ix](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& nx = tp.node(ix);
    for (std::size_t i = 0; i < G.size(); ++i) nx.grad[i] += G[i] / nx.val()[i];
  });
}

Var reciprocal(Var x) {
  Tape& t = *x.tape;
  Tensor Y = t.value(x);
  for (auto& y : Y.values()) {
    if (y == 0.0) fail(ErrorCode::invalid_argument, "ad::reciprocal: zero input");
    y = 1.0 / y;
  }
  const std::uint32_t ix = x.id;
  return t.record(std::move(Y), {x}, [ix](Tape& tp, std::uint32_t self) {
    const auto& out = tp.node(self);
    auto& nx = tp.node(ix);
    for (std::size_t i = 0; i < out.grad.size(); ++i) nx.grad[i] -= out.grad[i] * out.value[i] * out.value[i];
  });
}

Var sum(Var x) {
  Tape& t = *x.tape;
  const Tensor& X = t.value(x);
  double s = 0.0;
  for (double v : X.values()) s += v;
  const std::uint32_t ix = x.id;
  return t.record(Tensor::scalar(s), {x}, [ix](Tape& tp, std::uint32_t self) {
    const double g = tp.node(self).grad[0];
    auto& nx = tp.node(ix);
    for (auto& d : nx.grad.values()) d += g;
  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) fail(ErrorCode::shape, "mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  Tape& t = *x.tape;
  const Tensor& X = t.value(x);
  const std::size_t m = X.rows(), n = X.cols();
  if (begin + count > n || count == 0)
    fail(ErrorCode::shape, "slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                               ") out of range for " + X.shape_string());
  Tensor Y = Tensor::matrix(m, count);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(X.data() + i * n + begin, count, Y.data() + i * count);
  const std::uint32_t ix = x.id;
  return t.record(std::move(Y), {x}, [ix, m, n, begin, count](Tape& tp, std::uint32_t self) {
    const Tensor& G = tp.node(self).grad;
    auto& nx = tp.node(ix);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) nx.grad[i * n + begin + j] += G[i * count + j];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::shape, "concat_cols: no inputs");
  Tape& t = *parts[0].tape;
  const std::size_t m = t.value(parts[0]).rows();
  std::size_t n = 0;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    if (p.tape != &t) fail(ErrorCode::invalid_argument, "concat_cols: operands live on different tapes");
    const Tensor& P = t.value(p);
    if (P.rows() != m) shape_error("concat_cols", t.value(parts[0]), P);
    ids.push_back(p.id);
    widths.push_back(P.cols());
    n += P.cols();
  }
  Tensor Y = Tensor::matrix(m, n);
  std::size_t off = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& P = t.value(parts[p]);
    for (std::size_t i = 0; i < m; ++i) std::copy_n(P.data() + i * widths[p], widths[p], Y.data() + i * n + off);
    off += widths[p];
  }
  // record() only takes an initializer list; wire requires_grad by hand.
  bool needs = false;
  for (auto id : ids) needs = needs || t.node(id).requires_grad;
  Var out = t.record(std::move(Y), {}, {});
  auto& node = t.node(out.id);
  node.requires_grad = needs;
  if (needs) {
    node.backward = [ids, widths, m, n](Tape& tp, std::uint32_t self) {
      const Tensor& G = tp.node(self).grad;
      std::size_t off = 0;
      for (std::size_t p = 0; p < ids.size(); ++p) {
        auto& np = tp.node(ids[p]);
        if (np.requires_grad)
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < widths[p]; ++j) np.grad[i * widths[p] + j] += G[i * n + off + j];
        off += widths[p];
      }
    };
  }
  return out;
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  Tape& t = *x.tape;
  const Tensor& X = t.value(x);
  const std::size_t m = X.rows(), n = X.cols();
  if (t.value(gamma).size() != n) shape_error("layer_norm", X, t.value(gamma));
  if (t.value(beta).size() != n) shape_error("layer_norm", X, t.value(beta));
  Tensor xhat = Tensor::matrix(m, n);
  std::vector<double> inv_std(m);
  Tensor Y = Tensor::matrix(m, n);
  const Tensor& Gm = t.value(gamma);
  const Tensor& Bt = t.value(beta);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = X.data() + i * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (row[j] - mu) * inv_std[i];
      xhat.data()[i * n + j] = h;
      Y.data()[i * n + j] = h * Gm[j] + Bt[j];
    }
  }
  const std::uint32_t ix = x.id, ig = gamma.id, ib = beta.id;
  Var out = t.record(std::move(Y), {x, gamma, beta}, {});
  auto& node = t.node(out.id);
  if (node.requires_grad) {
    node.backward = [ix, ig, ib, m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp,
                                                                                             std::uint32_t self) {
      const Tensor& G = tp.node(self).grad;
      auto& nx = tp.node(ix);
      auto& ng = tp.node(ig);
      auto& nb = tp.node(ib);
      const Tensor& gam = ng.val();
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = G.data() + i * n;
        const double* h = xhat.data() + i * n;
        double mean_d = 0.0, mean_dh = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double d = g[j] * gam[j];
          mean_d += d;
          mean_dh += d * h[j];
          if (ng.requires_grad) ng.grad[j] += g[j] * h[j];
          if (nb.requires_grad) nb.grad[j] += g[j];
        }
        mean_d /= static_cast<double>(n);
        mean_dh /= static_cast<double>(n);
        if (nx.requires_grad)
          for (std::size_t j = 0; j < n; ++j)
            nx.grad[i * n + j] += inv_std[i] * (g[j] * gam[j] - mean_d - h[j] * mean_dh);
      }
    };
  }
  return out;
}

Var scaled_dot_attention(Var q, Var k, Var v, double s) {
  return matmul(softmax_rows(scale(matmul_nt(q, k), s)), v);
}

}  // namespace ad

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg,
               const std::string& what) {
  if (params.size() != grads.size())
    fail(ErrorCode::shape, "adam_step: " + what + " has " + std::to_string(params.size()) + " values but " +
                               std::to_string(grads.size()) + " gradients");
  require(cfg.learning_rate > 0.0, "adam_step: learning rate must be positive");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      fail(ErrorCode::divergence, "adam_step: non-finite gradient in " + what + " at index " + std::to_string(i));
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / bc1, vhat = state.v[i] / bc2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), states_(params_.size()), cfg_(cfg) {}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.grad.size() != p.value.size()) p.grad = Tensor(p.value.shape(), 0.0);
    adam_step(p.value.values(), p.grad.values(), states_[i], cfg_, p.name);
    p.stepped_since_zero = true;
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

}  // namespace arrayopt
