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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "arrayopt/autodiff.hpp"
#include "arrayopt/error.hpp"
#include "arrayopt/random.hpp"
#include "test_util.hpp"

using namespace arrayopt;
using arrayopt::testing::grad_err;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

using Fn = std::function<Var(Tape&, std::vector<Var>&)>;

// Compares tape gradients of a scalar function of several inputs against
// central differences.
void check_grad(const Fn& f, std::vector<Tensor> inputs, double tol = 1e-5, double h = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.input(t));
  tape.backward(f(tape, vars));
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const Tensor analytic = tape.grad(vars[a]);
    double scale = 0.0;
    for (double g : analytic.values()) scale = std::max(scale, std::abs(g));
    for (std::size_t i = 0; i < inputs[a].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> moved = inputs;
        moved[a][i] += delta;
        Tape t2;
        std::vector<Var> v2;
        for (const auto& t : moved) v2.push_back(t2.constant(t));
        return t2.value(f(t2, v2))[0];
      };
      const double fd = (eval(h) - eval(-h)) / (2.0 * h);
      EXPECT_LE(grad_err(analytic[i], fd, std::max(1e-6, 1e-3 * scale)), tol)
          << "input " << a << " index " << i << ": " << analytic[i] << " vs " << fd;
    }
  }
}

}  // namespace

TEST(Tensor, ShapeMustMatchValues) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), Error);
  const Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
}

TEST(Primitives, ReluExample) {
  Tape t;
  const Var y = ad::relu(t.constant(Tensor({1, 3}, {-1.0, 0.0, 2.0})));
  EXPECT_EQ(t.value(y), Tensor({1, 3}, {0.0, 0.0, 2.0}));
}

TEST(Primitives, SoftmaxOfZeros) {
  Tape t;
  const Var y = ad::softmax_rows(t.constant(Tensor::matrix(1, 2)));
  EXPECT_DOUBLE_EQ(t.value(y)[0], 0.5);
  EXPECT_DOUBLE_EQ(t.value(y)[1], 0.5);
}

TEST(Primitives, SoftmaxStableForLargeInputs) {
  Tape t;
  const Var y = ad::softmax_rows(t.constant(Tensor({1, 3}, {1000.0, 1000.0, -1000.0})));
  EXPECT_DOUBLE_EQ(t.value(y)[0], 0.5);
  EXPECT_DOUBLE_EQ(t.value(y)[2], 0.0);
}

TEST(Primitives, MatmulMatchesTripleLoop) {
  Rng rng(1);
  const Tensor a = random_tensor(rng, {2, 3}), b = random_tensor(rng, {3, 2});
  Tape t;
  const Tensor& c = t.value(ad::matmul(t.constant(a), t.constant(b)));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), s, 1e-15);
    }
}

TEST(Primitives, MatmulNtEqualsMatmulWithTranspose) {
  Rng rng(2);
  const Tensor a = random_tensor(rng, {3, 4}), b = random_tensor(rng, {5, 4});
  Tensor bt({4, 5});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) bt.at(j, i) = b.at(i, j);
  Tape t;
  const Tensor& x = t.value(ad::matmul_nt(t.constant(a), t.constant(b)));
  const Tensor& y = t.value(ad::matmul(t.constant(a), t.constant(bt)));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-15);
}

TEST(Primitives, ShapeErrorsNameThePrimitive) {
  Tape t;
  const Var a = t.constant(Tensor::matrix(2, 3)), b = t.constant(Tensor::matrix(2, 3));
  try {
    ad::matmul(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape);
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ad::add(a, t.constant(Tensor::matrix(3, 2))), Error);
  EXPECT_THROW(ad::add_bias(a, t.constant(Tensor({2}))), Error);
  EXPECT_THROW(ad::slice_cols(a, 2, 2), Error);
}

TEST(Primitives, LogAndReciprocalDomain) {
  Tape t;
  EXPECT_THROW(ad::log(t.constant(Tensor({1, 2}, {1.0, 0.0}))), Error);
  EXPECT_THROW(ad::reciprocal(t.constant(Tensor({1, 2}, {1.0, 0.0}))), Error);
}

TEST(Backward, ReluSumExample) {
  Tape t;
  const Var x = t.input(Tensor({1, 2}, {-1.0, 2.0}));
  t.backward(ad::sum(ad::relu(x)));
  EXPECT_EQ(t.grad(x)[0], 0.0);
  EXPECT_EQ(t.grad(x)[1], 1.0);
}

TEST(Backward, FanOutAccumulates) {
  Tape t;
  const Var x = t.input(Tensor({1, 3}, {1.0, -2.0, 3.0}));
  t.backward(ad::sum(ad::add(x, x)));
  for (double g : t.grad(x).values()) EXPECT_EQ(g, 2.0);
}

TEST(Backward, RequiresScalarOutput) {
  Tape t;
  const Var x = t.input(Tensor::matrix(2, 2, 1.0));
  try {
    t.backward(ad::relu(x));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape);
  }
}

TEST(Backward, ReplayIsIdempotent) {
  Rng rng(3);
  Tape t;
  Parameter w("w", random_tensor(rng, {4, 3}));
  const Var x = t.constant(random_tensor(rng, {5, 4}));
  const Var y = ad::sum(ad::softmax_rows(ad::matmul(x, t.param(w))));
  const Var out = ad::mul(y, y);
  t.backward(out);
  const Tensor g1 = w.grad;
  const Tensor n1 = t.grad(y);
  w.zero_grad();
  t.backward(out);
  EXPECT_EQ(w.grad, g1);
  EXPECT_EQ(t.grad(y), n1);
}

TEST(Backward, ParameterGradientsAccumulateUntilZeroed) {
  Tape t;
  Parameter w("w", Tensor({1, 2}, {1.0, 2.0}));
  const Var out = ad::sum(t.param(w));
  t.backward(out);
  t.backward(out);
  EXPECT_EQ(w.grad[0], 2.0);
  w.zero_grad();
  EXPECT_EQ(w.grad[0], 0.0);
}

TEST(Backward, FrozenParameterIsNotTracked) {
  Tape t;
  const Parameter w("w", Tensor({1, 2}, {1.0, 2.0}));
  const Var x = t.input(Tensor({1, 2}, {3.0, 4.0}));
  const Var pw = t.param(w);
  EXPECT_FALSE(t.requires_grad(pw));
  t.backward(ad::sum(ad::mul(x, pw)));
  EXPECT_EQ(t.grad(x)[0], 1.0);
  EXPECT_EQ(t.grad(x)[1], 2.0);
  EXPECT_EQ(w.grad[0], 0.0);
}

TEST(GradCheck, EveryPrimitive) {
  Rng rng(4);
  const auto r = [&](std::size_t m, std::size_t n) { return random_tensor(rng, {m, n}); };
  const auto pos = [&](std::size_t m, std::size_t n) { return random_tensor(rng, {m, n}, 0.5, 2.0); };
  // Weighted sums so that every output entry carries a different cotangent.
  const Tensor w35 = r(3, 5), w34 = r(3, 4), w33 = r(3, 3);
  const auto wsum = [](Tape& t, Var y, const Tensor& w) { return ad::sum(ad::mul(y, t.constant(w))); };

  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::matmul(v[0], v[1]), w35); }, {r(3, 4), r(4, 5)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::matmul_nt(v[0], v[1]), w35); }, {r(3, 4), r(5, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::add_bias(v[0], v[1]), w34); },
             {r(3, 4), random_tensor(rng, {4})});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::add(v[0], v[1]), w34); }, {r(3, 4), r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::sub(v[0], v[1]), w34); }, {r(3, 4), r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::mul(v[0], v[1]), w34); }, {r(3, 4), r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::scale(v[0], -2.5), w34); }, {r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::relu(v[0]), w34); }, {r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::softmax_rows(v[0]), w34); }, {r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::log(v[0]), w34); }, {pos(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::reciprocal(v[0]), w34); }, {pos(3, 4)});
  check_grad([&](Tape&, auto& v) { return ad::mean(ad::mul(v[0], v[0])); }, {r(3, 4)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::slice_cols(v[0], 1, 3), w33); }, {r(3, 5)});
  check_grad(
      [&](Tape& t, auto& v) {
        const Var parts[] = {v[0], v[1]};
        return wsum(t, ad::concat_cols(parts), w35);
      },
      {r(3, 2), r(3, 3)});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::layer_norm(v[0], v[1], v[2]), w34); },
             {r(3, 4), random_tensor(rng, {4}), random_tensor(rng, {4})});
  check_grad([&](Tape& t, auto& v) { return wsum(t, ad::scaled_dot_attention(v[0], v[1], v[2], 0.7), w34); },
             {r(3, 4), r(5, 4), r(5, 4)});
}

TEST(GradCheck, ThreeLayerDenseNetParameters) {
  Rng rng(5);
  std::vector<Parameter> ps;
  ps.emplace_back("w1", random_tensor(rng, {6, 8}));
  ps.emplace_back("b1", random_tensor(rng, {8}));
  ps.emplace_back("w2", random_tensor(rng, {8, 5}));
  ps.emplace_back("b2", random_tensor(rng, {5}));
  ps.emplace_back("w3", random_tensor(rng, {5, 1}));
  ps.emplace_back("b3", random_tensor(rng, {1}));
  const Tensor x = random_tensor(rng, {4, 6});
  const auto net = [&](Tape& t) {
    Var h = ad::relu(ad::add_bias(ad::matmul(t.constant(x), t.param(ps[0])), t.param(ps[1])));
    h = ad::relu(ad::add_bias(ad::matmul(h, t.param(ps[2])), t.param(ps[3])));
    const Var y = ad::add_bias(ad::matmul(h, t.param(ps[4])), t.param(ps[5]));
    return ad::mean(ad::mul(y, y));
  };
  Tape tape;
  tape.backward(net(tape));
  const double h = 1e-6;
  for (auto& p : ps) {
    double scale = 0.0;
    for (double g : p.grad.values()) scale = std::max(scale, std::abs(g));
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double keep = p.value[i];
      p.value[i] = keep + h;
      Tape a;
      const double fp = a.value(net(a))[0];
      p.value[i] = keep - h;
      Tape b;
      const double fm = b.value(net(b))[0];
      p.value[i] = keep;
      EXPECT_LE(grad_err(p.grad[i], (fp - fm) / (2 * h), std::max(1e-6, 1e-3 * scale)), 1e-5) << p.name << i;
    }
  }
}

TEST(Determinism, RepeatedForwardBackwardBitIdentical) {
  const auto run = [] {
    Rng rng(6);
    Parameter w("w", random_tensor(rng, {4, 4}));
    Tape t;
    const Var x = t.constant(random_tensor(rng, {6, 4}));
    const Var y = ad::scaled_dot_attention(ad::matmul(x, t.param(w)), x, x, 0.5);
    t.backward(ad::sum(ad::mul(y, y)));
    return std::make_pair(t.value(y), w.grad);
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, FirstStepOracle) {
  std::vector<double> p(4, 0.0);
  const std::vector<double> g(4, 1.0);
  AdamState s;
  adam_step(p, g, s, {0.1});
  for (double v : p) EXPECT_NEAR(v, -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(s.t, 1u);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g(2, 0.0);
  AdamState s;
  for (int i = 0; i < 5; ++i) adam_step(p, g, s, {0.1});
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -2.0);
}

TEST(Adam, ConstantGradientDescendsMonotonically) {
  std::vector<double> p = {0.0};
  const std::vector<double> g = {0.3};
  AdamState s;
  double prev = p[0];
  for (int i = 0; i < 100; ++i) {
    adam_step(p, g, s, {0.01});
    EXPECT_LT(p[0], prev);
    prev = p[0];
  }
  for (double v : s.v) EXPECT_GE(v, 0.0);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  std::vector<double> p = {0.0, 0.0};
  const std::vector<double> g = {0.0, std::numeric_limits<double>::quiet_NaN()};
  AdamState s;
  try {
    adam_step(p, g, s, {0.1}, "fc2.weight");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::divergence);
    EXPECT_NE(std::string(e.what()).find("fc2.weight"), std::string::npos);
  }
}

TEST(Adam, RejectsBadConfig) {
  std::vector<double> p = {0.0};
  const std::vector<double> g = {1.0};
  AdamState s;
  EXPECT_THROW(adam_step(p, g, s, {0.0}), Error);
  const std::vector<double> g2 = {1.0, 1.0};
  EXPECT_THROW(adam_step(p, g2, s, {0.1}), Error);
}

TEST(Adam, MinimizesQuadraticThroughTape) {
  Parameter w("w", Tensor({1, 3}, {3.0, -2.0, 0.5}));
  Adam opt({&w}, {0.05});
  for (int i = 0; i < 500; ++i) {
    opt.zero_grad();
    Tape t;
    const Var v = t.param(w);
    t.backward(ad::sum(ad::mul(v, v)));
    opt.step();
  }
  for (double v : w.value.values()) EXPECT_NEAR(v, 0.0, 1e-2);
  EXPECT_EQ(opt.steps(), 500u);
}
