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

#include "arrayopt/surrogate.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "arrayopt/error.hpp"
#include "arrayopt/random.hpp"

namespace arrayopt {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::fnn:
      return "fnn";
    case Architecture::set_transformer:
      return "set_transformer";
  }
  fail(ErrorCode::invalid_argument, "unknown architecture id " + std::to_string(static_cast<unsigned>(arch)));
}

Architecture parse_architecture(const std::string& name) {
  if (name == "fnn") return Architecture::fnn;
  if (name == "set_transformer" || name == "set-transformer") return Architecture::set_transformer;
  fail(ErrorCode::invalid_argument, "unknown architecture '" + name + "' (expected fnn or set-transformer)");
}

ScaledTargets scale_targets(std::span<const double> costs) {
  require(costs.size() >= 2, "scale_targets: need at least two cost values");
  double mu = 0.0;
  for (double c : costs) mu += c;
  mu /= static_cast<double>(costs.size());
  double var = 0.0;
  for (double c : costs) var += (c - mu) * (c - mu);
  var /= static_cast<double>(costs.size());
  const double sigma = std::sqrt(var);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::degenerate, "scale_targets: zero variance in costs");
  ScaledTargets out{{}, {mu, sigma}};
  out.values.reserve(costs.size());
  for (double c : costs) out.values.push_back(out.scaler.scale(c));
  return out;
}

TrainConfig TrainConfig::defaults(Architecture arch) {
  TrainConfig c;
  if (arch == Architecture::set_transformer) {
    c.learning_rate = 1e-3;
    c.batch_size = 64;
  }
  return c;
}

void TrainConfig::validate() const {
  require(epochs > 0, "train: epochs must be positive");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "train: learning rate must be positive");
  require(batch_size > 0, "train: batch size must be positive");
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), "pearson: sequences must be non-empty and of equal length");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

namespace {

void dense(std::vector<Parameter>& ps, Rng& rng, const std::string& name, std::size_t in, std::size_t out,
           double gain) {
  const double bound = std::sqrt(gain / static_cast<double>(in));
  Tensor w = Tensor::matrix(in, out);
  for (auto& v : w.values()) v = rng.uniform(-bound, bound);
  ps.emplace_back(name + ".weight", std::move(w));
  ps.emplace_back(name + ".bias", Tensor({out}, 0.0));
}

// Gains: 6 ahead of a ReLU, 3 for linear projections.
void mab(std::vector<Parameter>& ps, Rng& rng, const std::string& name, std::size_t dq, std::size_t dk, bool ln) {
  const std::size_t d = Surrogate::hidden;
  dense(ps, rng, name + ".fc_q", dq, d, 3.0);
  dense(ps, rng, name + ".fc_k", dk, d, 3.0);
  dense(ps, rng, name + ".fc_v", dk, d, 3.0);
  dense(ps, rng, name + ".fc_o", d, d, 6.0);
  if (ln) {
    for (const char* l : {".ln0", ".ln1"}) {
      ps.emplace_back(name + l + ".gamma", Tensor({d}, 1.0));
      ps.emplace_back(name + l + ".beta", Tensor({d}, 0.0));
    }
  }
}

std::vector<Parameter> make_params(Architecture arch, std::uint64_t seed, bool ln) {
  Rng rng(seed);
  std::vector<Parameter> ps;
  if (arch == Architecture::fnn) {
    dense(ps, rng, "fc1", Surrogate::fnn_input, 20, 6.0);
    dense(ps, rng, "fc2", 20, 12, 6.0);
    dense(ps, rng, "fc3", 12, 1, 3.0);
    return ps;
  }
  const std::size_t d = Surrogate::hidden;
  mab(ps, rng, "enc0", 2, 2, ln);
  mab(ps, rng, "enc1", d, d, ln);
  Tensor seedv = Tensor::matrix(1, d);
  const double b = std::sqrt(3.0 / static_cast<double>(d));
  for (auto& v : seedv.values()) v = rng.uniform(-b, b);
  ps.emplace_back("pma.seed", std::move(seedv));
  mab(ps, rng, "pma", d, d, ln);
  mab(ps, rng, "dec0", d, d, ln);
  mab(ps, rng, "dec1", d, d, ln);
  dense(ps, rng, "out", d, 1, 3.0);
  return ps;
}

struct Cursor {
  std::span<const Var> vars;
  std::size_t i = 0;
  Var next() { return vars[i++]; }
};

Var linear(Var x, Cursor& c) {
  Var w = c.next();
  Var b = c.next();
  return ad::add_bias(ad::matmul(x, w), b);
}

Var mab_forward(Var qin, Var kin, Cursor& c, bool ln) {
  const std::size_t d = Surrogate::hidden, dh = d / Surrogate::heads;
  Var q = linear(qin, c);
  Var k = linear(kin, c);
  Var v = linear(kin, c);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Var> parts;
  for (std::size_t h = 0; h < Surrogate::heads; ++h) {
    Var qh = ad::slice_cols(q, h * dh, dh);
    Var kh = ad::slice_cols(k, h * dh, dh);
    Var vh = ad::slice_cols(v, h * dh, dh);
    parts.push_back(ad::add(qh, ad::scaled_dot_attention(qh, kh, vh, s)));
  }
  Var o = ad::concat_cols(parts);
  Var wo = c.next();
  Var bo = c.next();
  Var ln0g, ln0b, ln1g, ln1b;
  if (ln) {
    ln0g = c.next();
    ln0b = c.next();
    ln1g = c.next();
    ln1b = c.next();
    o = ad::layer_norm(o, ln0g, ln0b);
  }
  o = ad::add(o, ad::relu(ad::add_bias(ad::matmul(o, wo), bo)));
  if (ln) o = ad::layer_norm(o, ln1g, ln1b);
  return o;
}

}  // namespace

Surrogate::Surrogate(Architecture arch, std::uint64_t seed, SurrogateOptions options)
    : arch_(arch), layer_norm_(arch == Architecture::set_transformer && options.layer_norm) {
  (void)to_string(arch);
  params_ = make_params(arch, seed, layer_norm_);
}

Surrogate::Surrogate(Architecture arch, std::vector<Parameter> params, TargetScaler scaler) : arch_(arch) {
  (void)to_string(arch);
  if (arch == Architecture::set_transformer)
    for (const Parameter& p : params)
      if (p.name.find(".ln0.") != std::string::npos) layer_norm_ = true;
  const std::vector<Parameter> ref = make_params(arch, 0, layer_norm_);
  if (ref.size() != params.size())
    fail(ErrorCode::mismatch, "weights hold " + std::to_string(params.size()) + " parameters, " + to_string(arch) +
                                  " expects " + std::to_string(ref.size()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i].name != params[i].name || ref[i].value.shape() != params[i].value.shape())
      fail(ErrorCode::mismatch, "weights parameter " + std::to_string(i) + " is " + params[i].name + " " +
                                    params[i].value.shape_string() + ", " + to_string(arch) + " expects " +
                                    ref[i].name + " " + ref[i].value.shape_string());
    params[i].grad = Tensor(params[i].value.shape(), 0.0);
  }
  params_ = std::move(params);
  set_scaler(scaler);
}

void Surrogate::set_scaler(const TargetScaler& s) {
  if (!(s.sigma > 0.0) || !std::isfinite(s.sigma) || !std::isfinite(s.mu))
    fail(ErrorCode::invalid_argument, "scaler needs finite mu and sigma > 0");
  scaler_ = s;
}

void Surrogate::zero_weights() {
  for (Parameter& p : params_) p.value.fill(0.0);
}

std::vector<Var> Surrogate::bind(Tape& tape) const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (const Parameter& p : params_) out.push_back(tape.param(p));
  return out;
}

std::vector<Var> Surrogate::bind_tracked(Tape& tape) {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(tape.param(p, true));
  return out;
}

Var Surrogate::forward(Tape& tape, Var x, std::span<const Var> bound) const {
  if (bound.size() != params_.size()) fail(ErrorCode::invalid_argument, "forward: parameter binding size mismatch");
  (void)tape;
  Cursor c{bound};
  if (arch_ == Architecture::fnn) {
    if (x.value().cols() != fnn_input)
      fail(ErrorCode::shape, "fnn input must have " + std::to_string(fnn_input) + " columns, got " +
                                 x.value().shape_string());
    Var h = ad::relu(linear(x, c));
    h = ad::relu(linear(h, c));
    return linear(h, c);
  }
  if (x.value().cols() != 2 || x.value().rows() == 0)
    fail(ErrorCode::shape, "set transformer input must be N x 2 with N >= 1, got " + x.value().shape_string());
  Var h = mab_forward(x, x, c, layer_norm_);
  h = mab_forward(h, h, c, layer_norm_);
  Var seedv = c.next();
  h = mab_forward(seedv, h, c, layer_norm_);
  h = mab_forward(h, h, c, layer_norm_);
  h = mab_forward(h, h, c, layer_norm_);
  return linear(h, c);
}

Var Surrogate::input_var(Tape& tape, std::span<const Point> slots, bool track) const {
  if (slots.size() > ElementLayout::max_elements)
    fail(ErrorCode::invalid_argument, "surrogate input has " + std::to_string(slots.size()) +
                                          " elements, the limit is " + std::to_string(ElementLayout::max_elements));
  if (slots.empty()) fail(ErrorCode::invalid_argument, "surrogate input is empty");
  Tensor t;
  if (arch_ == Architecture::fnn) {
    t = Tensor::matrix(1, fnn_input);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      t[2 * i] = slots[i].y;
      t[2 * i + 1] = slots[i].z;
    }
  } else {
    t = Tensor::matrix(slots.size(), 2);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      t[2 * i] = slots[i].y;
      t[2 * i + 1] = slots[i].z;
    }
  }
  return track ? tape.input(std::move(t)) : tape.constant(std::move(t));
}

double Surrogate::predict(const ElementLayout& layout) const {
  return predict_slots(canonical_order(layout).elements());
}

double Surrogate::predict_slots(std::span<const Point> slots) const {
  Tape tape;
  const Var x = input_var(tape, slots, false);
  const std::vector<Var> bound = bind(tape);
  return scaler_.unscale(forward(tape, x, bound).value()[0]);
}

double Surrogate::predict_padded(const PaddedInput& input) const {
  if (input.coords.size() != 2 * input.mask.size())
    fail(ErrorCode::shape, "padded input: coords and mask lengths disagree");
  std::vector<Point> real;
  for (std::size_t i = 0; i < input.mask.size(); ++i)
    if (input.mask[i]) real.push_back({input.coords[2 * i], input.coords[2 * i + 1]});
  return predict_slots(real);
}

std::vector<Point> Surrogate::input_grad(const ElementLayout& layout) const {
  return input_grad_slots(canonical_order(layout).elements());
}

std::vector<Point> Surrogate::input_grad_slots(std::span<const Point> slots, double* prediction) const {
  Tape tape;
  const Var x = input_var(tape, slots, true);
  const std::vector<Var> bound = bind(tape);
  const Var out = forward(tape, x, bound);
  tape.backward(out);
  if (prediction) *prediction = scaler_.unscale(out.value()[0]);
  const Tensor& g = x.grad();
  std::vector<Point> grad(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i)
    grad[i] = {scaler_.sigma * g[2 * i], scaler_.sigma * g[2 * i + 1]};
  return grad;
}

TrainResult train(Surrogate& model, std::span<const ElementLayout> train_x, std::span<const double> train_y,
                  std::span<const ElementLayout> val_x, std::span<const double> val_y, const TrainConfig& cfg) {
  cfg.validate();
  require(train_x.size() == train_y.size(), "train: training layouts and targets differ in length");
  require(val_x.size() == val_y.size(), "train: validation layouts and targets differ in length");
  require(!val_x.empty(), "train: validation split is empty");
  const auto t0 = std::chrono::steady_clock::now();

  const ScaledTargets st = scale_targets(train_y);
  model.set_scaler(st.scaler);

  const std::size_t n = train_x.size();
  std::vector<std::vector<Point>> slots(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ElementLayout c = canonical_order(train_x[i]);
    if (c.empty()) fail(ErrorCode::invalid_argument, "train: layout " + std::to_string(i) + " is empty");
    slots[i].assign(c.elements().begin(), c.elements().end());
  }

  std::vector<Parameter*> ptrs;
  for (Parameter& p : model.parameters()) ptrs.push_back(&p);
  Adam adam(ptrs, AdamConfig{cfg.learning_rate});
  adam.zero_grad();

  TrainResult result;
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    arrayopt::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    try {
      for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
        const std::size_t bs = std::min(cfg.batch_size, n - b0);
        adam.zero_grad();
        double batch_loss = 0.0;
        if (model.arch() == Architecture::fnn) {
          Tensor xb = Tensor::matrix(bs, Surrogate::fnn_input);
          Tensor yb = Tensor::matrix(bs, 1);
          for (std::size_t r = 0; r < bs; ++r) {
            const std::size_t idx = order[b0 + r];
            for (std::size_t j = 0; j < slots[idx].size(); ++j) {
              xb.at(r, 2 * j) = slots[idx][j].y;
              xb.at(r, 2 * j + 1) = slots[idx][j].z;
            }
            yb[r] = st.values[idx];
          }
          Tape tape;
          const std::vector<Var> bound = model.bind_tracked(tape);
          const Var out = model.forward(tape, tape.constant(std::move(xb)), bound);
          const Var d = ad::sub(out, tape.constant(std::move(yb)));
          const Var loss = ad::mean(ad::mul(d, d));
          batch_loss = loss.value()[0];
          tape.backward(loss);
        } else {
          // One tape per sample; parameter gradients accumulate across them.
          for (std::size_t r = 0; r < bs; ++r) {
            const std::size_t idx = order[b0 + r];
            Tape tape;
            const std::vector<Var> bound = model.bind_tracked(tape);
            Tensor xs = Tensor::matrix(slots[idx].size(), 2);
            for (std::size_t j = 0; j < slots[idx].size(); ++j) {
              xs[2 * j] = slots[idx][j].y;
              xs[2 * j + 1] = slots[idx][j].z;
            }
            const Var out = model.forward(tape, tape.constant(std::move(xs)), bound);
            const Var d = ad::sub(out, tape.constant(Tensor::matrix(1, 1, st.values[idx])));
            const Var loss = ad::scale(ad::mul(d, d), 1.0 / static_cast<double>(bs));
            batch_loss += loss.value()[0];
            tape.backward(loss);
          }
        }
        if (!std::isfinite(batch_loss))
          fail(ErrorCode::divergence, "training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
        adam.step();
        epoch_loss += batch_loss * static_cast<double>(bs);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::divergence) throw;
      if (std::string(e.what()).find("at epoch") != std::string::npos) throw;
      fail(ErrorCode::divergence, "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  adam.zero_grad();

  std::vector<double> preds;
  preds.reserve(val_x.size());
  double mse = 0.0;
  for (std::size_t i = 0; i < val_x.size(); ++i) {
    const double p = model.predict(val_x[i]);
    preds.push_back(p);
    const double e = st.scaler.scale(p) - st.scaler.scale(val_y[i]);
    mse += e * e;
  }
  result.val_mse = mse / static_cast<double>(val_x.size());
  result.val_pearson = val_x.size() >= 2 ? pearson(preds, val_y) : 0.0;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace arrayopt
