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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arrayopt/autodiff.hpp"
#include "arrayopt/geometry.hpp"

namespace arrayopt {

enum class Architecture : std::uint32_t { fnn = 1, set_transformer = 2 };

std::string to_string(Architecture arch);
// Accepts "fnn", "set_transformer" and "set-transformer".
Architecture parse_architecture(const std::string& name);

struct TargetScaler {
  double mu = 0.0;
  double sigma = 1.0;

  double scale(double y) const noexcept { return (y - mu) / sigma; }
  double unscale(double s) const noexcept { return s * sigma + mu; }
};

struct ScaledTargets {
  std::vector<double> values;
  TargetScaler scaler;
};

// Standardizes with the population standard deviation. Throws on fewer than
// two values or zero variance.
ScaledTargets scale_targets(std::span<const double> costs);
inline double unscale(double scaled, const TargetScaler& scaler) { return scaler.unscale(scaled); }

struct TrainConfig {
  int epochs = 1000;
  double learning_rate = 1e-5;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;

  static TrainConfig defaults(Architecture arch);
  void validate() const;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean scaled-target MSE per epoch
  double val_mse = 0.0;              // scaled units
  double val_pearson = 0.0;
  double seconds = 0.0;
};

struct SurrogateOptions {
  bool layer_norm = false;  // Set Transformer only
};

// A cost surrogate: network weights plus the target scaler. Predictions are
// in cost units. A trained model is read-only during prediction and can be
// shared between threads.
//
// The FNN reads a 2048-vector of interleaved (y, z) slots with zeros past the
// last real element. It is sensitive to what sits in the padded slots, which
// is why they are pinned at zero. The Set Transformer reads the real elements
// only and is permutation invariant.
class Surrogate {
 public:
  static constexpr std::size_t fnn_input = 2 * ElementLayout::max_elements;
  static constexpr std::size_t hidden = 32;
  static constexpr std::size_t heads = 2;

  // Seeded fan-in uniform initialization.
  Surrogate(Architecture arch, std::uint64_t seed, SurrogateOptions options = {});
  // Adopts loaded weights; throws ErrorCode::mismatch when names or shapes
  // do not fit the architecture.
  Surrogate(Architecture arch, std::vector<Parameter> params, TargetScaler scaler);

  Architecture arch() const noexcept { return arch_; }
  bool layer_norm() const noexcept { return layer_norm_; }
  const TargetScaler& scaler() const noexcept { return scaler_; }
  void set_scaler(const TargetScaler& s);
  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  void zero_weights();

  // Canonicalizes the layout first.
  double predict(const ElementLayout& layout) const;
  // Uses the given slot order as is.
  double predict_slots(std::span<const Point> slots) const;
  // Honors the mask; padded coordinates are ignored by the Set Transformer
  // and forced to zero for the FNN.
  double predict_padded(const PaddedInput& input) const;

  // d prediction / d (y, z) per element, in the layout's canonical order.
  std::vector<Point> input_grad(const ElementLayout& layout) const;
  // Same for a fixed slot order; optionally returns the prediction too.
  std::vector<Point> input_grad_slots(std::span<const Point> slots, double* prediction = nullptr) const;

  // Scaled network output on an existing tape. x is N x 2 for the Set
  // Transformer and B x 2048 for the FNN; the result is B x 1 (B = 1 for the
  // Set Transformer). `bound` holds one tape variable per parameter.
  Var forward(Tape& tape, Var x, std::span<const Var> bound) const;
  std::vector<Var> bind(Tape& tape) const;       // frozen
  std::vector<Var> bind_tracked(Tape& tape);     // gradients flow into parameters

  std::uint32_t arch_id() const noexcept { return static_cast<std::uint32_t>(arch_); }

 private:
  Var input_var(Tape& tape, std::span<const Point> slots, bool track) const;

  Architecture arch_;
  bool layer_norm_ = false;
  std::vector<Parameter> params_;
  TargetScaler scaler_;
};

// Fits the scaler on train_y, sets it on the model, and runs mini-batch Adam
// on the scaled MSE. Deterministic for a fixed seed. Throws
// ErrorCode::divergence naming the epoch on a non-finite loss or gradient.
TrainResult train(Surrogate& model, std::span<const ElementLayout> train_x, std::span<const double> train_y,
                  std::span<const ElementLayout> val_x, std::span<const double> val_y, const TrainConfig& cfg);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace arrayopt
