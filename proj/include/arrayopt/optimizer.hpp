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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arrayopt/array_factor.hpp"
#include "arrayopt/geometry.hpp"
#include "arrayopt/surrogate.hpp"

namespace arrayopt {

struct PenaltyConfig {
  double theta = 0.5;
  double epsilon = 12.5;
  double barrier_clamp = 1e-6;
  std::optional<double> pair_cutoff = 1.5;  // nullopt sums over every pair

  static PenaltyConfig defaults(Architecture arch);  // epsilon 12.5 (fnn) / 1.0 (set transformer)
  void validate() const;
};

enum class ConstraintMode { hard_check, penalty };
enum class Termination { max_iters, constraint_revert, divergence };

std::string to_string(ConstraintMode mode);
std::string to_string(Termination t);
ConstraintMode parse_constraint_mode(const std::string& s);  // "hard" / "hard_check" / "penalty"

struct RunConfig {
  int max_iterations = 1000;
  double learning_rate = 1e-3;
  ConstraintMode mode = ConstraintMode::penalty;
  bool clamp_to_aperture = true;
  std::uint64_t seed = 1;  // recorded; the descent itself draws no random numbers

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double loss = 0.0;      // surrogate prediction (+ penalty) at the point the gradient was taken
  double penalty = 0.0;
  double min_dist = 0.0;  // of the layout kept after this iteration
};

struct RunRecord {
  std::string config_id;
  Termination termination = Termination::max_iters;
  ElementLayout initial;
  ElementLayout final_layout;  // same slot order as `initial`
  double cost_before = 0.0;    // exact cost, never the surrogate
  double cost_after = 0.0;
  double pct_change = 0.0;
  double min_dist_before = 0.0;
  double min_dist_after = 0.0;
  std::vector<IterationRecord> history;
};

// eps * sum over pairs i < j with D <= cutoff of -log(max(D - theta, clamp)).
double penalty(std::span<const Point> points, const PenaltyConfig& cfg);
// Exact gradient of the clamped sum; pairs in the clamped region contribute nothing.
std::vector<Point> penalty_grad(std::span<const Point> points, const PenaltyConfig& cfg);

// The layout is canonicalized and its slot order then stays fixed.
RunRecord optimize_hard_check(const ElementLayout& layout, const Surrogate& model, const RunConfig& run,
                              double theta, const UVGrid& grid, const CostParams& params = {});

// Steps that would land at or inside theta are halved (up to 30 times) and
// dropped when still infeasible, so the iterate never leaves the barrier's
// interior. With epsilon = 0 and no such step this follows the hard-check
// trajectory exactly.
RunRecord optimize_with_penalty(const ElementLayout& layout, const Surrogate& model, const RunConfig& run,
                                const PenaltyConfig& pen, const UVGrid& grid, const CostParams& params = {});

// Dispatches on run.mode; hard-check mode uses pen.theta.
RunRecord optimize(const ElementLayout& layout, const Surrogate& model, const RunConfig& run,
                   const PenaltyConfig& pen, const UVGrid& grid, const CostParams& params = {});

// 100 * (after - before) / |before|.
double percent_change(double cost_before, double cost_after);

}  // namespace arrayopt
