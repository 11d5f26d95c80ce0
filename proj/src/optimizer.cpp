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

#include "arrayopt/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "arrayopt/autodiff.hpp"
#include "arrayopt/error.hpp"

namespace arrayopt {

PenaltyConfig PenaltyConfig::defaults(Architecture arch) {
  PenaltyConfig c;
  c.epsilon = arch == Architecture::fnn ? 12.5 : 1.0;
  return c;
}

void PenaltyConfig::validate() const {
  require(theta > 0.0 && std::isfinite(theta), "penalty: theta must be positive");
  require(epsilon >= 0.0 && std::isfinite(epsilon), "penalty: epsilon must be non-negative");
  require(barrier_clamp > 0.0, "penalty: barrier clamp must be positive");
  if (pair_cutoff) require(*pair_cutoff > theta, "penalty: pair cutoff must exceed theta");
}

std::string to_string(ConstraintMode mode) { return mode == ConstraintMode::hard_check ? "hard_check" : "penalty"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iters:
      return "max_iters";
    case Termination::constraint_revert:
      return "constraint_revert";
    case Termination::divergence:
      return "divergence";
  }
  return "unknown";
}

ConstraintMode parse_constraint_mode(const std::string& s) {
  if (s == "hard" || s == "hard_check" || s == "hard-check") return ConstraintMode::hard_check;
  if (s == "penalty") return ConstraintMode::penalty;
  fail(ErrorCode::invalid_argument, "unknown constraint mode '" + s + "' (expected hard or penalty)");
}

void RunConfig::validate() const {
  require(max_iterations > 0, "optimize: max iterations must be positive");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "optimize: learning rate must be positive");
}

double penalty(std::span<const Point> points, const PenaltyConfig& cfg) {
  cfg.validate();
  const double cutoff = cfg.pair_cutoff.value_or(INFINITY);
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = std::hypot(points[i].y - points[j].y, points[i].z - points[j].z);
      if (d > cutoff) continue;
      sum -= std::log(std::max(d - cfg.theta, cfg.barrier_clamp));
    }
  return cfg.epsilon * sum;
}

std::vector<Point> penalty_grad(std::span<const Point> points, const PenaltyConfig& cfg) {
  cfg.validate();
  const double cutoff = cfg.pair_cutoff.value_or(INFINITY);
  std::vector<Point> g(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dy = points[i].y - points[j].y, dz = points[i].z - points[j].z;
      const double d = std::hypot(dy, dz);
      if (d > cutoff || !(d - cfg.theta > cfg.barrier_clamp)) continue;
      const double c = -cfg.epsilon / ((d - cfg.theta) * d);
      g[i].y += c * dy;
      g[i].z += c * dz;
      g[j].y -= c * dy;
      g[j].z -= c * dz;
    }
  return g;
}

double percent_change(double cost_before, double cost_after) {
  require(cost_before != 0.0, "percent_change: cost before is zero");
  return 100.0 * (cost_after - cost_before) / std::abs(cost_before);
}

namespace {

std::vector<double> flatten(std::span<const Point> p) {
  std::vector<double> v(2 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[2 * i] = p[i].y;
    v[2 * i + 1] = p[i].z;
  }
  return v;
}

void unflatten(std::span<const double> v, std::vector<Point>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = {v[2 * i], v[2 * i + 1]};
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void clamp_into(std::vector<Point>& p, const Aperture& a) {
  for (Point& q : p) {
    q.y = std::clamp(q.y, -0.5 * a.width_y, 0.5 * a.width_y);
    q.z = std::clamp(q.z, -0.5 * a.height_z, 0.5 * a.height_z);
  }
}

RunRecord finish(RunRecord rec, const std::vector<Point>& slots, const UVGrid& grid, const CostParams& params) {
  rec.final_layout = ElementLayout(rec.initial.aperture(), slots);
  rec.min_dist_after = min_pairwise_distance(rec.final_layout);
  rec.cost_before = true_cost(rec.initial, grid, params);
  rec.cost_after = true_cost(rec.final_layout, grid, params);
  rec.pct_change = percent_change(rec.cost_before, rec.cost_after);
  return rec;
}

struct Start {
  RunRecord rec;
  std::vector<Point> slots;
};

Start start(const ElementLayout& layout, const RunConfig& run) {
  run.validate();
  Start s;
  s.rec.initial = canonical_order(layout);
  if (s.rec.initial.size() < 2) fail(ErrorCode::invalid_argument, "optimize: layout needs at least two elements");
  s.slots.assign(s.rec.initial.elements().begin(), s.rec.initial.elements().end());
  s.rec.min_dist_before = min_pairwise_distance(s.rec.initial);
  return s;
}

}  // namespace

RunRecord optimize_hard_check(const ElementLayout& layout, const Surrogate& model, const RunConfig& run,
                              double theta, const UVGrid& grid, const CostParams& params) {
  require(theta > 0.0, "optimize: theta must be positive");
  Start s = start(layout, run);
  if (s.rec.min_dist_before < theta)
    fail(ErrorCode::invalid_argument, "optimize: initial layout violates the minimum distance (" +
                                          std::to_string(s.rec.min_dist_before) + " < " + std::to_string(theta) + ")");
  const Aperture aperture = s.rec.initial.aperture();
  AdamState state;
  const AdamConfig adam{run.learning_rate};
  double md = s.rec.min_dist_before;
  for (int it = 1; it <= run.max_iterations; ++it) {
    double pred = 0.0;
    const std::vector<Point> g = model.input_grad_slots(s.slots, &pred);
    std::vector<double> x = flatten(s.slots);
    const std::vector<double> gf = flatten(g);
    if (!std::isfinite(pred) || !all_finite(gf)) {
      s.rec.termination = Termination::divergence;
      break;
    }
    adam_step(x, gf, state, adam, "coordinates");
    std::vector<Point> cand(s.slots.size());
    unflatten(x, cand);
    if (run.clamp_to_aperture) clamp_into(cand, aperture);
    const double cmd = min_pairwise_distance(cand);
    if (cmd < theta) {
      s.rec.history.push_back({it, pred, 0.0, md});
      s.rec.termination = Termination::constraint_revert;
      break;
    }
    s.slots = std::move(cand);
    md = cmd;
    s.rec.history.push_back({it, pred, 0.0, md});
  }
  return finish(std::move(s.rec), s.slots, grid, params);
}

RunRecord optimize_with_penalty(const ElementLayout& layout, const Surrogate& model, const RunConfig& run,
                                const PenaltyConfig& pen, const UVGrid& grid, const CostParams& params) {
  pen.validate();
  Start s = start(layout, run);
  if (!(s.rec.min_dist_before > pen.theta))
    fail(ErrorCode::invalid_argument, "optimize: penalty mode needs an initial minimum distance above theta (" +
                                          std::to_string(s.rec.min_dist_before) +
                                          " <= " + std::to_string(pen.theta) + ")");
  const Aperture aperture = s.rec.initial.aperture();
  AdamState state;
  const AdamConfig adam{run.learning_rate};
  std::vector<Point> best = s.slots;
  double best_loss = INFINITY;
  for (int it = 1; it <= run.max_iterations; ++it) {
    double pred = 0.0;
    const std::vector<Point> g = model.input_grad_slots(s.slots, &pred);
    const double p = pen.epsilon == 0.0 ? 0.0 : penalty(s.slots, pen);
    const double loss = pred + p;
    std::vector<double> gf = flatten(g);
    if (pen.epsilon != 0.0) {
      const std::vector<double> pg = flatten(penalty_grad(s.slots, pen));
      for (std::size_t i = 0; i < gf.size(); ++i) gf[i] += pg[i];
    }
    if (!std::isfinite(loss) || !all_finite(gf)) {
      s.rec.termination = Termination::divergence;
      s.slots = best;
      break;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = s.slots;
    }
    const std::vector<double> x0 = flatten(s.slots);
    std::vector<double> x = x0;
    adam_step(x, gf, state, adam, "coordinates");
    std::vector<Point> cand(s.slots.size());
    unflatten(x, cand);
    if (run.clamp_to_aperture) clamp_into(cand, aperture);
    double cmd = min_pairwise_distance(cand);
    if (!(cmd > pen.theta)) {
      const std::vector<double> full = flatten(cand);
      double alpha = 1.0;
      for (int k = 0; k < 30 && !(cmd > pen.theta); ++k) {
        alpha *= 0.5;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + alpha * (full[i] - x0[i]);
        unflatten(x, cand);
        cmd = min_pairwise_distance(cand);
      }
      if (!(cmd > pen.theta)) {
        cand = s.slots;
        cmd = min_pairwise_distance(cand);
      }
    }
    s.slots = std::move(cand);
    s.rec.history.push_back({it, loss, p, cmd});
  }
  return finish(std::move(s.rec), s.slots, grid, params);
}

RunRecord optimize(const ElementLayout& layout, const Surrogate& model, const RunConfig& run,
                   const PenaltyConfig& pen, const UVGrid& grid, const CostParams& params) {
  if (run.mode == ConstraintMode::hard_check) return optimize_hard_check(layout, model, run, pen.theta, grid, params);
  return optimize_with_penalty(layout, model, run, pen, grid, params);
}

}  // namespace arrayopt
