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

#include "arrayopt/arrayopt.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "arrayopt/array_factor.hpp"
#include "arrayopt/dataset.hpp"
#include "arrayopt/error.hpp"
#include "arrayopt/io.hpp"
#include "arrayopt/optimizer.hpp"
#include "arrayopt/parallel.hpp"
#include "arrayopt/surrogate.hpp"

#ifndef ARRAYOPT_VERSION_STRING
#define ARRAYOPT_VERSION_STRING "unknown"
#endif

using namespace arrayopt;

struct ao_layout {
  ElementLayout v;
};
struct ao_dataset {
  Dataset v;
};
struct ao_model {
  Surrogate v;
};
struct ao_run_record {
  RunRecord v;
};
struct ao_run_batch {
  std::vector<ao_run_record> v;
};

namespace {

thread_local std::string g_last_error;

template <class F>
ao_status guard(F&& f) noexcept {
  try {
    f();
    return AO_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ao_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return AO_ERR_INTERNAL;
}

template <class T>
T& need(T* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
  return *p;
}

UVGrid to_grid(const ao_grid_spec& g) { return UVGrid(g.u_extent, g.n_samples, g.ml_radius); }

ao_grid_spec from_grid(const UVGrid& g) { return {g.u_extent(), g.n_samples(), g.main_lobe_radius()}; }

Architecture to_arch(int arch) {
  if (arch != AO_ARCH_FNN && arch != AO_ARCH_SET_TRANSFORMER)
    fail(ErrorCode::invalid_argument, "unknown architecture id " + std::to_string(arch));
  return static_cast<Architecture>(arch);
}

GenerationConfig to_gen(const ao_gen_config& c) {
  GenerationConfig g;
  g.aperture = {c.aperture_y, c.aperture_z};
  g.partition_y = c.partition_y;
  g.partition_z = c.partition_z;
  g.period = {c.period_lo, c.period_hi};
  g.rotation = {c.rotation_lo, c.rotation_hi};
  g.offset_periods = c.offset_periods;
  g.seam_min_distance = c.seam_min_distance;
  g.rng_seed = c.seed;
  return g;
}

TrainConfig to_train(const ao_train_config& c) {
  TrainConfig t;
  t.epochs = c.epochs;
  t.learning_rate = c.learning_rate;
  t.batch_size = c.batch_size;
  t.seed = c.seed;
  return t;
}

RunConfig to_run(const ao_run_config& c) {
  RunConfig r;
  r.max_iterations = c.max_iterations;
  r.learning_rate = c.learning_rate;
  if (c.mode != AO_MODE_HARD && c.mode != AO_MODE_PENALTY)
    fail(ErrorCode::invalid_argument, "unknown constraint mode " + std::to_string(c.mode));
  r.mode = c.mode == AO_MODE_HARD ? ConstraintMode::hard_check : ConstraintMode::penalty;
  r.clamp_to_aperture = c.clamp_to_aperture != 0;
  r.seed = c.seed;
  r.validate();
  return r;
}

PenaltyConfig to_penalty(const ao_run_config& c) {
  PenaltyConfig p;
  p.theta = c.theta;
  p.epsilon = c.epsilon;
  p.barrier_clamp = c.barrier_clamp;
  if (c.pair_cutoff > 0.0)
    p.pair_cutoff = c.pair_cutoff;
  else
    p.pair_cutoff.reset();
  p.validate();
  return p;
}

int to_term(Termination t) {
  switch (t) {
    case Termination::max_iters:
      return AO_TERM_MAX_ITERS;
    case Termination::constraint_revert:
      return AO_TERM_CONSTRAINT_REVERT;
    case Termination::divergence:
      return AO_TERM_DIVERGENCE;
  }
  return AO_TERM_MAX_ITERS;
}

void fill_axis(const AFMap& af, CutAxis axis, const char* csv, ao_axis_metrics& m) {
  const UCut cut = u_cut(af, axis);
  if (csv) write_cut_csv(cut, csv);
  const SllPeaks s = sll_peaks(cut.db);
  m.has_first_sll = s.first_db.has_value();
  m.first_sll_db = s.first_db.value_or(0.0);
  m.has_second_sll = s.second_db.has_value();
  m.second_sll_db = s.second_db.value_or(0.0);
  m.sll_shortfall = s.shortfall;
  try {
    const Beamwidth bw = beamwidth_3db(cut);
    m.has_beamwidth = 1;
    m.beamwidth_u = bw.width_u;
    m.beamwidth_deg = bw.width_deg;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate) throw;
    m.has_beamwidth = 0;
    m.beamwidth_u = m.beamwidth_deg = 0.0;
  }
}

}  // namespace

extern "C" {

const char* ao_version(void) { return ARRAYOPT_VERSION_STRING; }

const char* ao_last_error(void) { return g_last_error.c_str(); }

const char* ao_status_name(ao_status status) {
  switch (status) {
    case AO_OK:
      return "ok";
    case AO_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case AO_ERR_IO:
      return "i/o error";
    case AO_ERR_DEGENERATE:
      return "degenerate input";
    case AO_ERR_DIVERGENCE:
      return "divergence";
    case AO_ERR_MISMATCH:
      return "mismatch";
    case AO_ERR_SHAPE:
      return "shape error";
    case AO_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

ao_status ao_layout_create(double aperture_y, double aperture_z, const double* yz, size_t n, ao_layout** out) {
  return guard([&] {
    need(out, "out");
    if (n > 0) need(yz, "yz");
    std::vector<Point> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {yz[2 * i], yz[2 * i + 1]};
    *out = new ao_layout{ElementLayout({aperture_y, aperture_z}, std::move(pts))};
  });
}

ao_status ao_layout_load(const char* path, ao_layout** out) {
  return guard([&] {
    need(out, "out");
    need(path, "path");
    *out = new ao_layout{read_layout(path)};
  });
}

ao_status ao_layout_save(const ao_layout* layout, const char* path, const char* meta_json) {
  return guard([&] {
    need(path, "path");
    write_layout(need(layout, "layout").v, path, meta_json ? meta_json : "{}");
  });
}

void ao_layout_free(ao_layout* layout) { delete layout; }

size_t ao_layout_size(const ao_layout* layout) { return layout ? layout->v.size() : 0; }

ao_status ao_layout_get(const ao_layout* layout, double* yz, double* aperture) {
  return guard([&] {
    const ElementLayout& l = need(layout, "layout").v;
    if (yz)
      for (size_t i = 0; i < l.size(); ++i) {
        yz[2 * i] = l[i].y;
        yz[2 * i + 1] = l[i].z;
      }
    if (aperture) {
      aperture[0] = l.aperture().width_y;
      aperture[1] = l.aperture().height_z;
    }
  });
}

ao_status ao_layout_min_distance(const ao_layout* layout, double* out) {
  return guard([&] { need(out, "out") = min_pairwise_distance(need(layout, "layout").v); });
}

ao_status ao_grid_default(double aperture_y, double aperture_z, ao_grid_spec* out) {
  return guard([&] {
    require(aperture_y > 0.0 && aperture_z > 0.0, "aperture sides must be positive");
    need(out, "out") = from_grid(UVGrid::for_aperture({aperture_y, aperture_z}));
  });
}

ao_status ao_true_cost(const ao_layout* layout, const ao_grid_spec* grid, int p, double* out) {
  return guard([&] {
    require(p >= 1, "cost exponent p must be >= 1");
    need(out, "out") = true_cost(need(layout, "layout").v, to_grid(need(grid, "grid")), CostParams{p});
  });
}

ao_status ao_evaluate(const ao_layout* layout, const ao_grid_spec* grid, int p, const char* cut_y_csv,
                      const char* cut_z_csv, ao_metrics* out) {
  return guard([&] {
    require(p >= 1, "cost exponent p must be >= 1");
    const ElementLayout& l = need(layout, "layout").v;
    ao_metrics& m = need(out, "out");
    m = ao_metrics{};
    if (l.empty()) fail(ErrorCode::invalid_argument, "evaluate: layout is empty");
    const AFMap af = evaluate_af(l, to_grid(need(grid, "grid")));
    m.n_elements = l.size();
    m.has_min_distance = l.size() >= 2;
    m.min_distance = l.size() >= 2 ? min_pairwise_distance(l) : 0.0;
    fill_axis(af, CutAxis::u_y, cut_y_csv, m.axis[0]);
    fill_axis(af, CutAxis::u_z, cut_z_csv, m.axis[1]);
    m.true_cost = true_cost(af, CostParams{p});
  });
}

ao_status ao_gen_config_default(ao_gen_config* out) {
  return guard([&] {
    const GenerationConfig g;
    need(out, "out") = ao_gen_config{g.aperture.width_y, g.aperture.height_z, g.partition_y, g.partition_z,
                                     g.period.lo,        g.period.hi,         g.rotation.lo,  g.rotation.hi,
                                     g.offset_periods,   g.seam_min_distance, g.rng_seed};
  });
}

ao_status ao_dataset_generate(size_t n, const ao_gen_config* gen, const ao_grid_spec* grid, int p, size_t workers,
                              ao_dataset** out) {
  return guard([&] {
    need(out, "out");
    *out = new ao_dataset{
        generate_dataset(n, to_gen(need(gen, "gen")), to_grid(need(grid, "grid")), CostParams{p}, workers)};
  });
}

ao_status ao_dataset_load(const char* path, ao_dataset** out) {
  return guard([&] {
    need(out, "out");
    need(path, "path");
    *out = new ao_dataset{load_dataset(path)};
  });
}

ao_status ao_dataset_save(const ao_dataset* ds, const char* path) {
  return guard([&] {
    need(path, "path");
    save_dataset(need(ds, "dataset").v, path);
  });
}

void ao_dataset_free(ao_dataset* ds) { delete ds; }

size_t ao_dataset_size(const ao_dataset* ds) { return ds ? ds->v.size() : 0; }

ao_status ao_dataset_cost_stats(const ao_dataset* ds, double* min, double* mean, double* max) {
  return guard([&] {
    const Dataset& d = need(ds, "dataset").v;
    if (d.size() == 0) fail(ErrorCode::invalid_argument, "dataset is empty");
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    for (const auto& e : d.entries) {
      lo = std::min(lo, e.true_cost);
      hi = std::max(hi, e.true_cost);
      sum += e.true_cost;
    }
    if (min) *min = lo;
    if (mean) *mean = sum / static_cast<double>(d.size());
    if (max) *max = hi;
  });
}

const char* ao_dataset_entry_id(const ao_dataset* ds, size_t index) {
  if (!ds || index >= ds->v.size()) return nullptr;
  return ds->v.entries[index].config_id.c_str();
}

ao_status ao_dataset_entry_cost(const ao_dataset* ds, size_t index, double* out) {
  return guard([&] {
    const Dataset& d = need(ds, "dataset").v;
    require(index < d.size(), "dataset index out of range");
    need(out, "out") = d.entries[index].true_cost;
  });
}

ao_status ao_dataset_entry_layout(const ao_dataset* ds, size_t index, ao_layout** out) {
  return guard([&] {
    const Dataset& d = need(ds, "dataset").v;
    require(index < d.size(), "dataset index out of range");
    need(out, "out");
    *out = new ao_layout{d.entries[index].layout};
  });
}

ao_status ao_dataset_grid(const ao_dataset* ds, ao_grid_spec* out) {
  return guard([&] { need(out, "out") = from_grid(need(ds, "dataset").v.grid); });
}

ao_status ao_dataset_ensure_padded_cache(const ao_dataset* ds, const char* dataset_path, const char* cache_path,
                                         int* written) {
  return guard([&] {
    const Dataset& d = need(ds, "dataset").v;
    need(dataset_path, "dataset_path");
    need(cache_path, "cache_path");
    const std::uint64_t digest = file_digest(dataset_path);
    if (written) *written = 0;
    try {
      const PaddedMatrix m = read_padded_cache(cache_path);
      if (m.source_digest == digest && m.rows == d.size()) return;
    } catch (const Error&) {
    }
    write_padded_cache(padded_matrix(d.entries, digest), cache_path);
    if (written) *written = 1;
  });
}

ao_status ao_train_config_default(int arch, ao_train_config* out) {
  return guard([&] {
    const TrainConfig t = TrainConfig::defaults(to_arch(arch));
    need(out, "out") = ao_train_config{t.epochs, t.learning_rate, t.batch_size, t.seed, 0.8, 1};
  });
}

ao_status ao_model_create(int arch, uint64_t seed, int layer_norm, ao_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new ao_model{Surrogate(to_arch(arch), seed, SurrogateOptions{layer_norm != 0})};
  });
}

ao_status ao_model_load(const char* path, ao_model** out) {
  return guard([&] {
    need(out, "out");
    need(path, "path");
    *out = new ao_model{load_model(path)};
  });
}

ao_status ao_model_save(const ao_model* model, const char* path, const ao_train_config* cfg) {
  return guard([&] {
    const Surrogate& m = need(model, "model").v;
    need(path, "path");
    save_model(m, path, cfg ? to_train(*cfg) : TrainConfig::defaults(m.arch()));
  });
}

void ao_model_free(ao_model* model) { delete model; }

int ao_model_arch(const ao_model* model) { return model ? static_cast<int>(model->v.arch()) : 0; }

ao_status ao_model_train(ao_model* model, const ao_dataset* ds, const ao_train_config* cfg, ao_train_result* result,
                         double* loss_history) {
  return guard([&] {
    Surrogate& m = need(model, "model").v;
    const ao_train_config& c = need(cfg, "cfg");
    const auto [tr, va] = split(need(ds, "dataset").v, c.train_fraction, c.split_seed);
    std::vector<ElementLayout> tx, vx;
    std::vector<double> ty, vy;
    for (const auto& e : tr) {
      tx.push_back(e.layout);
      ty.push_back(e.true_cost);
    }
    for (const auto& e : va) {
      vx.push_back(e.layout);
      vy.push_back(e.true_cost);
    }
    const TrainResult r = train(m, tx, ty, vx, vy, to_train(c));
    if (result)
      *result = ao_train_result{tx.size(), vx.size(), r.loss_history.back(), r.val_mse, r.val_pearson, r.seconds};
    if (loss_history) std::copy(r.loss_history.begin(), r.loss_history.end(), loss_history);
  });
}

ao_status ao_model_predict(const ao_model* model, const ao_layout* layout, double* out) {
  return guard([&] { need(out, "out") = need(model, "model").v.predict(need(layout, "layout").v); });
}

ao_status ao_model_input_grad(const ao_model* model, const ao_layout* layout, double* grad) {
  return guard([&] {
    need(grad, "grad");
    const std::vector<Point> g = need(model, "model").v.input_grad(need(layout, "layout").v);
    for (size_t i = 0; i < g.size(); ++i) {
      grad[2 * i] = g[i].y;
      grad[2 * i + 1] = g[i].z;
    }
  });
}

ao_status ao_run_config_default(int arch, ao_run_config* out) {
  return guard([&] {
    const RunConfig r;
    const PenaltyConfig p = PenaltyConfig::defaults(to_arch(arch));
    need(out, "out") = ao_run_config{r.max_iterations, r.learning_rate, AO_MODE_PENALTY, 1,
                                     r.seed,           p.theta,         p.epsilon,       p.barrier_clamp,
                                     p.pair_cutoff.value_or(0.0)};
  });
}

ao_status ao_optimize(const ao_layout* layout, const ao_model* model, const ao_run_config* cfg,
                      const ao_grid_spec* grid, int p, const char* config_id, ao_run_record** out) {
  return guard([&] {
    need(out, "out");
    const ao_run_config& c = need(cfg, "cfg");
    RunRecord rec = optimize(need(layout, "layout").v, need(model, "model").v, to_run(c), to_penalty(c),
                             to_grid(need(grid, "grid")), CostParams{p});
    rec.config_id = config_id ? config_id : "";
    *out = new ao_run_record{std::move(rec)};
  });
}

ao_status ao_optimize_top_k(const ao_dataset* ds, const ao_model* model, const ao_run_config* cfg, size_t k,
                            size_t workers, ao_run_batch** out) {
  return guard([&] {
    need(out, "out");
    const Dataset& d = need(ds, "dataset").v;
    const Surrogate& m = need(model, "model").v;
    const ao_run_config& c = need(cfg, "cfg");
    const RunConfig run = to_run(c);
    const PenaltyConfig pen = to_penalty(c);
    const std::vector<LabeledConfig> top = select_top_k(d, k);
    auto batch = std::make_unique<ao_run_batch>();
    batch->v.resize(top.size());
    parallel_for(top.size(), workers, [&](std::size_t i) {
      batch->v[i].v = optimize(top[i].layout, m, run, pen, d.grid, d.params);
      batch->v[i].v.config_id = top[i].config_id;
    });
    *out = batch.release();
  });
}

size_t ao_run_batch_size(const ao_run_batch* batch) { return batch ? batch->v.size() : 0; }

const ao_run_record* ao_run_batch_get(const ao_run_batch* batch, size_t index) {
  if (!batch || index >= batch->v.size()) return nullptr;
  return &batch->v[index];
}

void ao_run_batch_free(ao_run_batch* batch) { delete batch; }

void ao_run_record_free(ao_run_record* rec) { delete rec; }

ao_status ao_run_record_summary(const ao_run_record* rec, ao_run_summary* out) {
  return guard([&] {
    const RunRecord& r = need(rec, "record").v;
    ao_run_summary& s = need(out, "out");
    s = ao_run_summary{};
    if (r.config_id.size() >= sizeof s.config_id)
      fail(ErrorCode::invalid_argument, "config id longer than " + std::to_string(sizeof s.config_id - 1));
    std::memcpy(s.config_id, r.config_id.c_str(), r.config_id.size() + 1);
    s.termination = to_term(r.termination);
    s.cost_before = r.cost_before;
    s.cost_after = r.cost_after;
    s.pct_change = r.pct_change;
    s.min_dist_before = r.min_dist_before;
    s.min_dist_after = r.min_dist_after;
    s.iterations = r.history.size();
  });
}

ao_status ao_run_record_save(const ao_run_record* rec, const char* path) {
  return guard([&] {
    need(path, "path");
    write_run_record(need(rec, "record").v, path);
  });
}

ao_status ao_run_record_final_layout(const ao_run_record* rec, ao_layout** out) {
  return guard([&] {
    need(out, "out");
    *out = new ao_layout{need(rec, "record").v.final_layout};
  });
}

ao_status ao_percent_change(double cost_before, double cost_after, double* out) {
  return guard([&] { need(out, "out") = percent_change(cost_before, cost_after); });
}

}  // extern "C"
