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

// arrayopt command-line front end. Talks to the library through the C API only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arrayopt/arrayopt.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Library failure carrying the exit code it maps to.
struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(ao_status s) {
  return s == AO_ERR_INVALID_ARGUMENT || s == AO_ERR_MISMATCH ? 2 : 1;
}

void check(ao_status s, const std::string& context) {
  if (s != AO_OK) throw Failure{exit_code_for(s), context + ": " + ao_last_error()};
}

void usage(const std::string& message) { throw Failure{2, message}; }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using LayoutPtr = std::unique_ptr<ao_layout, Deleter<ao_layout, ao_layout_free>>;
using DatasetPtr = std::unique_ptr<ao_dataset, Deleter<ao_dataset, ao_dataset_free>>;
using ModelPtr = std::unique_ptr<ao_model, Deleter<ao_model, ao_model_free>>;
using BatchPtr = std::unique_ptr<ao_run_batch, Deleter<ao_run_batch, ao_run_batch_free>>;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Failure{1, "cannot open " + path + " for writing"};
  f << text;
  if (!f) throw Failure{1, "write failed: " + path};
}

struct Common {
  std::size_t workers = 1;
  bool deterministic = false;
};

struct GridFlags {
  double u_extent = 4.0 * kPi;
  int samples = 257;
  double ml_factor = 1.5;
  int p = 4;

  void add(CLI::App* app) {
    app->add_option("--u-extent", u_extent, "Half-width of the sampled u-space square (default 4*pi)")
        ->check(CLI::PositiveNumber);
    app->add_option("--grid-samples", samples, "Samples per u axis, odd (default 257)")
        ->check(CLI::Range(3, 100001));
    app->add_option("--ml-factor", ml_factor,
                    "Main-lobe radius as a multiple of 2*pi / smaller aperture side (default 1.5)")
        ->check(CLI::PositiveNumber);
    app->add_option("--p", p, "Cost exponent")->check(CLI::Range(1, 64));
  }

  ao_grid_spec spec(double wy, double wz) const {
    if (samples % 2 == 0) usage("--grid-samples must be odd");
    return {u_extent, samples, ml_factor * 2.0 * kPi / std::min(wy, wz)};
  }
};

// ---- gen-data ----

struct GenData {
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<double> aperture{16.0, 16.0};
  std::vector<int> partition{2, 2};
  std::vector<double> period{0.5, 1.0};
  std::vector<double> rotation{0.0, kPi / 2};
  double offset_periods = 1.0;
  double seam = 0.5;
  GridFlags grid;
};

int run_gen_data(const GenData& o, const Common& c) {
  if (o.n == 0) usage("--n must be at least 1");
  ao_gen_config g;
  check(ao_gen_config_default(&g), "gen-data");
  g.aperture_y = o.aperture[0];
  g.aperture_z = o.aperture[1];
  g.partition_y = o.partition[0];
  g.partition_z = o.partition[1];
  g.period_lo = o.period[0];
  g.period_hi = o.period[1];
  g.rotation_lo = o.rotation[0];
  g.rotation_hi = o.rotation[1];
  g.offset_periods = o.offset_periods;
  g.seam_min_distance = o.seam;
  g.seed = o.seed;
  const ao_grid_spec grid = o.grid.spec(g.aperture_y, g.aperture_z);
  ao_dataset* raw = nullptr;
  check(ao_dataset_generate(o.n, &g, &grid, o.grid.p, c.workers, &raw), "gen-data");
  DatasetPtr ds(raw);
  check(ao_dataset_save(ds.get(), o.out.c_str()), "gen-data");
  double lo, mean, hi;
  check(ao_dataset_cost_stats(ds.get(), &lo, &mean, &hi), "gen-data");
  std::cout << "wrote " << ao_dataset_size(ds.get()) << " configs to " << o.out << "\n"
            << "cost min " << fmt("%.6g", lo) << "  mean " << fmt("%.6g", mean) << "  max " << fmt("%.6g", hi)
            << "\n";
  return 0;
}

// ---- train ----

struct Train {
  std::string arch;
  std::string data;
  std::string out_model;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 1;
  bool layer_norm = false;
  bool no_cache = false;
  std::string metrics_out;
  std::string loss_csv;
};

int run_train(const Train& o, const Common&) {
  const int arch = o.arch == "fnn" ? AO_ARCH_FNN
                   : (o.arch == "set-transformer" || o.arch == "set_transformer") ? AO_ARCH_SET_TRANSFORMER
                                                                                  : 0;
  if (arch == 0) usage("--arch must be fnn or set-transformer");
  if (!(o.train_fraction > 0.0 && o.train_fraction < 1.0)) usage("--train-fraction must lie in (0, 1)");
  ao_train_config cfg;
  check(ao_train_config_default(arch, &cfg), "train");
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.batch) cfg.batch_size = *o.batch;
  cfg.seed = o.seed;
  cfg.train_fraction = o.train_fraction;
  cfg.split_seed = o.split_seed;
  if (cfg.epochs <= 0 || !(cfg.learning_rate > 0.0) || cfg.batch_size == 0)
    usage("--epochs, --lr and --batch-size must be positive");

  ao_dataset* raw = nullptr;
  check(ao_dataset_load(o.data.c_str(), &raw), "train");
  DatasetPtr ds(raw);
  if (arch == AO_ARCH_FNN && !o.no_cache) {
    int written = 0;
    check(ao_dataset_ensure_padded_cache(ds.get(), o.data.c_str(), (o.data + ".pad1").c_str(), &written), "train");
    if (written) std::cout << "wrote padded input cache " << o.data << ".pad1\n";
  }

  ao_model* mraw = nullptr;
  check(ao_model_create(arch, cfg.seed, o.layer_norm ? 1 : 0, &mraw), "train");
  ModelPtr model(mraw);
  ao_train_result res;
  std::vector<double> history(static_cast<std::size_t>(cfg.epochs));
  check(ao_model_train(model.get(), ds.get(), &cfg, &res, history.data()), "train");
  check(ao_model_save(model.get(), o.out_model.c_str(), &cfg), "train");

  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) csv += std::to_string(e) + "," + fmt("%.17g", history[e]) + "\n";
  write_text(o.loss_csv.empty() ? o.out_model + ".loss.csv" : o.loss_csv, csv);

  const json metrics = {{"arch", arch == AO_ARCH_FNN ? "fnn" : "set_transformer"},
                        {"n_train", res.n_train},
                        {"n_val", res.n_val},
                        {"epochs", cfg.epochs},
                        {"final_train_loss", res.final_loss},
                        {"val_mse", res.val_mse},
                        {"val_pearson", res.val_pearson}};
  write_text(o.metrics_out.empty() ? o.out_model + ".metrics.json" : o.metrics_out, metrics.dump(2) + "\n");
  std::cout << "trained " << o.arch << " on " << res.n_train << " configs (" << res.n_val << " held out) in "
            << fmt("%.1f", res.seconds) << " s\n"
            << "final train loss " << fmt("%.6g", res.final_loss) << "  val mse " << fmt("%.6g", res.val_mse)
            << "  val pearson r " << fmt("%.4f", res.val_pearson) << "\n";
  return 0;
}

// ---- optimize ----

struct Optimize {
  std::string model;
  std::string data;
  std::size_t top_k = 10;
  std::string mode = "penalty";
  std::optional<double> epsilon;
  double theta = 0.5;
  int iterations = 1000;
  double lr = 1e-3;
  double pair_cutoff = 1.5;
  double barrier_clamp = 1e-6;
  bool no_clamp = false;
  std::uint64_t seed = 1;
  std::string out_dir;
};

const char* term_name(int t) {
  switch (t) {
    case AO_TERM_CONSTRAINT_REVERT:
      return "constraint_revert";
    case AO_TERM_DIVERGENCE:
      return "divergence";
    default:
      return "max_iters";
  }
}

int run_optimize(const Optimize& o, const Common& c) {
  if (o.mode != "hard" && o.mode != "penalty") usage("--mode must be hard or penalty");
  if (o.top_k == 0) usage("--top-k must be at least 1");
  ao_model* mraw = nullptr;
  check(ao_model_load(o.model.c_str(), &mraw), "optimize");
  ModelPtr model(mraw);
  ao_dataset* draw = nullptr;
  check(ao_dataset_load(o.data.c_str(), &draw), "optimize");
  DatasetPtr ds(draw);
  if (o.top_k > ao_dataset_size(ds.get()))
    usage("--top-k " + std::to_string(o.top_k) + " exceeds the dataset size " +
          std::to_string(ao_dataset_size(ds.get())));

  ao_run_config cfg;
  check(ao_run_config_default(ao_model_arch(model.get()), &cfg), "optimize");
  cfg.mode = o.mode == "hard" ? AO_MODE_HARD : AO_MODE_PENALTY;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  cfg.theta = o.theta;
  cfg.max_iterations = o.iterations;
  cfg.learning_rate = o.lr;
  cfg.pair_cutoff = o.pair_cutoff;
  cfg.barrier_clamp = o.barrier_clamp;
  cfg.clamp_to_aperture = o.no_clamp ? 0 : 1;
  cfg.seed = o.seed;

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw Failure{1, "cannot create " + o.out_dir + ": " + ec.message()};

  ao_run_batch* braw = nullptr;
  check(ao_optimize_top_k(ds.get(), model.get(), &cfg, o.top_k, c.workers, &braw), "optimize");
  BatchPtr batch(braw);

  std::string csv = "config_id,cost_before,cost_after,pct_change,min_dist_before,min_dist_after,termination\n";
  std::printf("%-12s %16s %16s %10s %9s %9s  %s\n", "Config", "Cost Bef.", "Cost Aft.", "%Chg", "dmin bef", "dmin aft",
              "termination");
  for (std::size_t i = 0; i < ao_run_batch_size(batch.get()); ++i) {
    const ao_run_record* rec = ao_run_batch_get(batch.get(), i);
    ao_run_summary s;
    check(ao_run_record_summary(rec, &s), "optimize");
    const std::string base = (fs::path(o.out_dir) / s.config_id).string();
    check(ao_run_record_save(rec, (base + ".run.json").c_str()), "optimize");
    ao_layout* lraw = nullptr;
    check(ao_run_record_final_layout(rec, &lraw), "optimize");
    LayoutPtr final_layout(lraw);
    const json meta = {{"config_id", s.config_id}, {"mode", o.mode}, {"cost", s.cost_after}};
    check(ao_layout_save(final_layout.get(), (base + ".layout.json").c_str(), meta.dump().c_str()), "optimize");
    csv += std::string(s.config_id) + "," + fmt("%.17g", s.cost_before) + "," + fmt("%.17g", s.cost_after) + "," +
           fmt("%.17g", s.pct_change) + "," + fmt("%.17g", s.min_dist_before) + "," +
           fmt("%.17g", s.min_dist_after) + "," + term_name(s.termination) + "\n";
    std::printf("%-12s %16.6g %16.6g %9.2f%% %9.4f %9.4f  %s\n", s.config_id, s.cost_before, s.cost_after,
                s.pct_change, s.min_dist_before, s.min_dist_after, term_name(s.termination));
  }
  write_text((fs::path(o.out_dir) / "summary.csv").string(), csv);
  return 0;
}

// ---- evaluate ----

struct Evaluate {
  std::string layout;
  std::string cuts_out;
  std::string metrics_out;
  GridFlags grid;
};

json axis_json(const ao_axis_metrics& a) {
  json j;
  j["first_sll_db"] = a.has_first_sll ? json(a.first_sll_db) : json(nullptr);
  j["second_sll_db"] = a.has_second_sll ? json(a.second_sll_db) : json(nullptr);
  j["sll_shortfall"] = a.sll_shortfall != 0;
  j["beamwidth_u"] = a.has_beamwidth ? json(a.beamwidth_u) : json(nullptr);
  j["beamwidth_deg"] = a.has_beamwidth ? json(a.beamwidth_deg) : json(nullptr);
  return j;
}

int run_evaluate(const Evaluate& o, const Common&) {
  ao_layout* raw = nullptr;
  check(ao_layout_load(o.layout.c_str(), &raw), "evaluate");
  LayoutPtr layout(raw);
  double ap[2];
  check(ao_layout_get(layout.get(), nullptr, ap), "evaluate");
  const ao_grid_spec grid = o.grid.spec(ap[0], ap[1]);
  const std::string uy = o.cuts_out.empty() ? "" : o.cuts_out + ".uy.csv";
  const std::string uz = o.cuts_out.empty() ? "" : o.cuts_out + ".uz.csv";
  ao_metrics m;
  check(ao_evaluate(layout.get(), &grid, o.grid.p, uy.empty() ? nullptr : uy.c_str(),
                    uz.empty() ? nullptr : uz.c_str(), &m),
        "evaluate");
  const json j = {{"n_elements", m.n_elements},
                  {"true_cost", m.true_cost},
                  {"min_distance", m.has_min_distance ? json(m.min_distance) : json(nullptr)},
                  {"u_y", axis_json(m.axis[0])},
                  {"u_z", axis_json(m.axis[1])},
                  {"sll_shortfall", m.axis[0].sll_shortfall != 0 || m.axis[1].sll_shortfall != 0}};
  if (!o.metrics_out.empty()) write_text(o.metrics_out, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arrayopt: sparse phased-array layout optimization with neural cost surrogates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ao_version()));
  app.footer(
      "Lengths are in wavelengths. Training defaults are the reference hyperparameters; grid size, "
      "aperture, partition and coordinate learning rate defaults are local choices. Hyperparameter search "
      "ranges worth sweeping: epochs 100-2000, learning rate 1e-6-1e-2, batch size 16-256.");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--workers", common.workers, "Worker threads (falls back to ARRAYOPT_WORKERS)")
        ->envname("ARRAYOPT_WORKERS")
        ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
    sub->add_flag("--deterministic", common.deterministic,
                  "Fixed reduction orders; outputs are byte-identical across runs and worker counts");
  };

  GenData gd;
  auto* gen = app.add_subcommand("gen-data", "Generate a labeled corpus of sub-array layouts");
  gen->add_option("--n", gd.n, "Number of configurations")->required();
  gen->add_option("--seed", gd.seed, "Master seed");
  gen->add_option("--out", gd.out, "Output dataset (.jsonl)")->required();
  gen->add_option("--aperture", gd.aperture, "Aperture width and height (default 16 16)")
      ->expected(2)
      ->check(CLI::PositiveNumber);
  gen->add_option("--partition", gd.partition, "Subdomain grid along y and z (default 2 2)")
      ->expected(2)
      ->check(CLI::Range(1, 64));
  gen->add_option("--period-range", gd.period, "Lattice period draw range (default 0.5 1.0)")
      ->expected(2)
      ->check(CLI::PositiveNumber);
  gen->add_option("--rotation-range", gd.rotation, "Lattice rotation draw range in radians (default 0 pi/2)")
      ->expected(2);
  gen->add_option("--offset-periods", gd.offset_periods, "Offset draw range in periods (default 1)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seam", gd.seam, "Minimum spacing kept across subdomain seams (default 0.5)")
      ->check(CLI::NonNegativeNumber);
  gd.grid.add(gen);
  add_common(gen);

  Train tr;
  auto* trn = app.add_subcommand("train", "Train a cost surrogate");
  trn->add_option("--arch", tr.arch, "fnn or set-transformer")->required();
  trn->add_option("--data", tr.data, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  trn->add_option("--out-model", tr.out_model, "Output weights; sidecar goes to <path>.json")->required();
  trn->add_option("--epochs", tr.epochs, "Epochs (default 1000)");
  trn->add_option("--lr", tr.lr, "Learning rate (default 1e-5 fnn, 1e-3 set-transformer)");
  trn->add_option("--batch-size", tr.batch, "Batch size (default 128 fnn, 64 set-transformer)");
  trn->add_option("--seed", tr.seed, "Initialization and shuffling seed");
  trn->add_option("--train-fraction", tr.train_fraction, "Training share of the seeded split (default 0.8)");
  trn->add_option("--split-seed", tr.split_seed, "Split seed");
  trn->add_flag("--layer-norm", tr.layer_norm, "Enable layer normalization in the Set Transformer");
  trn->add_flag("--no-cache", tr.no_cache, "Skip writing the padded-input cache next to the dataset");
  trn->add_option("--metrics-out", tr.metrics_out, "Metrics JSON (default <model>.metrics.json)");
  trn->add_option("--loss-csv", tr.loss_csv, "Per-epoch loss CSV (default <model>.loss.csv)");
  add_common(trn);

  Optimize op;
  auto* opt = app.add_subcommand("optimize", "Refine the lowest-cost configurations through a surrogate");
  opt->add_option("--model", op.model, "Model weights")->required()->check(CLI::ExistingFile);
  opt->add_option("--data", op.data, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  opt->add_option("--top-k", op.top_k, "Number of lowest-cost configurations (default 10)");
  opt->add_option("--mode", op.mode, "hard or penalty (default penalty)");
  opt->add_option("--epsilon", op.epsilon, "Penalty scale (default 12.5 fnn, 1 set-transformer)");
  opt->add_option("--theta", op.theta, "Minimum element spacing (default 0.5)")->check(CLI::PositiveNumber);
  opt->add_option("--iterations", op.iterations, "Descent iterations (default 1000)")
      ->check(CLI::PositiveNumber);
  opt->add_option("--lr", op.lr, "Coordinate learning rate (default 1e-3)")->check(CLI::PositiveNumber);
  opt->add_option("--pair-cutoff", op.pair_cutoff,
                  "Pairs farther apart are left out of the penalty; 0 sums every pair (default 1.5)")
      ->check(CLI::NonNegativeNumber);
  opt->add_option("--barrier-clamp", op.barrier_clamp, "Smallest (D - theta) inside the log (default 1e-6)")
      ->check(CLI::PositiveNumber);
  opt->add_flag("--no-clamp", op.no_clamp, "Do not clamp coordinates to the aperture");
  opt->add_option("--seed", op.seed, "Run seed");
  opt->add_option("--out-dir", op.out_dir, "Directory for run records, final layouts and summary.csv")->required();
  add_common(opt);

  Evaluate ev;
  auto* evl = app.add_subcommand("evaluate", "Pattern metrics and u-cuts for a layout");
  evl->add_option("--layout", ev.layout, "Layout (.layout.json)")->required()->check(CLI::ExistingFile);
  evl->add_option("--cuts-out", ev.cuts_out, "Prefix for <prefix>.uy.csv and <prefix>.uz.csv");
  evl->add_option("--metrics-out", ev.metrics_out, "Metrics JSON");
  ev.grid.add(evl);
  add_common(evl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return run_gen_data(gd, common);
    if (*trn) return run_train(tr, common);
    if (*opt) return run_optimize(op, common);
    if (*evl) return run_evaluate(ev, common);
  } catch (const Failure& f) {
    std::cerr << "arrayopt: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "arrayopt: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
