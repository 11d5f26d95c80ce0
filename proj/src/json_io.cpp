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

#include <fstream>
#include <sstream>

#include "arrayopt/dataset.hpp"
#include "arrayopt/error.hpp"
#include "arrayopt/io.hpp"
#include "arrayopt/weights.hpp"
#include "json.hpp"

namespace arrayopt {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
  f << text;
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::io, what + ": malformed JSON: " + e.what());
  }
}

// Field access with errors that name the file kind and key.
template <class T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::io, what + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::io, what + ": bad value for \"" + key + "\"");
  }
}

json points_json(std::span<const Point> pts) {
  json a = json::array();
  for (const Point& p : pts) a.push_back({p.y, p.z});
  return a;
}

std::vector<Point> points_from(const json& a, const std::string& what) {
  if (!a.is_array()) fail(ErrorCode::io, what + ": \"elements\" must be an array");
  std::vector<Point> pts;
  pts.reserve(a.size());
  for (const json& e : a) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      fail(ErrorCode::io, what + ": each element must be a [y, z] pair of numbers");
    pts.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return pts;
}

Aperture aperture_from(const json& j, const std::string& what) {
  const auto a = field<std::vector<double>>(j, "aperture", what);
  if (a.size() != 2) fail(ErrorCode::io, what + ": \"aperture\" must be [wy, wz]");
  return {a[0], a[1]};
}

json layout_obj(const ElementLayout& layout) {
  return {{"aperture", {layout.aperture().width_y, layout.aperture().height_z}},
          {"elements", points_json(layout.elements())}};
}

json gen_obj(const GenerationConfig& g) {
  json subs = json::array();
  for (const Rect& r : g.subdomains) subs.push_back({r.y_min, r.y_max, r.z_min, r.z_max});
  return {{"aperture", {g.aperture.width_y, g.aperture.height_z}},
          {"subdomains", subs},
          {"partition", {g.partition_y, g.partition_z}},
          {"period", {g.period.lo, g.period.hi}},
          {"rotation", {g.rotation.lo, g.rotation.hi}},
          {"offset_periods", g.offset_periods},
          {"seam_min_distance", g.seam_min_distance},
          {"rng_seed", g.rng_seed}};
}

GenerationConfig gen_from(const json& j, const std::string& what) {
  GenerationConfig g;
  g.aperture = aperture_from(j, what);
  for (const auto& r : field<std::vector<std::vector<double>>>(j, "subdomains", what)) {
    if (r.size() != 4) fail(ErrorCode::io, what + ": subdomain must be [y_min, y_max, z_min, z_max]");
    g.subdomains.push_back({r[0], r[1], r[2], r[3]});
  }
  const auto part = field<std::vector<int>>(j, "partition", what);
  const auto period = field<std::vector<double>>(j, "period", what);
  const auto rot = field<std::vector<double>>(j, "rotation", what);
  if (part.size() != 2 || period.size() != 2 || rot.size() != 2)
    fail(ErrorCode::io, what + ": partition, period and rotation must be pairs");
  g.partition_y = part[0];
  g.partition_z = part[1];
  g.period = {period[0], period[1]};
  g.rotation = {rot[0], rot[1]};
  g.offset_periods = field<double>(j, "offset_periods", what);
  g.seam_min_distance = field<double>(j, "seam_min_distance", what);
  g.rng_seed = field<std::uint64_t>(j, "rng_seed", what);
  return g;
}

json spec_obj(const SubArraySpec& s) {
  return {{"subdomain", {s.subdomain.y_min, s.subdomain.y_max, s.subdomain.z_min, s.subdomain.z_max}},
          {"period", {s.period_y, s.period_z}},
          {"rotation", s.rotation},
          {"offset", {s.offset.y, s.offset.z}}};
}

SubArraySpec spec_from(const json& j, const std::string& what) {
  const auto r = field<std::vector<double>>(j, "subdomain", what);
  const auto p = field<std::vector<double>>(j, "period", what);
  const auto o = field<std::vector<double>>(j, "offset", what);
  if (r.size() != 4 || p.size() != 2 || o.size() != 2) fail(ErrorCode::io, what + ": malformed sub-array spec");
  SubArraySpec s;
  s.subdomain = {r[0], r[1], r[2], r[3]};
  s.period_y = p[0];
  s.period_z = p[1];
  s.rotation = field<double>(j, "rotation", what);
  s.offset = {o[0], o[1]};
  return s;
}

}  // namespace

std::string layout_to_json(const ElementLayout& layout, const std::string& meta_json) {
  json j = layout_obj(layout);
  json meta = parse(meta_json, "layout meta");
  if (!meta.is_object()) fail(ErrorCode::invalid_argument, "layout meta must be a JSON object");
  j["meta"] = std::move(meta);
  return j.dump(2) + "\n";
}

ElementLayout layout_from_json(const std::string& text) {
  const std::string what = "layout";
  const json j = parse(text, what);
  if (!j.is_object() || !j.contains("elements")) fail(ErrorCode::io, what + ": missing \"elements\"");
  ElementLayout layout(aperture_from(j, what), points_from(j.at("elements"), what));
  layout.validate();
  return layout;
}

void write_layout(const ElementLayout& layout, const std::string& path, const std::string& meta_json) {
  spill(path, layout_to_json(layout, meta_json));
}

ElementLayout read_layout(const std::string& path) {
  const std::string text = slurp(path);
  try {
    return layout_from_json(text);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string generation_config_to_json(const GenerationConfig& gen) { return gen_obj(gen).dump(); }

GenerationConfig generation_config_from_json(const std::string& text) {
  return gen_from(parse(text, "generation config"), "generation config");
}

std::string run_record_to_json(const RunRecord& rec) {
  json hist = json::array();
  for (const auto& h : rec.history)
    hist.push_back({{"iter", h.iter}, {"loss", h.loss}, {"penalty", h.penalty}, {"min_dist", h.min_dist}});
  json j = {{"config_id", rec.config_id},
            {"termination", to_string(rec.termination)},
            {"cost_before", rec.cost_before},
            {"cost_after", rec.cost_after},
            {"pct_change", rec.pct_change},
            {"min_dist_before", rec.min_dist_before},
            {"min_dist_after", rec.min_dist_after},
            {"history", std::move(hist)}};
  return j.dump(1) + "\n";
}

void write_run_record(const RunRecord& rec, const std::string& path) { spill(path, run_record_to_json(rec)); }

RunSummary read_run_summary(const std::string& path) {
  const json j = parse(slurp(path), path);
  RunSummary s;
  s.config_id = field<std::string>(j, "config_id", path);
  s.termination = field<std::string>(j, "termination", path);
  s.cost_before = field<double>(j, "cost_before", path);
  s.cost_after = field<double>(j, "cost_after", path);
  s.pct_change = field<double>(j, "pct_change", path);
  s.min_dist_before = field<double>(j, "min_dist_before", path);
  s.min_dist_after = field<double>(j, "min_dist_after", path);
  return s;
}

std::string model_sidecar_path(const std::string& model_path) { return model_path + ".json"; }

void save_model(const Surrogate& model, const std::string& path, const TrainConfig& cfg) {
  write_weights(path, model.arch_id(), model.parameters());
  const json side = {{"arch", to_string(model.arch())},
                     {"layer_norm", model.layer_norm()},
                     {"scaler", {{"mu", model.scaler().mu}, {"sigma", model.scaler().sigma}}},
                     {"train_config",
                      {{"epochs", cfg.epochs},
                       {"learning_rate", cfg.learning_rate},
                       {"batch_size", cfg.batch_size},
                       {"seed", cfg.seed}}}};
  spill(model_sidecar_path(path), side.dump(2) + "\n");
}

Surrogate load_model(const std::string& path) {
  const std::string side_path = model_sidecar_path(path);
  const json side = parse(slurp(side_path), side_path);
  const Architecture arch = parse_architecture(field<std::string>(side, "arch", side_path));
  const json scaler = side.contains("scaler") ? side.at("scaler") : json();
  const TargetScaler sc{field<double>(scaler, "mu", side_path), field<double>(scaler, "sigma", side_path)};
  WeightFile wf = read_weights(path);
  if (wf.arch_id != static_cast<std::uint32_t>(arch))
    fail(ErrorCode::mismatch, path + ": weights are for architecture id " + std::to_string(wf.arch_id) +
                                  " but the sidecar says " + to_string(arch));
  return Surrogate(arch, std::move(wf.params), sc);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
  const json header = {{"version", Dataset::format_version},
                       {"gen_config", gen_obj(ds.gen)},
                       {"grid",
                        {{"u_extent", ds.grid.u_extent()},
                         {"n_samples", ds.grid.n_samples()},
                         {"ml_radius", ds.grid.main_lobe_radius()}}},
                       {"p", ds.params.p},
                       {"count", ds.size()}};
  f << header.dump() << '\n';
  for (const LabeledConfig& e : ds.entries) {
    json specs = json::array();
    for (const auto& s : e.specs) specs.push_back(spec_obj(s));
    json line = layout_obj(e.layout);
    line["config_id"] = e.config_id;
    line["true_cost"] = e.true_cost;
    line["seed"] = e.seed;
    line["specs"] = std::move(specs);
    f << line.dump() << '\n';
  }
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) fail(ErrorCode::io, path + ": empty dataset file");
  const std::string hw = path + ":1";
  const json header = parse(line, hw);
  const int version = field<int>(header, "version", hw);
  if (version != Dataset::format_version)
    fail(ErrorCode::io, hw + ": unsupported dataset version " + std::to_string(version));
  const json grid = header.contains("grid") ? header.at("grid") : json();
  Dataset ds{gen_from(header.contains("gen_config") ? header.at("gen_config") : json(), hw),
             UVGrid(field<double>(grid, "u_extent", hw), field<int>(grid, "n_samples", hw),
                    field<double>(grid, "ml_radius", hw)),
             CostParams{field<int>(header, "p", hw)},
             {}};
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string what = path + ":" + std::to_string(lineno);
    const json j = parse(line, what);
    LabeledConfig e;
    e.config_id = field<std::string>(j, "config_id", what);
    e.true_cost = field<double>(j, "true_cost", what);
    e.seed = field<std::uint64_t>(j, "seed", what);
    try {
      e.layout = ElementLayout(aperture_from(j, what), points_from(j.at("elements"), what));
    } catch (const Error& err) {
      fail(ErrorCode::io, what + ": " + err.what());
    }
    if (j.contains("specs"))
      for (const json& s : j.at("specs")) e.specs.push_back(spec_from(s, what));
    ds.entries.push_back(std::move(e));
  }
  if (header.contains("count") && header.at("count").get<std::size_t>() != ds.size())
    fail(ErrorCode::io, path + ": header announces " + std::to_string(header.at("count").get<std::size_t>()) +
                            " configs, file holds " + std::to_string(ds.size()));
  return ds;
}

}  // namespace arrayopt
