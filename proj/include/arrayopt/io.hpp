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

#include <string>

#include "arrayopt/dataset.hpp"
#include "arrayopt/geometry.hpp"
#include "arrayopt/optimizer.hpp"
#include "arrayopt/surrogate.hpp"

namespace arrayopt {

// .layout.json: {"aperture": [wy, wz], "elements": [[y, z], ...], "meta": {...}}.
// meta_json must be a JSON object.
std::string layout_to_json(const ElementLayout& layout, const std::string& meta_json = "{}");
ElementLayout layout_from_json(const std::string& text);
void write_layout(const ElementLayout& layout, const std::string& path, const std::string& meta_json = "{}");
ElementLayout read_layout(const std::string& path);

std::string generation_config_to_json(const GenerationConfig& gen);
GenerationConfig generation_config_from_json(const std::string& text);

std::string run_record_to_json(const RunRecord& rec);
void write_run_record(const RunRecord& rec, const std::string& path);

// The scalar fields of a run record file, enough to rebuild a summary table.
struct RunSummary {
  std::string config_id;
  std::string termination;
  double cost_before = 0.0;
  double cost_after = 0.0;
  double pct_change = 0.0;
  double min_dist_before = 0.0;
  double min_dist_after = 0.0;
};
RunSummary read_run_summary(const std::string& path);

// Model = NNW1 weights at `path` plus the JSON sidecar at `path + ".json"`.
std::string model_sidecar_path(const std::string& model_path);
void save_model(const Surrogate& model, const std::string& path, const TrainConfig& cfg);
Surrogate load_model(const std::string& path);

}  // namespace arrayopt
