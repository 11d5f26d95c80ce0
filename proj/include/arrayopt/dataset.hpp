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
#include <utility>
#include <vector>

#include "arrayopt/array_factor.hpp"
#include "arrayopt/geometry.hpp"

namespace arrayopt {

struct LabeledConfig {
  std::string config_id;
  ElementLayout layout;
  double true_cost = 0.0;
  std::vector<SubArraySpec> specs;
  std::uint64_t seed = 0;  // seed the specs were drawn with
};

// Everything needed to regenerate the corpus: generation config (including
// the master seed), grid, cost exponent and size.
struct Dataset {
  static constexpr int format_version = 1;

  GenerationConfig gen;
  UVGrid grid{2.0 * kWaveNumber, 257, 1.0};
  CostParams params;
  std::vector<LabeledConfig> entries;

  std::size_t size() const noexcept { return entries.size(); }
};

std::string config_id(std::size_t index);  // "cfg-000042"

// Sample i is drawn from derive_seed(gen.rng_seed, i); an empty draw is
// redrawn from derive_seed(that seed, attempt) up to 100 times. The result
// does not depend on `workers`.
Dataset generate_dataset(std::size_t n, const GenerationConfig& gen, const UVGrid& grid,
                         const CostParams& params = {}, std::size_t workers = 1);

// Most negative cost first; ties by config_id.
std::vector<LabeledConfig> select_top_k(const Dataset& ds, std::size_t k = 10);

// Seeded shuffle, then the first round(train_fraction * n) entries train.
std::pair<std::vector<LabeledConfig>, std::vector<LabeledConfig>> split(const Dataset& ds, double train_fraction,
                                                                          std::uint64_t seed);

// JSONL: header line then one LabeledConfig per line.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Row-major n x 2048 padded coordinate matrix plus costs ("PAD1" file). The
// source digest ties a cache to the dataset file it was built from.
struct PaddedMatrix {
  std::uint64_t source_digest = 0;
  std::size_t rows = 0;
  std::size_t cols = 2 * ElementLayout::max_elements;
  std::vector<double> coords;
  std::vector<double> costs;
};

PaddedMatrix padded_matrix(std::span<const LabeledConfig> entries, std::uint64_t source_digest = 0);
void write_padded_cache(const PaddedMatrix& m, const std::string& path);
PaddedMatrix read_padded_cache(const std::string& path);

// FNV-1a 64 of a file's bytes.
std::uint64_t file_digest(const std::string& path);

}  // namespace arrayopt
