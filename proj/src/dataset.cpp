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

#include "arrayopt/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>

#include "arrayopt/error.hpp"
#include "arrayopt/parallel.hpp"
#include "arrayopt/random.hpp"

namespace arrayopt {

std::string config_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cfg-%06zu", index);
  return buf;
}

namespace {

constexpr int kMaxRedraws = 100;

LabeledConfig draw_one(std::size_t index, const GenerationConfig& gen, const UVGrid& grid,
                       const CostParams& params) {
  const std::uint64_t base = derive_seed(gen.rng_seed, index);
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    const std::uint64_t seed = attempt == 0 ? base : derive_seed(base, static_cast<std::uint64_t>(attempt));
    std::vector<SubArraySpec> specs = draw_subarrays(gen, seed);
    std::optional<ElementLayout> layout;
    try {
      layout = compose_array(specs, gen.seam_min_distance, gen.aperture);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate) throw;
      continue;
    }
    double cost = 0.0;
    try {
      cost = true_cost(*layout, grid, params);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate) throw;
      continue;
    }
    return LabeledConfig{config_id(index), std::move(*layout), cost, std::move(specs), seed};
  }
  fail(ErrorCode::degenerate, "generate_dataset: sample " + std::to_string(index) + " stayed empty after " +
                                  std::to_string(kMaxRedraws) + " redraws");
}

}  // namespace

Dataset generate_dataset(std::size_t n, const GenerationConfig& gen, const UVGrid& grid, const CostParams& params,
                         std::size_t workers) {
  require(n >= 1, "generate_dataset: n must be at least 1");
  require(params.p >= 1, "generate_dataset: cost exponent p must be >= 1");
  gen.validate();
  Dataset ds{gen, grid, params, {}};
  ds.entries.resize(n);
  parallel_for(n, workers, [&](std::size_t i) { ds.entries[i] = draw_one(i, gen, grid, params); });
  return ds;
}

std::vector<LabeledConfig> select_top_k(const Dataset& ds, std::size_t k) {
  if (k > ds.size())
    fail(ErrorCode::invalid_argument, "select_top_k: k = " + std::to_string(k) + " exceeds dataset size " +
                                          std::to_string(ds.size()));
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    const auto& x = ds.entries[a];
    const auto& y = ds.entries[b];
    if (x.true_cost != y.true_cost) return x.true_cost < y.true_cost;
    return x.config_id < y.config_id;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  std::vector<LabeledConfig> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ds.entries[idx[i]]);
  return out;
}

std::pair<std::vector<LabeledConfig>, std::vector<LabeledConfig>> split(const Dataset& ds, double train_fraction,
                                                                          std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "split: train fraction must lie in (0, 1)");
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    fail(ErrorCode::invalid_argument, "split: a fraction of " + std::to_string(train_fraction) + " on " +
                                          std::to_string(n) + " entries leaves one side empty");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  arrayopt::shuffle(idx.begin(), idx.end(), rng);
  std::pair<std::vector<LabeledConfig>, std::vector<LabeledConfig>> out;
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? out.first : out.second).push_back(ds.entries[idx[i]]);
  return out;
}

PaddedMatrix padded_matrix(std::span<const LabeledConfig> entries, std::uint64_t source_digest) {
  PaddedMatrix m;
  m.source_digest = source_digest;
  m.rows = entries.size();
  m.coords.reserve(m.rows * m.cols);
  for (const auto& e : entries) {
    const PaddedInput p = pad_to_fixed(e.layout);
    m.coords.insert(m.coords.end(), p.coords.begin(), p.coords.end());
    m.costs.push_back(e.true_cost);
  }
  return m;
}

namespace {

constexpr char kPadMagic[4] = {'P', 'A', 'D', '1'};

template <class T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& f, const std::string& path) {
  T v;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorCode::io, "padded cache truncated: " + path);
  return v;
}

}  // namespace

void write_padded_cache(const PaddedMatrix& m, const std::string& path) {
  static_assert(std::endian::native == std::endian::little);
  require(m.coords.size() == m.rows * m.cols && m.costs.size() == m.rows, "padded cache: inconsistent matrix");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
  f.write(kPadMagic, 4);
  put<std::uint32_t>(f, 0);
  put<std::uint64_t>(f, m.source_digest);
  put<std::uint64_t>(f, m.rows);
  put<std::uint64_t>(f, m.cols);
  f.write(reinterpret_cast<const char*>(m.coords.data()), static_cast<std::streamsize>(m.coords.size() * 8));
  f.write(reinterpret_cast<const char*>(m.costs.data()), static_cast<std::streamsize>(m.costs.size() * 8));
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

PaddedMatrix read_padded_cache(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kPadMagic, 4) != 0) fail(ErrorCode::io, "not a PAD1 file: " + path);
  (void)get<std::uint32_t>(f, path);
  PaddedMatrix m;
  m.source_digest = get<std::uint64_t>(f, path);
  m.rows = get<std::uint64_t>(f, path);
  m.cols = get<std::uint64_t>(f, path);
  if (m.cols != 2 * ElementLayout::max_elements || m.rows > (std::size_t{1} << 32))
    fail(ErrorCode::io, "padded cache has an unexpected shape: " + path);
  m.coords.resize(m.rows * m.cols);
  m.costs.resize(m.rows);
  if (!f.read(reinterpret_cast<char*>(m.coords.data()), static_cast<std::streamsize>(m.coords.size() * 8)) ||
      !f.read(reinterpret_cast<char*>(m.costs.data()), static_cast<std::streamsize>(m.costs.size() * 8)))
    fail(ErrorCode::io, "padded cache truncated: " + path);
  return m;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace arrayopt
