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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "arrayopt/dataset.hpp"
#include "arrayopt/error.hpp"
#include "test_util.hpp"

using namespace arrayopt;
using arrayopt::testing::rel_err;

namespace {

GenerationConfig small_config(std::uint64_t seed = 7) {
  GenerationConfig g;
  g.aperture = {6.0, 6.0};
  g.partition_y = 1;
  g.partition_z = 2;
  g.period = {0.5, 1.2};
  g.rng_seed = seed;
  return g;
}

UVGrid small_grid() { return UVGrid::for_aperture({6.0, 6.0}, 2.0 * kWaveNumber, 65); }

std::string tmp_path(const std::string& name) { return ::testing::TempDir() + "arrayopt_ds_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void expect_same(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    EXPECT_EQ(x.config_id, y.config_id);
    EXPECT_EQ(x.true_cost, y.true_cost);
    EXPECT_EQ(x.seed, y.seed);
    EXPECT_EQ(x.specs, y.specs);
    ASSERT_EQ(x.layout.size(), y.layout.size());
    for (std::size_t k = 0; k < x.layout.size(); ++k) {
      EXPECT_EQ(x.layout.elements()[k].y, y.layout.elements()[k].y);
      EXPECT_EQ(x.layout.elements()[k].z, y.layout.elements()[k].z);
    }
  }
}

Dataset with_costs(const std::vector<double>& costs) {
  Dataset ds;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    LabeledConfig c;
    c.config_id = config_id(i);
    c.layout = ElementLayout({2, 2}, {{0.0, 0.0}});
    c.true_cost = costs[i];
    ds.entries.push_back(c);
  }
  return ds;
}

}  // namespace

TEST(ConfigId, Format) {
  EXPECT_EQ(config_id(0), "cfg-000000");
  EXPECT_EQ(config_id(42), "cfg-000042");
}

TEST(Generate, SingleSampleRepeatable) {
  const Dataset a = generate_dataset(1, small_config(), small_grid());
  const Dataset b = generate_dataset(1, small_config(), small_grid());
  expect_same(a, b);
  EXPECT_NE(a.entries[0].layout.size(), 0u);
}

TEST(Generate, WorkerCountDoesNotMatter) {
  const Dataset a = generate_dataset(100, small_config(), small_grid(), {}, 1);
  const Dataset b = generate_dataset(100, small_config(), small_grid(), {}, 8);
  expect_same(a, b);
}

TEST(Generate, PrefixStable) {
  const Dataset a = generate_dataset(10, small_config(), small_grid());
  const Dataset b = generate_dataset(20, small_config(), small_grid(), {}, 3);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.entries[i].true_cost, b.entries[i].true_cost);
}

TEST(Generate, LabelsAndLayoutsAreConsistent) {
  const GenerationConfig gen = small_config(9);
  const Dataset ds = generate_dataset(60, gen, small_grid(), {}, 2);
  std::set<std::string> ids;
  const double floor = std::min(gen.period.lo, gen.seam_min_distance);
  for (const auto& e : ds.entries) {
    EXPECT_TRUE(ids.insert(e.config_id).second);
    EXPECT_LT(e.true_cost, 0.0);
    EXPECT_LE(rel_err(true_cost(e.layout, small_grid()), e.true_cost), 1e-12);
    if (e.layout.size() >= 2) EXPECT_GE(min_pairwise_distance(e.layout), floor - 1e-12);
    EXPECT_EQ(e.specs, draw_subarrays(gen, e.seed));
    EXPECT_LE(e.layout.size(), ElementLayout::max_elements);
  }
}

TEST(Generate, DifferentSeedsDiffer) {
  const Dataset a = generate_dataset(5, small_config(1), small_grid());
  const Dataset b = generate_dataset(5, small_config(2), small_grid());
  bool differs = false;
  for (std::size_t i = 0; i < 5; ++i) differs = differs || a.entries[i].true_cost != b.entries[i].true_cost;
  EXPECT_TRUE(differs);
}

TEST(Generate, RejectsZeroCount) { EXPECT_THROW(generate_dataset(0, small_config(), small_grid()), Error); }

TEST(TopK, Example) {
  const Dataset ds = with_costs({-5, -1, -9});
  const auto top = select_top_k(ds, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].true_cost, -9);
  EXPECT_EQ(top[1].true_cost, -5);
  const auto all = select_top_k(ds, 3);
  EXPECT_EQ(all[2].true_cost, -1);
  EXPECT_THROW(select_top_k(ds, 4), Error);
}

TEST(TopK, TiesBrokenById) {
  const Dataset ds = with_costs({-2, -3, -3, -3});
  const auto top = select_top_k(ds, 3);
  EXPECT_EQ(top[0].config_id, "cfg-000001");
  EXPECT_EQ(top[1].config_id, "cfg-000002");
  EXPECT_EQ(top[2].config_id, "cfg-000003");
}

TEST(TopK, MatchesFullSort) {
  Rng rng(3);
  std::vector<double> c(500);
  for (auto& v : c) v = -std::floor(rng.uniform(0, 100));
  const Dataset ds = with_costs(c);
  std::vector<LabeledConfig> sorted = ds.entries;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.true_cost < b.true_cost; });
  const auto top = select_top_k(ds, 37);
  for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(top[i].config_id, sorted[i].config_id);
}

TEST(Split, SizesDisjointExhaustive) {
  const Dataset ds = with_costs({-1, -2, -3, -4, -5, -6, -7, -8, -9, -10});
  const auto [tr, va] = split(ds, 0.8, 5);
  EXPECT_EQ(tr.size(), 8u);
  EXPECT_EQ(va.size(), 2u);
  std::set<std::string> ids;
  for (const auto& e : tr) ids.insert(e.config_id);
  for (const auto& e : va) EXPECT_TRUE(ids.insert(e.config_id).second);
  EXPECT_EQ(ids.size(), 10u);
  const auto [tr2, va2] = split(ds, 0.8, 5);
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_EQ(tr[i].config_id, tr2[i].config_id);
  const auto [tr3, va3] = split(ds, 0.8, 6);
  bool differs = false;
  for (std::size_t i = 0; i < tr.size(); ++i) differs = differs || tr[i].config_id != tr3[i].config_id;
  EXPECT_TRUE(differs);
}

TEST(Split, EmptySideRejected) {
  const Dataset ds = with_costs({-1, -2, -3});
  EXPECT_THROW(split(ds, 0.1, 1), Error);
  EXPECT_THROW(split(ds, 0.9, 1), Error);
  EXPECT_THROW(split(ds, 1.0, 1), Error);
  EXPECT_THROW(split(ds, 0.0, 1), Error);
}

TEST(Persist, RoundTripAndRegeneration) {
  const Dataset ds = generate_dataset(25, small_config(11), small_grid(), {}, 2);
  const std::string path = tmp_path("rt.jsonl");
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  expect_same(ds, back);
  EXPECT_EQ(back.grid.n_samples(), ds.grid.n_samples());
  EXPECT_EQ(back.grid.u_extent(), ds.grid.u_extent());
  EXPECT_EQ(back.grid.main_lobe_radius(), ds.grid.main_lobe_radius());
  EXPECT_EQ(back.params.p, ds.params.p);
  EXPECT_EQ(back.gen.rng_seed, ds.gen.rng_seed);
  for (const auto& e : back.entries) EXPECT_LE(rel_err(true_cost(e.layout, back.grid), e.true_cost), 1e-12);

  const Dataset regen = generate_dataset(back.size(), back.gen, back.grid, back.params);
  expect_same(ds, regen);

  const std::string path2 = tmp_path("rt2.jsonl");
  save_dataset(back, path2);
  EXPECT_EQ(slurp(path), slurp(path2));
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_NE(header.find("\"version\":1"), std::string::npos) << header;
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST(Persist, MalformedFilesRejected) {
  const std::string path = tmp_path("bad.jsonl");
  {
    std::ofstream f(path);
    f << "{\"version\":99}\n";
  }
  try {
    load_dataset(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
  {
    std::ofstream f(path);
    f << "not json\n";
  }
  EXPECT_THROW(load_dataset(path), Error);
  EXPECT_THROW(load_dataset(tmp_path("missing.jsonl")), Error);
  std::remove(path.c_str());
}

TEST(Persist, TruncatedDatasetRejected) {
  const Dataset ds = generate_dataset(4, small_config(), small_grid());
  const std::string path = tmp_path("trunc.jsonl");
  save_dataset(ds, path);
  std::string text = slurp(path);
  text.erase(text.rfind('{'));
  {
    std::ofstream f(path, std::ios::binary);
    f << text;
  }
  EXPECT_THROW(load_dataset(path), Error);
  std::remove(path.c_str());
}

TEST(PaddedCache, RoundTripAndLayout) {
  const Dataset ds = generate_dataset(6, small_config(), small_grid());
  const PaddedMatrix m = padded_matrix(ds.entries, 1234);
  ASSERT_EQ(m.rows, 6u);
  ASSERT_EQ(m.coords.size(), 6u * 2048u);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto pad = pad_to_fixed(canonical_order(ds.entries[r].layout));
    for (std::size_t c = 0; c < 2048; ++c) EXPECT_EQ(m.coords[r * 2048 + c], pad.coords[c]);
    EXPECT_EQ(m.costs[r], ds.entries[r].true_cost);
  }
  const std::string path = tmp_path("cache.pad1");
  write_padded_cache(m, path);
  const PaddedMatrix back = read_padded_cache(path);
  EXPECT_EQ(back.source_digest, 1234u);
  EXPECT_EQ(back.coords, m.coords);
  EXPECT_EQ(back.costs, m.costs);
  std::string bytes = slurp(path);
  bytes.resize(bytes.size() - 3);
  {
    std::ofstream f(path, std::ios::binary);
    f << bytes;
  }
  EXPECT_THROW(read_padded_cache(path), Error);
  std::remove(path.c_str());
}

TEST(FileDigest, TracksContent) {
  const std::string path = tmp_path("digest.txt");
  {
    std::ofstream f(path);
    f << "abc";
  }
  const auto d1 = file_digest(path);
  EXPECT_EQ(d1, file_digest(path));
  {
    std::ofstream f(path);
    f << "abd";
  }
  EXPECT_NE(d1, file_digest(path));
  std::remove(path.c_str());
  EXPECT_THROW(file_digest(path), Error);
}
