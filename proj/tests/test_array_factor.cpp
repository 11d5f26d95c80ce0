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
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>

#include "arrayopt/array_factor.hpp"
#include "arrayopt/error.hpp"
#include "test_util.hpp"

using namespace arrayopt;
using arrayopt::testing::grad_err;
using arrayopt::testing::random_layout;
using arrayopt::testing::rel_err;
using arrayopt::testing::uniform_grid;

namespace {

ElementLayout line_array(int n, double d) {
  std::vector<Point> p;
  for (int i = 0; i < n; ++i) p.push_back({(i - 0.5 * (n - 1)) * d, 0.0});
  return ElementLayout({n * d + 1.0, 4.0}, std::move(p));
}

UVGrid fine_grid() { return UVGrid(2.0 * kWaveNumber, 2049, 1.0); }

std::complex<double> direct_af(std::span<const Point> pts, double uy, double uz) {
  std::complex<double> s = 0.0;
  for (const Point& p : pts) s += std::polar(1.0, p.y * uy + p.z * uz);
  return s;
}

double direct_cost(std::span<const Point> pts, const UVGrid& g, int p) {
  long double ml = 0.0L, side = 0.0L;
  const int n = g.n_samples();
  for (int iy = 0; iy < n; ++iy)
    for (int iz = 0; iz < n; ++iz) {
      const double uy = g.coord(iy), uz = g.coord(iz);
      const double m2 = std::norm(direct_af(pts, uy, uz));
      const long double v = std::pow(static_cast<long double>(m2), p);
      if (std::hypot(uy, uz) <= g.main_lobe_radius())
        ml += v;
      else
        side += v;
    }
  return static_cast<double>(-ml / side);
}

std::string tmp_path(const std::string& name) { return ::testing::TempDir() + "arrayopt_af_" + name; }

}  // namespace

TEST(Grid, Layout) {
  const UVGrid g(4.0, 9, 1.0);
  EXPECT_EQ(g.coord(4), 0.0);
  EXPECT_EQ(g.coord(0), -4.0);
  EXPECT_EQ(g.coord(8), 4.0);
  for (int i = 0; i < 9; ++i) EXPECT_EQ(g.coord(i), -g.coord(8 - i));
  EXPECT_GT(g.main_lobe_count(), 0u);
  EXPECT_LT(g.main_lobe_count(), g.size());
  EXPECT_THROW(UVGrid(4.0, 8, 1.0), Error);
  EXPECT_THROW(UVGrid(4.0, 9, 4.0), Error);
  EXPECT_THROW(UVGrid(4.0, 9, 0.0), Error);
}

TEST(Grid, DefaultForAperture) {
  const UVGrid g = UVGrid::for_aperture({16, 8});
  EXPECT_EQ(g.n_samples(), 257);
  EXPECT_DOUBLE_EQ(g.u_extent(), 4.0 * kPi);
  EXPECT_DOUBLE_EQ(g.main_lobe_radius(), 1.5 * 2.0 * kPi / 8.0);
}

TEST(ArrayFactor, OriginEqualsElementCount) {
  Rng rng(1);
  const UVGrid g(2.0 * kWaveNumber, 65, 1.0);
  for (std::size_t n : {1u, 7u, 100u}) {
    const AFMap af = evaluate_af(random_layout(rng, n), g);
    EXPECT_EQ(af.at(g.center(), g.center()), std::complex<double>(static_cast<double>(n), 0.0));
  }
}

TEST(ArrayFactor, SingleElementUnitModulus) {
  const UVGrid g(2.0 * kWaveNumber, 65, 1.0);
  const AFMap af = evaluate_af(ElementLayout({2, 2}, {{0, 0}}), g);
  for (const auto& v : af.values()) EXPECT_NEAR(std::abs(v), 1.0, 1e-15);
}

TEST(ArrayFactor, HalfWavePairCancelsAtTwoPi) {
  const UVGrid g(2.0 * kWaveNumber, 257, 1.0);
  const int i2pi = g.center() + 64;
  ASSERT_EQ(g.coord(i2pi), kWaveNumber);
  const AFMap af = evaluate_af(ElementLayout({2, 2}, {{0, 0}, {0.5, 0}}), g);
  EXPECT_NEAR(std::abs(af.at(i2pi, g.center())), 0.0, 1e-15);
}

TEST(ArrayFactor, MatchesDirectSummation) {
  Rng rng(2);
  const UVGrid g(2.0 * kWaveNumber, 33, 1.0);
  const ElementLayout l = random_layout(rng, 40);
  const AFMap af = evaluate_af(l, g);
  for (int iy = 0; iy < g.n_samples(); ++iy)
    for (int iz = 0; iz < g.n_samples(); ++iz)
      EXPECT_LE(std::abs(af.at(iy, iz) - direct_af(l.elements(), g.coord(iy), g.coord(iz))), 1e-11);
}

TEST(ArrayFactor, ConjugateSymmetric) {
  Rng rng(3);
  const UVGrid g = UVGrid::for_aperture({8, 8});
  const AFMap af = evaluate_af(random_layout(rng, 60), g);
  const int n = g.n_samples();
  for (int iy = 0; iy < n; ++iy)
    for (int iz = 0; iz < n; ++iz)
      EXPECT_LE(std::abs(af.at(n - 1 - iy, n - 1 - iz) - std::conj(af.at(iy, iz))), 1e-12);
}

TEST(ArrayFactor, EmptyLayoutRejected) {
  EXPECT_THROW(evaluate_af(ElementLayout({2, 2}, {}), UVGrid(1.0, 5, 0.5)), Error);
}

TEST(Cost, SingleElementCountsMask) {
  const UVGrid g(10.0, 21, 2.0 * (10.0 / 10.0) * 1.000001);
  ASSERT_EQ(g.main_lobe_count(), 13u);
  EXPECT_NEAR(true_cost(ElementLayout({2, 2}, {{0.3, -0.2}}), g), -13.0 / 428.0, 1e-15);
}

TEST(Cost, UniformArrayMatchesSecondImplementation) {
  const ElementLayout l = uniform_grid(32, 32, 0.5);
  const UVGrid g(2.0 * kWaveNumber, 65, 1.5 * kWaveNumber / 16.0);
  EXPECT_LE(rel_err(true_cost(l, g), direct_cost(l.elements(), g, 4)), 1e-12);
}

TEST(Cost, DefaultGridUniformArray) {
  const ElementLayout l = uniform_grid(32, 32, 0.5);
  const UVGrid g = UVGrid::for_aperture({16, 16});
  const double c = true_cost(l, g);
  EXPECT_LT(c, 0.0);
  EXPECT_TRUE(std::isfinite(c));
}

TEST(Cost, HigherExponentPunishesSpikeMore) {
  Rng rng(4);
  const UVGrid g(2.0 * kWaveNumber, 65, 1.5);
  const AFMap af = evaluate_af(random_layout(rng, 30), g);
  std::vector<std::complex<double>> spiked(af.values().begin(), af.values().end());
  std::size_t worst = 0;
  for (std::size_t i = 0; i < spiked.size(); ++i)
    if (!g.in_main_lobe(i) && std::abs(spiked[i]) > std::abs(spiked[worst])) worst = i;
  ASSERT_FALSE(g.in_main_lobe(worst));
  spiked[worst] *= 2.0;
  const AFMap bad(g, spiked);
  const double d1 = true_cost(bad, {1}) / true_cost(af, {1});
  const double d4 = true_cost(bad, {4}) / true_cost(af, {4});
  EXPECT_LT(true_cost(af, {1}), 0.0);
  EXPECT_LT(true_cost(af, {4}), 0.0);
  EXPECT_LT(d4, d1);  // ratios below 1; smaller means a larger relative loss
}

TEST(Cost, ScaleInvariant) {
  Rng rng(5);
  const UVGrid g(2.0 * kWaveNumber, 33, 1.5);
  const AFMap af = evaluate_af(random_layout(rng, 12), g);
  std::vector<std::complex<double>> scaled(af.values().begin(), af.values().end());
  for (auto& v : scaled) v *= 3.7;
  EXPECT_LE(rel_err(true_cost(AFMap(g, scaled)), true_cost(af)), 1e-12);
}

TEST(Cost, ZeroSidelobeEnergyIsDegenerate) {
  const UVGrid g(4.0, 9, 1.0);
  std::vector<std::complex<double>> v(g.size(), 0.0);
  v[g.size() / 2] = 1.0;
  try {
    true_cost(AFMap(g, v));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate);
  }
}

TEST(Cost, TranslationAndMirrorInvariant) {
  Rng rng(6);
  const UVGrid g = UVGrid::for_aperture({8, 8});
  for (int t = 0; t < 5; ++t) {
    const ElementLayout l = random_layout(rng, 25, 6.0);
    const double dy = rng.uniform(-1, 1), dz = rng.uniform(-1, 1);
    std::vector<Point> moved, mirrored;
    for (const Point& p : l.elements()) {
      moved.push_back({p.y + dy, p.z + dz});
      mirrored.push_back({-p.y, p.z});
    }
    const double c = true_cost(l, g);
    EXPECT_LE(rel_err(true_cost(ElementLayout({8, 8}, moved), g), c), 1e-12);
    EXPECT_LE(rel_err(true_cost(ElementLayout({8, 8}, mirrored), g), c), 1e-12);
  }
}

TEST(Gradient, AnalyticMatchesFiniteDifferences) {
  Rng rng(7);
  const UVGrid g = UVGrid::for_aperture({8, 8});
  for (int t = 0; t < 3; ++t) {
    const ElementLayout l = random_layout(rng, 20, 6.0);
    const Gradient2 a = analytic_cost_grad(l, g);
    const Gradient2 f = finite_diff_cost_grad(l.elements(), g, {}, 1e-6);
    double scale = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) scale = std::max({scale, std::abs(a.dy[i]), std::abs(a.dz[i])});
    for (std::size_t i = 0; i < l.size(); ++i) {
      EXPECT_LE(grad_err(a.dy[i], f.dy[i], 1e-3 * scale), 1e-5);
      EXPECT_LE(grad_err(a.dz[i], f.dz[i], 1e-3 * scale), 1e-5);
    }
  }
}

TEST(Gradient, MirrorPairedLayoutSumsToZero) {
  Rng rng(8);
  std::vector<Point> p;
  for (int i = 0; i < 8; ++i) {
    const Point q{rng.uniform(0.2, 3), rng.uniform(-3, 3)};
    p.push_back(q);
    p.push_back({-q.y, q.z});
  }
  const Gradient2 g = analytic_cost_grad(ElementLayout({8, 8}, p), UVGrid::for_aperture({8, 8}));
  double s = 0.0, mag = 0.0;
  for (double v : g.dy) {
    s += v;
    mag += std::abs(v);
  }
  EXPECT_LE(std::abs(s), 1e-10 * mag);
}

TEST(Gradient, SingleElementIsZero) {
  const UVGrid g(2.0 * kWaveNumber, 65, 1.5);
  const std::vector<Point> one = {{0.7, -1.1}};
  const Gradient2 a = analytic_cost_grad(one, g);
  EXPECT_NEAR(a.dy[0], 0.0, 1e-15);
  EXPECT_NEAR(a.dz[0], 0.0, 1e-15);
  const Gradient2 f = finite_diff_cost_grad(one, g, {}, 1e-4);
  EXPECT_NEAR(f.dy[0], 0.0, 1e-8);
  EXPECT_NEAR(f.dz[0], 0.0, 1e-8);
}

TEST(Gradient, CentralDifferenceIsSecondOrder) {
  Rng rng(9);
  const UVGrid g(2.0 * kWaveNumber, 65, 1.5);
  const ElementLayout l = random_layout(rng, 6, 2.0);
  const Gradient2 a = analytic_cost_grad(l, g);
  auto err = [&](double h) {
    const Gradient2 f = finite_diff_cost_grad(l.elements(), g, {}, h);
    double e = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) e += std::abs(f.dy[i] - a.dy[i]) + std::abs(f.dz[i] - a.dz[i]);
    return e;
  };
  const double ratio = err(1e-2) / err(5e-3);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
  EXPECT_THROW(finite_diff_cost_grad(l.elements(), g, {}, 0.0), Error);
}

TEST(Cut, SingleElementIsFlat) {
  const UVGrid g(2.0 * kWaveNumber, 65, 1.5);
  const AFMap af = evaluate_af(ElementLayout({2, 2}, {{0, 0}}), g);
  for (CutAxis axis : {CutAxis::u_y, CutAxis::u_z}) {
    const UCut c = u_cut(af, axis);
    ASSERT_EQ(c.db.size(), 65u);
    for (double v : c.db) EXPECT_NEAR(v, 0.0, 1e-12);
    const SllPeaks s = sll_peaks(c.db);
    EXPECT_FALSE(s.first_db.has_value());
    EXPECT_TRUE(s.shortfall);
    EXPECT_THROW(beamwidth_3db(c), Error);
  }
}

TEST(Cut, LineArrayMatchesDirichletKernel) {
  const UVGrid g(2.0 * kWaveNumber, 513, 1.0);
  const UCut c = u_cut(evaluate_af(line_array(32, 0.5), g), CutAxis::u_y);
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    const double u = c.u[i];
    const double s = std::sin(u / 4.0);
    const double mag = std::abs(s) < 1e-300 ? 1.0 : std::abs(std::sin(8.0 * u) / (32.0 * s));
    if (mag < 1e-6) continue;
    EXPECT_NEAR(c.db[i], 20.0 * std::log10(mag), 1e-9) << "u = " << u;
  }
}

TEST(Cut, MirroredLayoutReversesCut) {
  Rng rng(10);
  const ElementLayout l = random_layout(rng, 15, 4.0);
  std::vector<Point> m;
  for (const Point& p : l.elements()) m.push_back({-p.y, p.z});
  const UVGrid g(2.0 * kWaveNumber, 129, 1.5);
  const UCut a = u_cut(evaluate_af(l, g), CutAxis::u_y);
  UCut b = u_cut(evaluate_af(ElementLayout(l.aperture(), m), g), CutAxis::u_y);
  std::reverse(b.db.begin(), b.db.end());
  for (std::size_t i = 0; i < a.db.size(); ++i) EXPECT_NEAR(a.db[i], b.db[i], 1e-9);
}

TEST(Sll, UniformLineArray) {
  const UCut c = u_cut(evaluate_af(line_array(32, 0.5), fine_grid()), CutAxis::u_y);
  const SllPeaks s = sll_peaks(c.db);
  ASSERT_TRUE(s.first_db && s.second_db);
  EXPECT_NEAR(*s.first_db, -13.2, 0.3);
  EXPECT_LE(*s.second_db, *s.first_db);
  EXPECT_FALSE(s.shortfall);
}

TEST(Sll, InjectedSpikeIsFirst) {
  const UCut c = u_cut(evaluate_af(line_array(32, 0.5), fine_grid()), CutAxis::u_y);
  std::vector<double> db = c.db;
  db[db.size() - 200] = -3.0;
  const SllPeaks s = sll_peaks(db);
  ASSERT_TRUE(s.first_db);
  EXPECT_EQ(*s.first_db, -3.0);
}

TEST(Beamwidth, UniformLineArrayAndScaling) {
  const UVGrid g = fine_grid();
  const Beamwidth b1 = beamwidth_3db(u_cut(evaluate_af(line_array(32, 0.5), g), CutAxis::u_y));
  // Half-power width of an N-element array with spacing d is about 0.886 / (N d) radians.
  EXPECT_NEAR(b1.width_deg, 0.886 / 16.0 * 180.0 / kPi, 0.02);
  const Beamwidth b2 = beamwidth_3db(u_cut(evaluate_af(line_array(64, 0.5), g), CutAxis::u_y));
  EXPECT_LE(std::abs(b1.width_deg / b2.width_deg - 2.0) / 2.0, 0.05);
}

TEST(Export, AfMapRoundTripIsExact) {
  Rng rng(11);
  const UVGrid g(2.0 * kWaveNumber, 33, 1.5);
  const AFMap af = evaluate_af(random_layout(rng, 9), g);
  const std::string path = tmp_path("map.afm");
  write_afmap(af, path);
  const AFMap back = read_afmap(path);
  EXPECT_EQ(back.grid().n_samples(), 33);
  EXPECT_EQ(back.grid().u_extent(), g.u_extent());
  EXPECT_EQ(back.grid().main_lobe_radius(), g.main_lobe_radius());
  ASSERT_EQ(back.values().size(), af.values().size());
  for (std::size_t i = 0; i < af.values().size(); ++i) EXPECT_EQ(back.values()[i], af.values()[i]);
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  EXPECT_EQ(static_cast<std::size_t>(f.tellg()), 32u + 16u * 33u * 33u);
  std::remove(path.c_str());
}

TEST(Export, CutCsvHasOneRowPerSample) {
  const UVGrid g(2.0 * kWaveNumber, 65, 1.5);
  const std::string path = tmp_path("cut.csv");
  write_cut_csv(u_cut(evaluate_af(line_array(8, 0.5), g), CutAxis::u_y), path);
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "u,db");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 65);
  std::remove(path.c_str());
}

TEST(GratingLobe, CoarseLatticeRepeatsMainBeam) {
  const ElementLayout l = uniform_grid(32, 32, 0.75);
  const double u = kWaveNumber / 0.75;
  EXPECT_LE(rel_err(std::abs(direct_af(l.elements(), u, 0.0)), 1024.0), 1e-9);
}
