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

#include "arrayopt/array_factor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "arrayopt/error.hpp"

namespace arrayopt {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

UVGrid::UVGrid(double u_extent, int n_samples, double main_lobe_radius)
    : extent_(u_extent), n_(n_samples), ml_radius_(main_lobe_radius) {
  require(std::isfinite(u_extent) && u_extent > 0.0, "UVGrid: u_extent must be positive");
  require(n_samples >= 3 && n_samples % 2 == 1, "UVGrid: n_samples must be odd and >= 3");
  require(main_lobe_radius > 0.0 && main_lobe_radius < u_extent,
          "UVGrid: main_lobe_radius must lie in (0, u_extent)");
  step_ = u_extent / static_cast<double>(n_ / 2);
  coords_.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) coords_[static_cast<std::size_t>(i)] = coord(i);
  mask_.assign(size(), 0);
  const double r2 = ml_radius_ * ml_radius_;
  for (int iy = 0; iy < n_; ++iy) {
    for (int iz = 0; iz < n_; ++iz) {
      const double uy = coords_[iy], uz = coords_[iz];
      if (uy * uy + uz * uz <= r2) {
        mask_[static_cast<std::size_t>(iy) * n_ + iz] = 1;
        ++ml_count_;
      }
    }
  }
  // The origin is always inside and the corners always outside, so both
  // partitions are non-empty once radius < extent.
}

UVGrid UVGrid::for_aperture(const Aperture& aperture, double u_extent, int n_samples, double ml_factor) {
  return UVGrid(u_extent, n_samples, ml_factor * kWaveNumber / aperture.smaller_side());
}

AFMap::AFMap(UVGrid grid, std::vector<std::complex<double>> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.size(), "AFMap: value count does not match the grid");
}

namespace {

// Per-element phase factors along one axis: out[a * n_elem + e] = exp(j * coord_e * u_a).
struct PhaseTable {
  std::vector<double> re, im;
};

PhaseTable phase_by_sample(std::span<const double> u, std::span<const Point> pts, bool use_y) {
  const std::size_t G = u.size(), N = pts.size();
  PhaseTable t{std::vector<double>(G * N), std::vector<double>(G * N)};
  for (std::size_t a = 0; a < G; ++a) {
    for (std::size_t e = 0; e < N; ++e) {
      const double ph = (use_y ? pts[e].y : pts[e].z) * u[a];
      t.re[a * N + e] = std::cos(ph);
      t.im[a * N + e] = std::sin(ph);
    }
  }
  return t;
}

PhaseTable phase_by_element(std::span<const double> u, std::span<const Point> pts, bool use_y) {
  const std::size_t G = u.size(), N = pts.size();
  PhaseTable t{std::vector<double>(G * N), std::vector<double>(G * N)};
  for (std::size_t e = 0; e < N; ++e) {
    for (std::size_t a = 0; a < G; ++a) {
      const double ph = (use_y ? pts[e].y : pts[e].z) * u[a];
      t.re[e * G + a] = std::cos(ph);
      t.im[e * G + a] = std::sin(ph);
    }
  }
  return t;
}

double pow_int(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

AFMap evaluate_af(const ElementLayout& layout, const UVGrid& grid) {
  return evaluate_af(layout.elements(), grid);
}

AFMap evaluate_af(std::span<const Point> pts, const UVGrid& grid) {
  require(!pts.empty(), "evaluate_af: layout is empty");
  const std::size_t G = static_cast<std::size_t>(grid.n_samples()), N = pts.size();
  const auto ey = phase_by_sample(grid.coords(), pts, true);
  const auto ez = phase_by_element(grid.coords(), pts, false);

  // U = Ey * Ez is separable: a complex (G x N) by (N x G) product.
  std::vector<std::complex<double>> values(G * G);
  std::vector<double> re(G), im(G);
  for (std::size_t iy = 0; iy < G; ++iy) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (std::size_t e = 0; e < N; ++e) {
      const double a = ey.re[iy * N + e], b = ey.im[iy * N + e];
      const double* zr = &ez.re[e * G];
      const double* zi = &ez.im[e * G];
      for (std::size_t iz = 0; iz < G; ++iz) {
        re[iz] += a * zr[iz] - b * zi[iz];
        im[iz] += a * zi[iz] + b * zr[iz];
      }
    }
    for (std::size_t iz = 0; iz < G; ++iz) values[iy * G + iz] = {re[iz], im[iz]};
  }
  return AFMap(grid, std::move(values));
}

double true_cost(const AFMap& af, const CostParams& params) {
  require(params.p >= 1, "true_cost: p must be >= 1");
  const auto& grid = af.grid();
  double ml = 0.0, side = 0.0;
  const auto v = af.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = pow_int(std::norm(v[i]), params.p);
    if (grid.in_main_lobe(i))
      ml += w;
    else
      side += w;
  }
  if (!(side > 0.0)) fail(ErrorCode::degenerate, "true_cost: side-lobe region carries no energy");
  if (!std::isfinite(ml) || !std::isfinite(side)) fail(ErrorCode::degenerate, "true_cost: pattern energy overflow");
  return -ml / side;
}

Gradient2 analytic_cost_grad(std::span<const Point> pts, const UVGrid& grid, const CostParams& params) {
  require(params.p >= 1, "analytic_cost_grad: p must be >= 1");
  const AFMap af = evaluate_af(pts, grid);
  const std::size_t G = static_cast<std::size_t>(grid.n_samples()), N = pts.size();
  const auto v = af.values();
  const int p = params.p;

  double ml = 0.0, side = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = pow_int(std::norm(v[i]), p);
    (grid.in_main_lobe(i) ? ml : side) += w;
  }
  if (!(side > 0.0)) fail(ErrorCode::degenerate, "analytic_cost_grad: side-lobe region carries no energy");

  // cost = -ML/S. d cost / d|U_i|^2 = p |U_i|^(2p-2) * c_i with
  // c_i = -1/S inside the main lobe and ML/S^2 outside.
  // d|U_i|^2 / dy_n = -2 u_y Im(conj(U_i) e_n(i)), likewise for z.
  const double c_ml = -1.0 / side, c_side = ml / (side * side);
  std::vector<double> wr(G * G), wi(G * G);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double scale = p * pow_int(std::norm(v[i]), p - 1) * (grid.in_main_lobe(i) ? c_ml : c_side);
    wr[i] = scale * v[i].real();
    wi[i] = -scale * v[i].imag();  // conj(U)
  }

  const auto ey = phase_by_sample(grid.coords(), pts, true);
  const auto ez = phase_by_element(grid.coords(), pts, false);
  const auto u = grid.coords();

  Gradient2 g{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  for (std::size_t iy = 0; iy < G; ++iy) {
    const double* rw = &wr[iy * G];
    const double* iw = &wi[iy * G];
    for (std::size_t e = 0; e < N; ++e) {
      const double* zr = &ez.re[e * G];
      const double* zi = &ez.im[e * G];
      double tr = 0.0, ti = 0.0, sr = 0.0, si = 0.0;
      for (std::size_t iz = 0; iz < G; ++iz) {
        const double pr = rw[iz] * zr[iz] - iw[iz] * zi[iz];
        const double pi = rw[iz] * zi[iz] + iw[iz] * zr[iz];
        tr += pr;
        ti += pi;
        sr += u[iz] * pr;
        si += u[iz] * pi;
      }
      const double a = ey.re[iy * N + e], b = ey.im[iy * N + e];
      // Im((a + jb)(tr + j ti)) = a ti + b tr
      g.dy[e] += -2.0 * u[iy] * (a * ti + b * tr);
      g.dz[e] += -2.0 * (a * si + b * sr);
    }
  }
  return g;
}

Gradient2 finite_diff_cost_grad(std::span<const Point> pts, const UVGrid& grid, const CostParams& params, double h) {
  require(h > 0.0, "finite_diff_cost_grad: step must be positive");
  std::vector<Point> work(pts.begin(), pts.end());
  Gradient2 g{std::vector<double>(pts.size()), std::vector<double>(pts.size())};
  auto cost_at = [&] { return true_cost(evaluate_af(work, grid), params); };
  for (std::size_t e = 0; e < work.size(); ++e) {
    for (int axis = 0; axis < 2; ++axis) {
      double& x = axis == 0 ? work[e].y : work[e].z;
      const double x0 = x;
      x = x0 + h;
      const double fp = cost_at();
      x = x0 - h;
      const double fm = cost_at();
      x = x0;
      (axis == 0 ? g.dy : g.dz)[e] = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

UCut u_cut(const AFMap& af, CutAxis axis) {
  const auto& grid = af.grid();
  const int n = grid.n_samples(), c = grid.center();
  double peak = 0.0;
  for (const auto& x : af.values()) peak = std::max(peak, std::abs(x));
  if (!(peak > 0.0)) fail(ErrorCode::degenerate, "u_cut: pattern is identically zero");
  UCut cut;
  cut.u.resize(static_cast<std::size_t>(n));
  cut.db.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double mag = std::abs(axis == CutAxis::u_y ? af.at(i, c) : af.at(c, i));
    cut.u[i] = grid.coord(i);
    cut.db[i] = mag > 0.0 ? std::max(kDbFloor, 20.0 * std::log10(mag / peak)) : kDbFloor;
  }
  return cut;
}

namespace {

// Index of the maximum; ties resolved towards the center of the profile.
std::size_t main_peak(std::span<const double> db) {
  const double best = *std::max_element(db.begin(), db.end());
  const auto mid = static_cast<long>(db.size() / 2);
  std::size_t arg = 0;
  long dist = std::numeric_limits<long>::max();
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i] != best) continue;
    const long d = std::abs(static_cast<long>(i) - mid);
    if (d < dist) {
      dist = d;
      arg = i;
    }
  }
  return arg;
}

}  // namespace

SllPeaks sll_peaks(std::span<const double> db) {
  require(db.size() >= 3, "sll_peaks: profile too short");
  const std::size_t pk = main_peak(db);
  std::size_t lo = pk, hi = pk;
  while (lo > 0 && db[lo - 1] <= db[lo]) --lo;
  while (hi + 1 < db.size() && db[hi + 1] <= db[hi]) ++hi;

  std::vector<double> peaks;
  for (std::size_t j = 1; j + 1 < db.size(); ++j) {
    if (j >= lo && j <= hi) continue;
    if (db[j] > db[j - 1] && db[j] >= db[j + 1]) peaks.push_back(db[j] - db[pk]);
  }
  std::sort(peaks.begin(), peaks.end(), std::greater<>());
  SllPeaks out;
  if (!peaks.empty()) out.first_db = peaks[0];
  if (peaks.size() > 1) out.second_db = peaks[1];
  out.shortfall = peaks.size() < 2;
  return out;
}

Beamwidth beamwidth_3db(const UCut& cut) {
  require(cut.u.size() == cut.db.size() && cut.u.size() >= 3, "beamwidth_3db: malformed cut");
  const auto& db = cut.db;
  const std::size_t pk = main_peak(db);
  const double level = db[pk] + 10.0 * std::log10(0.5);
  auto cross = [&](std::size_t inner, std::size_t outer) {
    const double t = (level - db[inner]) / (db[outer] - db[inner]);
    return cut.u[inner] + t * (cut.u[outer] - cut.u[inner]);
  };
  std::size_t r = pk;
  while (r + 1 < db.size() && db[r + 1] >= level) ++r;
  if (r + 1 == db.size()) fail(ErrorCode::degenerate, "beamwidth_3db: no half-power crossing above the peak");
  std::size_t l = pk;
  while (l > 0 && db[l - 1] >= level) --l;
  if (l == 0) fail(ErrorCode::degenerate, "beamwidth_3db: no half-power crossing below the peak");

  const double u_hi = cross(r, r + 1), u_lo = cross(l, l - 1);
  if (std::abs(u_hi) > kWaveNumber || std::abs(u_lo) > kWaveNumber)
    fail(ErrorCode::degenerate, "beamwidth_3db: crossing lies outside the visible region");
  Beamwidth bw;
  bw.width_u = u_hi - u_lo;
  bw.width_deg = (std::asin(u_hi / kWaveNumber) - std::asin(u_lo / kWaveNumber)) * 180.0 / kPi;
  return bw;
}

void write_afmap(const AFMap& af, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "write_afmap: cannot open " + path);
  char header[32] = {};
  std::memcpy(header, "AFM1", 4);
  const double extent = af.grid().u_extent(), radius = af.grid().main_lobe_radius();
  const std::uint64_t n = static_cast<std::uint64_t>(af.grid().n_samples());
  std::memcpy(header + 8, &extent, 8);
  std::memcpy(header + 16, &n, 8);
  std::memcpy(header + 24, &radius, 8);
  out.write(header, sizeof header);
  for (const auto& x : af.values()) {
    const double pair[2] = {x.real(), x.imag()};
    out.write(reinterpret_cast<const char*>(pair), sizeof pair);
  }
  if (!out) fail(ErrorCode::io, "write_afmap: write failed for " + path);
}

AFMap read_afmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "read_afmap: cannot open " + path);
  char header[32];
  if (!in.read(header, sizeof header) || std::memcmp(header, "AFM1", 4) != 0)
    fail(ErrorCode::io, "read_afmap: bad header in " + path);
  double extent, radius;
  std::uint64_t n;
  std::memcpy(&extent, header + 8, 8);
  std::memcpy(&n, header + 16, 8);
  std::memcpy(&radius, header + 24, 8);
  if (n > 100001) fail(ErrorCode::io, "read_afmap: implausible sample count in " + path);
  UVGrid grid(extent, static_cast<int>(n), radius);
  std::vector<std::complex<double>> values(grid.size());
  for (auto& x : values) {
    double pair[2];
    if (!in.read(reinterpret_cast<char*>(pair), sizeof pair)) fail(ErrorCode::io, "read_afmap: truncated " + path);
    x = {pair[0], pair[1]};
  }
  return AFMap(std::move(grid), std::move(values));
}

void write_cut_csv(const UCut& cut, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::io, "write_cut_csv: cannot open " + path);
  std::fprintf(f, "u,db\n");
  for (std::size_t i = 0; i < cut.u.size(); ++i) std::fprintf(f, "%.17g,%.17g\n", cut.u[i], cut.db[i]);
  const bool ok = std::fclose(f) == 0;
  if (!ok) fail(ErrorCode::io, "write_cut_csv: write failed for " + path);
}

}  // namespace arrayopt
