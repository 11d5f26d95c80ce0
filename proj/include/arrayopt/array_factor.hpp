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

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arrayopt/geometry.hpp"

namespace arrayopt {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kWaveNumber = 2.0 * kPi;  // lambda = 1

// Uniform odd-sized lattice on [-u_extent, u_extent]^2 with a radial
// main-lobe disc. Sample (iy, iz) sits at (u(iy), u(iz)); flat index is
// iy * n + iz (rows run along u_y).
class UVGrid {
 public:
  UVGrid(double u_extent, int n_samples, double main_lobe_radius);

  // u_extent = 2k, 257 samples, main lobe radius 1.5 * 2*pi / smaller aperture side.
  static UVGrid for_aperture(const Aperture& aperture, double u_extent = 2.0 * kWaveNumber,
                             int n_samples = 257, double ml_factor = 1.5);

  double u_extent() const noexcept { return extent_; }
  int n_samples() const noexcept { return n_; }
  int center() const noexcept { return n_ / 2; }
  double main_lobe_radius() const noexcept { return ml_radius_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

  // Exactly antisymmetric about the center: coord(n-1-i) == -coord(i).
  double coord(int i) const noexcept { return static_cast<double>(i - n_ / 2) * step_; }
  std::span<const double> coords() const noexcept { return coords_; }
  bool in_main_lobe(std::size_t flat) const noexcept { return mask_[flat] != 0; }
  std::size_t main_lobe_count() const noexcept { return ml_count_; }

 private:
  double extent_;
  int n_;
  double ml_radius_;
  double step_;
  std::vector<double> coords_;
  std::vector<std::uint8_t> mask_;
  std::size_t ml_count_ = 0;
};

class AFMap {
 public:
  AFMap(UVGrid grid, std::vector<std::complex<double>> values);

  const UVGrid& grid() const noexcept { return grid_; }
  std::span<const std::complex<double>> values() const noexcept { return values_; }
  const std::complex<double>& at(int iy, int iz) const {
    return values_[static_cast<std::size_t>(iy) * grid_.n_samples() + iz];
  }

 private:
  UVGrid grid_;
  std::vector<std::complex<double>> values_;
};

struct CostParams {
  int p = 4;
};

struct Gradient2 {
  std::vector<double> dy;
  std::vector<double> dz;
};

AFMap evaluate_af(const ElementLayout& layout, const UVGrid& grid);
AFMap evaluate_af(std::span<const Point> elements, const UVGrid& grid);

// -(sum_ML |U|^2p) / (sum_side |U|^2p). Throws ErrorCode::degenerate when the side sum is zero.
double true_cost(const AFMap& af, const CostParams& params = {});

inline double true_cost(const ElementLayout& layout, const UVGrid& grid, const CostParams& params = {}) {
  return true_cost(evaluate_af(layout, grid), params);
}

Gradient2 analytic_cost_grad(std::span<const Point> elements, const UVGrid& grid, const CostParams& params = {});
inline Gradient2 analytic_cost_grad(const ElementLayout& layout, const UVGrid& grid, const CostParams& params = {}) {
  return analytic_cost_grad(layout.elements(), grid, params);
}

Gradient2 finite_diff_cost_grad(std::span<const Point> elements, const UVGrid& grid, const CostParams& params,
                                double h);

enum class CutAxis { u_y, u_z };

struct UCut {
  std::vector<double> u;
  std::vector<double> db;
};

inline constexpr double kDbFloor = -200.0;

UCut u_cut(const AFMap& af, CutAxis axis);

struct SllPeaks {
  std::optional<double> first_db;
  std::optional<double> second_db;
  bool shortfall = false;  // fewer than two side peaks found
};

SllPeaks sll_peaks(std::span<const double> db);

struct Beamwidth {
  double width_u = 0.0;
  double width_deg = 0.0;
};

// Half-power width of the lobe containing the cut's maximum; broadside degree conversion.
Beamwidth beamwidth_3db(const UCut& cut);

// Binary export: 32-byte header then (re, im) float64 pairs in flat grid order.
void write_afmap(const AFMap& af, const std::string& path);
AFMap read_afmap(const std::string& path);
void write_cut_csv(const UCut& cut, const std::string& path);

}  // namespace arrayopt
