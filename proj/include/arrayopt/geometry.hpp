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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace arrayopt {

// All lengths are in wavelengths (lambda = 1, k = 2*pi).

struct Point {
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Rectangle centered at the origin.
struct Aperture {
  double width_y = 16.0;
  double height_z = 16.0;

  bool contains(const Point& p) const noexcept {
    return p.y >= -0.5 * width_y && p.y <= 0.5 * width_y && p.z >= -0.5 * height_z &&
           p.z <= 0.5 * height_z;
  }
  double smaller_side() const noexcept { return width_y < height_z ? width_y : height_z; }
  friend bool operator==(const Aperture&, const Aperture&) = default;
};

struct Rect {
  double y_min = 0.0;
  double y_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;

  bool contains(const Point& p) const noexcept {
    return p.y >= y_min && p.y <= y_max && p.z >= z_min && p.z <= z_max;
  }
  double width() const noexcept { return y_max - y_min; }
  double height() const noexcept { return z_max - z_min; }
  bool degenerate() const noexcept { return !(y_max > y_min) || !(z_max > z_min); }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Ordered element coordinates plus the aperture they live in.
//
// Construction enforces finiteness, aperture containment and the
// max_elements cap. An empty layout is representable (it is what the
// operations that reject empty input get handed); validate() additionally
// requires at least one element, which is what file loaders call.
class ElementLayout {
 public:
  static constexpr std::size_t max_elements = 1024;

  ElementLayout() = default;
  ElementLayout(Aperture aperture, std::vector<Point> elements);

  std::span<const Point> elements() const noexcept { return elements_; }
  const Point& operator[](std::size_t i) const { return elements_[i]; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }
  const Aperture& aperture() const noexcept { return aperture_; }

  void validate() const;

  friend bool operator==(const ElementLayout&, const ElementLayout&) = default;

 private:
  Aperture aperture_{};
  std::vector<Point> elements_;
};

struct SubArraySpec {
  Rect subdomain{};
  double period_y = 0.5;
  double period_z = 0.5;
  double rotation = 0.0;  // radians, [0, pi/2)
  Point offset{};         // absolute lattice anchor

  void validate() const;
  friend bool operator==(const SubArraySpec&, const SubArraySpec&) = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct GenerationConfig {
  Aperture aperture{16.0, 16.0};
  std::vector<Rect> subdomains;      // empty => uniform partition_y x partition_z grid
  int partition_y = 2;
  int partition_z = 2;
  Range period{0.5, 1.0};            // per-axis period draw range
  Range rotation{0.0, 1.5707963267948966};
  double offset_periods = 1.0;       // offset drawn in [0, offset_periods * period) from the subdomain corner
  double seam_min_distance = 0.5;
  std::uint64_t rng_seed = 1;

  // Subdomains actually used (explicit list or the uniform partition).
  std::vector<Rect> resolved_subdomains() const;
  void validate() const;
};

std::vector<Rect> uniform_partition(const Aperture& aperture, int ny, int nz);

// Raw lattice points of one sub-array, in canonical order, uncapped.
std::vector<Point> lattice_points(const SubArraySpec& spec);

// nullopt when no lattice point lands inside the subdomain.
std::optional<ElementLayout> generate_subarray(const SubArraySpec& spec);

// Union of sub-array lattices with the drop-later seam rule; canonical order,
// capped at ElementLayout::max_elements. Throws when the result is empty.
ElementLayout compose_array(std::span<const SubArraySpec> specs, double seam_min_distance);
ElementLayout compose_array(std::span<const SubArraySpec> specs, double seam_min_distance,
                            const Aperture& aperture);

// Draws one set of sub-array parameters from the configured ranges.
std::vector<SubArraySpec> draw_subarrays(const GenerationConfig& config, std::uint64_t seed);

double min_pairwise_distance(std::span<const Point> points);
inline double min_pairwise_distance(const ElementLayout& layout) {
  return min_pairwise_distance(layout.elements());
}

// Lexicographic (z, then y), stable.
ElementLayout canonical_order(const ElementLayout& layout);
void sort_canonical(std::vector<Point>& points);

struct PaddedInput {
  std::vector<double> coords;        // 2 * n_max, interleaved (y, z)
  std::vector<std::uint8_t> mask;    // n_max, 1 = real element
};

PaddedInput pad_to_fixed(const ElementLayout& layout, std::size_t n_max = ElementLayout::max_elements);

}  // namespace arrayopt
