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

#include <algorithm>
#include <cmath>
#include <vector>

#include "arrayopt/geometry.hpp"
#include "arrayopt/random.hpp"

namespace arrayopt::testing {

inline double rel_err(double a, double b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

// Relative error with an absolute floor, for gradient components near zero.
inline double grad_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::vector<Point> random_points(Rng& rng, std::size_t n, double half) {
  std::vector<Point> p(n);
  for (auto& q : p) q = {rng.uniform(-half, half), rng.uniform(-half, half)};
  return p;
}

inline ElementLayout random_layout(Rng& rng, std::size_t n, double aperture = 8.0) {
  return ElementLayout({aperture, aperture}, random_points(rng, n, 0.5 * aperture));
}

// Points at least `min_dist` apart, by rejection.
inline std::vector<Point> spaced_points(Rng& rng, std::size_t n, double half, double min_dist) {
  std::vector<Point> p;
  while (p.size() < n) {
    const Point q{rng.uniform(-half, half), rng.uniform(-half, half)};
    bool ok = true;
    for (const auto& r : p) ok = ok && std::hypot(q.y - r.y, q.z - r.z) >= min_dist;
    if (ok) p.push_back(q);
  }
  return p;
}

inline ElementLayout uniform_grid(int ny, int nz, double d) {
  std::vector<Point> p;
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < ny; ++i) p.push_back({(i - 0.5 * (ny - 1)) * d, (j - 0.5 * (nz - 1)) * d});
  return ElementLayout({ny * d + 1.0, nz * d + 1.0}, std::move(p));
}

}  // namespace arrayopt::testing
