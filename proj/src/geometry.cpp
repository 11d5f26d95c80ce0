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

#include "arrayopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "arrayopt/error.hpp"
#include "arrayopt/random.hpp"

namespace arrayopt {

namespace {

bool finite(const Point& p) { return std::isfinite(p.y) && std::isfinite(p.z); }

Aperture enclosing_aperture(std::span<const Rect> rects) {
  double hy = 0.0, hz = 0.0;
  for (const auto& r : rects) {
    hy = std::max({hy, std::abs(r.y_min), std::abs(r.y_max)});
    hz = std::max({hz, std::abs(r.z_min), std::abs(r.z_max)});
  }
  return Aperture{2.0 * hy, 2.0 * hz};
}

bool overlaps(const Rect& a, const Rect& b) {
  return a.y_min < b.y_max && b.y_min < a.y_max && a.z_min < b.z_max && b.z_min < a.z_max;
}

}  // namespace

ElementLayout::ElementLayout(Aperture aperture, std::vector<Point> elements)
    : aperture_(aperture), elements_(std::move(elements)) {
  require(aperture_.width_y > 0.0 && aperture_.height_z > 0.0 && std::isfinite(aperture_.width_y) &&
              std::isfinite(aperture_.height_z),
          "ElementLayout: aperture dimensions must be positive and finite");
  require(elements_.size() <= max_elements,
          "ElementLayout: " + std::to_string(elements_.size()) + " elements exceeds the cap of " +
              std::to_string(max_elements));
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    require(finite(elements_[i]), "ElementLayout: element " + std::to_string(i) + " is not finite");
    require(aperture_.contains(elements_[i]),
            "ElementLayout: element " + std::to_string(i) + " lies outside the aperture");
  }
}

void ElementLayout::validate() const {
  require(!elements_.empty(), "ElementLayout: layout has no elements");
}

void SubArraySpec::validate() const {
  require(period_y > 0.0 && period_z > 0.0, "SubArraySpec: periods must be positive");
  require(!subdomain.degenerate(), "SubArraySpec: subdomain is degenerate");
  require(rotation >= 0.0 && rotation < 0.5 * M_PI, "SubArraySpec: rotation must lie in [0, pi/2)");
  require(std::isfinite(offset.y) && std::isfinite(offset.z), "SubArraySpec: offset is not finite");
}

std::vector<Rect> uniform_partition(const Aperture& aperture, int ny, int nz) {
  require(ny >= 1 && nz >= 1, "uniform_partition: partition counts must be >= 1");
  const double y0 = -0.5 * aperture.width_y, z0 = -0.5 * aperture.height_z;
  const double wy = aperture.width_y / ny, wz = aperture.height_z / nz;
  std::vector<Rect> out;
  out.reserve(static_cast<std::size_t>(ny) * nz);
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < ny; ++i) {
      // Outer edges pinned to the aperture so rounding never pushes a cell outside.
      Rect r{y0 + i * wy, y0 + (i + 1) * wy, z0 + j * wz, z0 + (j + 1) * wz};
      if (i == 0) r.y_min = y0;
      if (i == ny - 1) r.y_max = 0.5 * aperture.width_y;
      if (j == 0) r.z_min = z0;
      if (j == nz - 1) r.z_max = 0.5 * aperture.height_z;
      out.push_back(r);
    }
  }
  return out;
}

std::vector<Rect> GenerationConfig::resolved_subdomains() const {
  return subdomains.empty() ? uniform_partition(aperture, partition_y, partition_z) : subdomains;
}

void GenerationConfig::validate() const {
  require(aperture.width_y > 0.0 && aperture.height_z > 0.0, "GenerationConfig: aperture must be positive");
  require(period.lo > 0.0 && period.hi >= period.lo, "GenerationConfig: period range must be non-empty and positive");
  require(rotation.lo >= 0.0 && rotation.hi >= rotation.lo && rotation.hi <= 0.5 * M_PI,
          "GenerationConfig: rotation range must be a non-empty subset of [0, pi/2]");
  require(offset_periods >= 0.0, "GenerationConfig: offset range must be non-negative");
  require(seam_min_distance >= 0.0, "GenerationConfig: seam_min_distance must be >= 0");
  const auto rects = resolved_subdomains();
  require(!rects.empty(), "GenerationConfig: no subdomains");
  const double hy = 0.5 * aperture.width_y, hz = 0.5 * aperture.height_z;
  double area = 0.0;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const auto& r = rects[i];
    require(!r.degenerate(), "GenerationConfig: subdomain " + std::to_string(i) + " is degenerate");
    require(r.y_min >= -hy && r.y_max <= hy && r.z_min >= -hz && r.z_max <= hz,
            "GenerationConfig: subdomain " + std::to_string(i) + " leaves the aperture");
    for (std::size_t j = 0; j < i; ++j)
      require(!overlaps(r, rects[j]), "GenerationConfig: subdomains " + std::to_string(j) + " and " +
                                          std::to_string(i) + " overlap");
    area += r.width() * r.height();
  }
  const double full = aperture.width_y * aperture.height_z;
  require(std::abs(area - full) <= 1e-9 * full, "GenerationConfig: subdomains do not tile the aperture");
}

std::vector<Point> lattice_points(const SubArraySpec& spec) {
  spec.validate();
  const Rect& sd = spec.subdomain;
  // The lattice patch reaches one subdomain diagonal plus one lattice cell
  // diagonal from its anchor: an anchor inside the subdomain or within a
  // cell of it covers the whole subdomain, an anchor far outside reaches
  // nothing.
  const double reach = std::hypot(sd.width(), sd.height()) + std::hypot(spec.period_y, spec.period_z);
  const auto m_max = static_cast<long>(std::ceil(reach / spec.period_y));
  const auto n_max = static_cast<long>(std::ceil(reach / spec.period_z));
  const double c = std::cos(spec.rotation), s = std::sin(spec.rotation);

  std::vector<Point> out;
  for (long m = -m_max; m <= m_max; ++m) {
    for (long n = -n_max; n <= n_max; ++n) {
      const double a = static_cast<double>(m) * spec.period_y;
      const double b = static_cast<double>(n) * spec.period_z;
      const Point p{c * a - s * b + spec.offset.y, s * a + c * b + spec.offset.z};
      if (sd.contains(p)) out.push_back(p);
    }
  }
  sort_canonical(out);
  return out;
}

std::optional<ElementLayout> generate_subarray(const SubArraySpec& spec) {
  auto pts = lattice_points(spec);
  if (pts.empty()) return std::nullopt;
  const Rect rects[] = {spec.subdomain};
  return ElementLayout(enclosing_aperture(rects), std::move(pts));
}

ElementLayout compose_array(std::span<const SubArraySpec> specs, double seam_min_distance) {
  std::vector<Rect> rects;
  for (const auto& s : specs) rects.push_back(s.subdomain);
  return compose_array(specs, seam_min_distance, enclosing_aperture(rects));
}

ElementLayout compose_array(std::span<const SubArraySpec> specs, double seam_min_distance,
                            const Aperture& aperture) {
  require(seam_min_distance >= 0.0, "compose_array: seam_min_distance must be >= 0");
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      require(!overlaps(specs[i].subdomain, specs[j].subdomain),
              "compose_array: subdomains " + std::to_string(j) + " and " + std::to_string(i) + " overlap");

  const double seam2 = seam_min_distance * seam_min_distance;
  std::vector<Point> kept;
  for (const auto& spec : specs) {
    const auto pts = lattice_points(spec);
    const std::size_t earlier = kept.size();
    for (const auto& p : pts) {
      bool clash = false;
      for (std::size_t i = 0; i < earlier && !clash; ++i) {
        const double dy = p.y - kept[i].y, dz = p.z - kept[i].z;
        clash = dy * dy + dz * dz < seam2;
      }
      if (!clash) kept.push_back(p);
    }
  }
  if (kept.empty()) fail(ErrorCode::degenerate, "compose_array: no element survived composition");
  sort_canonical(kept);
  if (kept.size() > ElementLayout::max_elements) kept.resize(ElementLayout::max_elements);
  return ElementLayout(aperture, std::move(kept));
}

std::vector<SubArraySpec> draw_subarrays(const GenerationConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SubArraySpec> specs;
  for (const auto& r : config.resolved_subdomains()) {
    SubArraySpec s;
    s.subdomain = r;
    s.period_y = rng.uniform(config.period.lo, config.period.hi);
    s.period_z = rng.uniform(config.period.lo, config.period.hi);
    s.rotation = rng.uniform(config.rotation.lo, config.rotation.hi);
    if (s.rotation >= 0.5 * M_PI) s.rotation = 0.0;  // pi/2 is the same lattice as 0
    s.offset = Point{r.y_min + rng.uniform(0.0, config.offset_periods * s.period_y),
                     r.z_min + rng.uniform(0.0, config.offset_periods * s.period_z)};
    specs.push_back(s);
  }
  return specs;
}

double min_pairwise_distance(std::span<const Point> points) {
  require(points.size() >= 2, "min_pairwise_distance: need at least two elements");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dy = points[i].y - points[j].y, dz = points[i].z - points[j].z;
      best = std::min(best, dy * dy + dz * dz);
    }
  }
  // sqrt is correctly rounded and monotone, so this equals the minimum of the
  // per-pair distances bit for bit.
  return std::sqrt(best);
}

void sort_canonical(std::vector<Point>& points) {
  std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.z < b.z || (a.z == b.z && a.y < b.y);
  });
}

ElementLayout canonical_order(const ElementLayout& layout) {
  std::vector<Point> pts(layout.elements().begin(), layout.elements().end());
  sort_canonical(pts);
  return ElementLayout(layout.aperture(), std::move(pts));
}

PaddedInput pad_to_fixed(const ElementLayout& layout, std::size_t n_max) {
  require(!layout.empty(), "pad_to_fixed: layout is empty");
  require(layout.size() <= n_max, "pad_to_fixed: " + std::to_string(layout.size()) +
                                      " elements do not fit in " + std::to_string(n_max) + " slots");
  std::vector<Point> pts(layout.elements().begin(), layout.elements().end());
  sort_canonical(pts);
  PaddedInput out{std::vector<double>(2 * n_max, 0.0), std::vector<std::uint8_t>(n_max, 0)};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.coords[2 * i] = pts[i].y;
    out.coords[2 * i + 1] = pts[i].z;
    out.mask[i] = 1;
  }
  return out;
}

}  // namespace arrayopt
