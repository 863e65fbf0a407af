// Copyright 2026 The fairfeas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dot-planimeter area estimation over the unit square. A g x g lattice of
// detectors with spacing 1/(g-1) covers [0,1]^2 corner to corner; each
// detector has radius half the spacing. The estimate is the fraction of
// satisfied detectors.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairfeas/error.hpp"
#include "fairfeas/impossibility.hpp"
#include "fairfeas/io.hpp"

namespace fairfeas {

struct DetectorGrid {
  int g = 120;

  explicit DetectorGrid(int detectors_per_side) : g(detectors_per_side) {
    if (g < 3) {
      throw Error(ErrorCode::kBadGrid,
                  "need at least 3 detectors per side, got " + std::to_string(g));
    }
  }

  double spacing() const { return 1.0 / (g - 1); }
  double radius() const { return 0.5 * spacing(); }
  double coord(int i) const { return static_cast<double>(i) / (g - 1); }
  std::int64_t size() const { return std::int64_t{g} * g; }
};

// Smallest lattice size whose coarse over-estimation bound b/g is at most
// `err`, never below 3.
inline int required_grid_size(int critical_points, double err) {
  if (critical_points < 1 || !(err > 0.0 && err < 1.0)) {
    throw Error(ErrorCode::kDomainError, "need b >= 1 and 0 < err < 1");
  }
  const double g = std::ceil(critical_points / err - 1e-9);
  return std::max(3, static_cast<int>(g));
}

// y = eval(x, theta) for every theta in params. Non-finite values mark x
// where a member is undefined.
struct CurveFamily {
  std::function<double(double, std::span<const double>)> eval;
  std::vector<std::vector<double>> params;
};

enum class Fill { kBelow, kAbove, kCurveOnly };

struct PlanimeterEstimate {
  int g = 0;
  std::int64_t satisfied = 0;
  std::int64_t total = 0;
  double fraction = 0.0;
  // Row-major, first row is y = 1 so the image reads like a plot.
  std::vector<std::uint8_t> mask;

  std::string to_pgm() const {
    std::vector<std::uint8_t> px(mask.size());
    std::transform(mask.begin(), mask.end(), px.begin(),
                   [](std::uint8_t m) -> std::uint8_t { return m ? 255 : 0; });
    return encode_pgm(px, g, g);
  }
};

// Area of satisfied detectors counted as discs of radius r. Kept only for
// comparison; discs cover pi/4 of a cell so this underestimates a full square.
inline double circle_sum_area(const PlanimeterEstimate& est) {
  const double r = 0.5 / (est.g - 1);
  return static_cast<double>(est.satisfied) * std::numbers::pi * r * r;
}

// Same as estimate_area but with an explicit detector radius in place of half
// the spacing. The radius must not exceed the spacing.
inline PlanimeterEstimate estimate_area_with_radius(
    const DetectorGrid& grid, const CurveFamily& fam, Fill fill, double r,
    std::optional<double> sample_step = std::nullopt) {
  const double eps = grid.spacing();
  if (!(r > 0.0 && r <= eps)) {
    throw Error(ErrorCode::kDomainError, "detector radius must lie in (0, spacing]");
  }
  const double step = sample_step.value_or(eps / 4.0);
  if (!(step > 0.0) || step > r) {
    throw Error(ErrorCode::kBadSampleStep,
                "sample step must lie in (0, r] with r = " + std::to_string(r));
  }
  const int g = grid.g;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(g) * g, 0);  // [i*g + j], x=i, y=j
  const double r2 = r * r * (1.0 + 1e-12);

  const auto samples = static_cast<std::int64_t>(std::ceil(1.0 / step - 1e-9)) + 1;
  for (const auto& theta : fam.params) {
    for (std::int64_t s = 0; s < samples; ++s) {
      const double x = static_cast<double>(s) / static_cast<double>(samples - 1);
      const double y = fam.eval(x, theta);
      if (!std::isfinite(y) || y < 0.0 || y > 1.0) continue;
      const int i0 = static_cast<int>(std::floor(x / eps));
      const int j0 = static_cast<int>(std::floor(y / eps));
      for (int i = std::max(0, i0 - 1); i <= std::min(g - 1, i0 + 2); ++i) {
        for (int j = std::max(0, j0 - 1); j <= std::min(g - 1, j0 + 2); ++j) {
          const double dx = grid.coord(i) - x;
          const double dy = grid.coord(j) - y;
          if (dx * dx + dy * dy <= r2) hit[static_cast<std::size_t>(i) * g + j] = 1;
        }
      }
    }
  }

  if (fill != Fill::kCurveOnly) {
    const bool below = fill == Fill::kBelow;
    for (int i = 0; i < g; ++i) {
      const double x = grid.coord(i);
      double edge = below ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
      for (const auto& theta : fam.params) {
        const double y = fam.eval(x, theta);
        if (!std::isfinite(y)) continue;
        edge = below ? std::max(edge, y) : std::min(edge, y);
      }
      for (int j = 0; j < g; ++j) {
        const double y = grid.coord(j);
        if (below ? y <= edge : y >= edge) hit[static_cast<std::size_t>(i) * g + j] = 1;
      }
    }
  }

  PlanimeterEstimate est;
  est.g = g;
  est.total = grid.size();
  est.mask.assign(hit.size(), 0);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const std::uint8_t h = hit[static_cast<std::size_t>(i) * g + j];
      est.satisfied += h;
      est.mask[static_cast<std::size_t>(g - 1 - j) * g + i] = h;
    }
  }
  est.fraction = static_cast<double>(est.satisfied) / static_cast<double>(est.total);
  return est;
}

inline PlanimeterEstimate estimate_area(const DetectorGrid& grid, const CurveFamily& fam,
                                        Fill fill,
                                        std::optional<double> sample_step = std::nullopt) {
  return estimate_area_with_radius(grid, fam, fill, grid.radius(), sample_step);
}

inline CurveFamily line_family(double slope, double intercept) {
  return {[](double x, std::span<const double> t) { return t[0] * x + t[1]; },
          {{slope, intercept}}};
}

inline CurveFamily constant_family(double c) { return line_family(0.0, c); }

// FPR = FNR + c for c swept over [-c_max, c_max] finely enough (step at most
// half the detector spacing) that the lines tile the band.
inline CurveFamily acc_band_family(const RegionSpec& spec, const DetectorGrid& grid) {
  const double c = std::min(offset_bounds(spec).c_max, 1.0);
  const double step = grid.spacing() / 2.0;
  const int count = static_cast<int>(std::ceil(2.0 * c / step)) + 1;
  CurveFamily fam;
  fam.eval = [](double x, std::span<const double> t) { return x + t[0]; };
  for (int i = 0; i < count; ++i) {
    fam.params.push_back({-c + 2.0 * c * i / (count - 1)});
  }
  return fam;
}

// Group-1 FNR as a function of group-1 PPV (x axis) for every tolerance
// tuple (eps_fpr, eps_fnr, eps_v) on a `steps`^3 grid over [-gamma, gamma].
// Points where the balance is singular or out of domain are skipped.
inline CurveFamily ppv_region_family(double p, double eps_p, double gamma, int steps) {
  if (steps < 1) throw Error(ErrorCode::kDomainError, "steps must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kDomainError, "gamma must lie in [0, 1)");
  }
  CurveFamily fam;
  fam.eval = [p, eps_p](double x, std::span<const double> t) {
    PpvRelaxation r{t[0], t[1], t[2], eps_p, p, x};
    try {
      return relaxed_fnr_ppv(r);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const auto value = [&](int i) {
    return steps == 1 ? 0.0 : -gamma + 2.0 * gamma * i / (steps - 1);
  };
  for (int a = 0; a < steps; ++a) {
    for (int b = 0; b < steps; ++b) {
      for (int c = 0; c < steps; ++c) fam.params.push_back({value(a), value(b), value(c)});
    }
  }
  return fam;
}

}  // namespace fairfeas
