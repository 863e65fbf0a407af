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

// Discretized feasible-region enumeration for FPR (alpha), FNR (beta) and
// PPV (v) at a fixed group prevalence, and joint counting of model pairs for
// two groups whose metrics differ by at most a tolerance.
//
// Every metric is an integer index in [0, N] standing for idx / N. A triple
// is feasible at prevalence index p when the integer identity
//     alpha * v * (N - p) == p * (N - v) * (N - beta)
// holds, i.e. FPR = p/(1-p) * (1-PPV)/PPV * (1-FNR) exactly at index
// resolution.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairfeas/error.hpp"
#include "fairfeas/io.hpp"
#include "fairfeas/parallel.hpp"
#include "fairfeas/prefix_sum3d.hpp"

namespace fairfeas {

struct IndexRange {
  int lo = 0;
  int hi = -1;

  constexpr bool empty() const { return hi < lo; }
  constexpr bool contains(int i) const { return lo <= i && i <= hi; }
  constexpr int size() const { return empty() ? 0 : hi - lo + 1; }
  friend constexpr bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct Discretization {
  int n = 100;
  IndexRange alpha{0, 100};
  IndexRange beta{0, 99};
  IndexRange v{0, 99};

  // alpha over [0, N]; beta and v over [0, floor(0.99 N)].
  static Discretization with_defaults(int n) {
    const int cap = static_cast<int>(std::floor(0.99 * n + 1e-9));
    return {n, {0, n}, {0, cap}, {0, cap}};
  }

  void validate() const {
    if (n < 2) throw Error(ErrorCode::kDomainError, "N must be at least 2");
    for (const IndexRange* r : {&alpha, &beta, &v}) {
      if (!r->empty() && (r->lo < 0 || r->hi > n)) {
        throw Error(ErrorCode::kDomainError, "index ranges must lie in [0, N]");
      }
    }
  }
};

struct FeasibleTriple {
  int alpha = 0;
  int beta = 0;
  int v = 0;

  friend constexpr auto operator<=>(const FeasibleTriple&,
                                    const FeasibleTriple&) = default;
};

struct FeasibleTripleSet {
  int p_idx = 0;
  int n = 0;
  std::vector<FeasibleTriple> triples;  // sorted by (alpha, beta, v)

  std::size_t size() const { return triples.size(); }

  // Occupancy grid over [0, N]^3 with its summed-volume table.
  PrefixSum3D build_occupancy() const {
    PrefixSum3D table(n + 1, n + 1, n + 1);
    for (const auto& t : triples) table.add(t.alpha, t.beta, t.v);
    table.build();
    return table;
  }

  // Subset whose PPV index lies in `window`.
  FeasibleTripleSet restrict_v(const IndexRange& window) const {
    FeasibleTripleSet out{p_idx, n, {}};
    for (const auto& t : triples) {
      if (window.contains(t.v)) out.triples.push_back(t);
    }
    return out;
  }
};

// Integer identity at prevalence index p. v = 0 (d = 0) is feasible only
// when the left side vanishes as well.
inline bool satisfies_identity(int n, int p_idx, const FeasibleTriple& t) {
  const std::int64_t m = std::int64_t{p_idx} * (n - t.v);
  const std::int64_t lhs = m * (n - t.beta);
  const std::int64_t d = std::int64_t{t.v} * (n - p_idx);
  return lhs == std::int64_t{t.alpha} * d;
}

inline FeasibleTripleSet enumerate_triples(int p_idx, const Discretization& disc) {
  disc.validate();
  const int n = disc.n;
  if (p_idx <= 0 || p_idx >= n) {
    throw Error(ErrorCode::kBadPrevalence,
                "prevalence index must lie in [1, N-1], got " + std::to_string(p_idx));
  }
  FeasibleTripleSet set{p_idx, n, {}};
  for (int beta = disc.beta.lo; beta <= disc.beta.hi; ++beta) {
    for (int v = disc.v.lo; v <= disc.v.hi; ++v) {
      const std::int64_t m = std::int64_t{p_idx} * (n - v);
      const std::int64_t num = m * (n - beta);
      const std::int64_t d = std::int64_t{v} * (n - p_idx);
      if (d == 0) {
        if (num != 0) continue;
        for (int a = disc.alpha.lo; a <= disc.alpha.hi; ++a) {
          set.triples.push_back({a, beta, v});
        }
        continue;
      }
      if (num % d != 0) continue;
      const std::int64_t a = num / d;
      if (a >= disc.alpha.lo && a <= disc.alpha.hi) {
        set.triples.push_back({static_cast<int>(a), beta, v});
      }
    }
  }
  std::sort(set.triples.begin(), set.triples.end());
  return set;
}

// Half-widths of the tolerance box, one per metric, in index units.
struct EpsilonBox {
  int alpha = 0;
  int beta = 0;
  int v = 0;
};

struct JointCountQuery {
  int p1_idx = 0;
  int p2_idx = 0;
  int eps_max_idx = 0;  // shared bound on |d alpha|, |d beta|, |d v|
  std::optional<EpsilonBox> per_metric;  // overrides eps_max_idx when set
  bool strict = false;  // |d| < eps instead of |d| <= eps

  EpsilonBox effective_box() const {
    EpsilonBox b = per_metric.value_or(EpsilonBox{eps_max_idx, eps_max_idx, eps_max_idx});
    if (strict) {
      --b.alpha;
      --b.beta;
      --b.v;
    }
    return b;
  }
};

namespace detail {

inline std::uint64_t count_against(std::span<const FeasibleTriple> lhs,
                                   const PrefixSum3D& rhs, const EpsilonBox& box) {
  if (box.alpha < 0 || box.beta < 0 || box.v < 0) return 0;
  std::uint64_t total = 0;
  for (const auto& t : lhs) {
    total += rhs.box(t.alpha - box.alpha, t.alpha + box.alpha, t.beta - box.beta,
                     t.beta + box.beta, t.v - box.v, t.v + box.v);
  }
  return total;
}

}  // namespace detail

// Number of (t1, t2) pairs from the two sets whose metrics differ by at most
// the query tolerance on every axis.
inline std::uint64_t count_joint(const JointCountQuery& q, const FeasibleTripleSet& s1,
                                 const FeasibleTripleSet& s2,
                                 const Discretization& disc) {
  if (s1.p_idx != q.p1_idx || s2.p_idx != q.p2_idx || s1.n != disc.n ||
      s2.n != disc.n) {
    throw Error(ErrorCode::kMismatchedSets,
                "triple sets do not match the query prevalences or N");
  }
  if (q.eps_max_idx < 0 || q.eps_max_idx > disc.n) {
    throw Error(ErrorCode::kDomainError, "eps_max_idx must lie in [0, N]");
  }
  return detail::count_against(s1.triples, s2.build_occupancy(), q.effective_box());
}

struct HeatmapOptions {
  double eps_max = 0.0;
  double p_grid_step = 0.01;
  std::optional<IndexRange> ppv_window;
  bool strict = false;
  std::optional<EpsilonBox> per_metric;
};

struct PrevalenceHeatmap {
  int n = 0;
  std::vector<int> p_idx;             // grid, ascending
  std::vector<std::uint64_t> counts;  // row = p1, column = p2
  std::uint64_t total = 0;

  std::size_t dim() const { return p_idx.size(); }
  std::uint64_t at(std::size_t row, std::size_t col) const {
    return counts[row * dim() + col];
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t r = 0; r < dim(); ++r) {
      for (std::size_t c = 0; c < dim(); ++c) {
        if (c) out += ',';
        out += std::to_string(at(r, c));
      }
      out += '\n';
    }
    return out;
  }

  // log(1 + count) scaled so the largest cell is 255.
  std::string to_pgm() const {
    std::uint64_t peak = 0;
    for (auto c : counts) peak = std::max(peak, c);
    std::vector<std::uint8_t> px(counts.size(), 0);
    if (peak > 0) {
      const double scale = 255.0 / std::log1p(static_cast<double>(peak));
      for (std::size_t i = 0; i < counts.size(); ++i) {
        px[i] = static_cast<std::uint8_t>(
            std::lround(std::log1p(static_cast<double>(counts[i])) * scale));
      }
    }
    return encode_pgm(px, static_cast<int>(dim()), static_cast<int>(dim()));
  }
};

// Prevalence indices step, 2*step, ... up to N-1, with step = round(step*N).
inline std::vector<int> prevalence_grid(int n, double step) {
  const int s = static_cast<int>(std::lround(step * n));
  if (!(step > 0.0) || s < 1) {
    throw Error(ErrorCode::kDomainError, "prevalence grid step must be at least 1/N");
  }
  std::vector<int> grid;
  for (int p = s; p <= n - 1; p += s) grid.push_back(p);
  return grid;
}

inline int eps_to_index(double eps, int n) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "eps_max must lie in [0, 1]");
  }
  return static_cast<int>(std::lround(eps * n));
}

namespace detail {

inline std::vector<FeasibleTripleSet> enumerate_grid(const Discretization& disc,
                                                     std::span<const int> grid) {
  std::vector<FeasibleTripleSet> sets(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    sets[i] = enumerate_triples(grid[i], disc);
  });
  return sets;
}

inline PrevalenceHeatmap heatmap_from_sets(const Discretization& disc,
                                           std::span<const int> grid,
                                           std::span<const FeasibleTripleSet> all,
                                           const HeatmapOptions& opts) {
  std::vector<FeasibleTripleSet> sets(all.begin(), all.end());
  if (opts.ppv_window) {
    for (auto& s : sets) s = s.restrict_v(*opts.ppv_window);
  }
  JointCountQuery proto;
  proto.eps_max_idx = eps_to_index(opts.eps_max, disc.n);
  proto.per_metric = opts.per_metric;
  proto.strict = opts.strict;
  const EpsilonBox box = proto.effective_box();

  PrevalenceHeatmap hm;
  hm.n = disc.n;
  hm.p_idx.assign(grid.begin(), grid.end());
  const std::size_t dim = grid.size();
  hm.counts.assign(dim * dim, 0);
  // One occupancy table per column, shared by every row.
  parallel_for(dim, [&](std::size_t col) {
    const PrefixSum3D table = sets[col].build_occupancy();
    for (std::size_t row = 0; row < dim; ++row) {
      hm.counts[row * dim + col] = count_against(sets[row].triples, table, box);
    }
  });
  for (auto c : hm.counts) hm.total += c;
  return hm;
}

}  // namespace detail

inline PrevalenceHeatmap heatmap(const Discretization& disc, const HeatmapOptions& opts) {
  disc.validate();
  const auto grid = prevalence_grid(disc.n, opts.p_grid_step);
  const auto sets = detail::enumerate_grid(disc, grid);
  return detail::heatmap_from_sets(disc, grid, sets, opts);
}

// Quarters of [0, 1) in PPV index space, the last one ending at the default
// v cap floor(0.99 N). At N = 100: [0,24], [25,49], [50,74], [75,99].
inline std::vector<IndexRange> default_ppv_bins(int n) {
  const auto edge = [n](int q) { return static_cast<int>(std::lround(0.25 * q * n)); };
  const int cap = static_cast<int>(std::floor(0.99 * n + 1e-9));
  return {{edge(0), edge(1) - 1}, {edge(1), edge(2) - 1}, {edge(2), edge(3) - 1}, {edge(3), cap}};
}

// Heatmap total restricted to each PPV window (both groups' v inside it).
inline std::vector<std::uint64_t> ppv_binned_counts(const Discretization& disc,
                                                    HeatmapOptions opts,
                                                    std::span<const IndexRange> bins) {
  disc.validate();
  std::vector<IndexRange> sorted;
  for (const auto& b : bins) {
    if (b.empty()) continue;
    if (b.lo < disc.v.lo || b.hi > disc.v.hi) {
      throw Error(ErrorCode::kDomainError, "PPV bins must lie within the v range");
    }
    sorted.push_back(b);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const IndexRange& a, const IndexRange& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].lo <= sorted[i - 1].hi) {
      throw Error(ErrorCode::kOverlappingBins, "PPV bins must be disjoint");
    }
  }
  const auto grid = prevalence_grid(disc.n, opts.p_grid_step);
  const auto sets = detail::enumerate_grid(disc, grid);
  std::vector<std::uint64_t> totals;
  totals.reserve(bins.size());
  for (const auto& b : bins) {
    if (b.empty()) {
      totals.push_back(0);
      continue;
    }
    opts.ppv_window = b;
    totals.push_back(detail::heatmap_from_sets(disc, grid, sets, opts).total);
  }
  return totals;
}

}  // namespace fairfeas
