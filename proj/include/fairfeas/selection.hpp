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

// Exact top-k selection under a precision cap and disparity-ratio bounds on
// FPR, FNR and PPV, solved over per-group counts.
//
// The objective (true positives in the list) and every constraint depend on a
// selection only through how many positives t_j and negatives f_j it takes
// from each group j, and any counts with 0 <= t_j <= P_j, 0 <= f_j <= N_j are
// realizable by some item subset. Searching over (t_j, f_j) is therefore
// exact. The search fixes the reference group's counts first; every other
// group's constraints then reduce to an interval of admissible t_j for each
// list share s_j = t_j + f_j.
//
// Ratio constraints lb * M_ref <= M_j <= ub * M_ref are evaluated in exact
// integer arithmetic. A constraint is skipped when M_j or M_ref is undefined
// (empty denominator); when M_ref = 0 a finite ub forces M_j = 0.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairfeas/dataset.hpp"
#include "fairfeas/error.hpp"
#include "fairfeas/metrics.hpp"
#include "fairfeas/parallel.hpp"

namespace fairfeas {

inline constexpr std::size_t kMaxSelectionGroups = 8;

struct SelectionGroup {
  std::string key;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;

  std::int64_t size() const { return positives + negatives; }
};

struct SelectionInstance {
  std::vector<SelectionGroup> groups;
  std::int64_t k = 1;
  double ppv_cap = 0.7;
  double lb = 0.8;
  double ub = 1.2;  // +infinity disables the upper bound
  std::optional<std::string> reference_group;  // default: largest group

  std::int64_t total_positives() const {
    std::int64_t s = 0;
    for (const auto& g : groups) s += g.positives;
    return s;
  }
  std::int64_t total_negatives() const {
    std::int64_t s = 0;
    for (const auto& g : groups) s += g.negatives;
    return s;
  }
};

struct GroupAllocation {
  std::vector<std::int64_t> tp;  // selected positives per group
  std::vector<std::int64_t> fp;  // selected negatives per group
};

enum class SelectionStatus { kOptimal, kInfeasible };

struct GroupSelectionMetrics {
  std::string key;
  Rate fpr;
  Rate fnr;
  Rate ppv;
  // M_j / M_ref; absent when either side is undefined or M_ref = 0.
  std::optional<double> fpr_disparity;
  std::optional<double> fnr_disparity;
  std::optional<double> ppv_disparity;
};

struct SelectionResult {
  SelectionStatus status = SelectionStatus::kInfeasible;
  GroupAllocation allocation;
  std::int64_t tp_total = 0;
  double list_ppv = 0.0;
  Rate recall;
  std::size_t reference = 0;
  std::vector<GroupSelectionMetrics> groups;
};

// Non-negative rational with a fixed denominator of 1e9, or +infinity.
struct BoundRatio {
  static constexpr std::int64_t kDen = 1'000'000'000;
  std::int64_t num = 0;
  bool infinite = false;

  static BoundRatio from(double x) {
    if (std::isinf(x) && x > 0) return {0, true};
    if (!(x >= 0.0) || !std::isfinite(x) || x > 1e9) {
      throw Error(ErrorCode::kDomainError, "ratio bounds must be finite and non-negative");
    }
    return {std::llround(x * static_cast<double>(kDen)), false};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(kDen); }
};

namespace detail {

using i128 = __int128;

inline std::int64_t floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<std::int64_t>(q);
}

inline std::int64_t ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

inline void validate(const SelectionInstance& inst) {
  if (inst.groups.empty()) throw Error(ErrorCode::kDomainError, "no groups");
  for (std::size_t i = 0; i < inst.groups.size(); ++i) {
    const auto& g = inst.groups[i];
    if (g.positives < 0 || g.negatives < 0 || g.size() == 0) {
      throw Error(ErrorCode::kDomainError, "group '" + g.key + "' must be non-empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (inst.groups[j].key == g.key) {
        throw Error(ErrorCode::kDomainError, "duplicate group key '" + g.key + "'");
      }
    }
  }
  if (inst.k < 1) throw Error(ErrorCode::kKOutOfRange, "k must be positive");
  if (!(inst.ppv_cap > 0.0 && inst.ppv_cap <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "ppv_cap must lie in (0, 1]");
  }
  if (!(inst.lb >= 0.0 && inst.lb <= 1.0 && inst.ub >= 1.0)) {
    throw Error(ErrorCode::kDomainError, "disparity bounds need 0 <= lb <= 1 <= ub");
  }
}

// max t with t <= cap * k, exactly.
inline std::int64_t cap_tp(const SelectionInstance& inst) {
  const auto cap = BoundRatio::from(inst.ppv_cap);
  return floor_div(static_cast<i128>(cap.num) * inst.k, BoundRatio::kDen);
}

inline std::optional<std::int64_t> unconstrained_optimum(const SelectionInstance& inst) {
  const std::int64_t P = inst.total_positives();
  const std::int64_t N = inst.total_negatives();
  if (inst.k > P + N) return std::nullopt;
  const std::int64_t t = std::min({P, cap_tp(inst), inst.k});
  if (inst.k - t > N) return std::nullopt;
  return t;
}

// lb * a/b <= c/d <= ub * a/b, skipped when b == 0 or d == 0.
inline bool ratio_ok(std::int64_t c, std::int64_t d, std::int64_t a, std::int64_t b,
                     const BoundRatio& lb, const BoundRatio& ub) {
  if (b == 0 || d == 0) return true;
  const i128 lhs = static_cast<i128>(c) * b * BoundRatio::kDen;
  if (lhs < static_cast<i128>(lb.num) * a * d) return false;
  if (!ub.infinite && lhs > static_cast<i128>(ub.num) * a * d) return false;
  return true;
}

}  // namespace detail

inline std::size_t reference_index(const SelectionInstance& inst) {
  if (inst.reference_group) {
    for (std::size_t i = 0; i < inst.groups.size(); ++i) {
      if (inst.groups[i].key == *inst.reference_group) return i;
    }
    throw Error(ErrorCode::kDomainError, "unknown reference group '" + *inst.reference_group + "'");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < inst.groups.size(); ++i) {
    if (inst.groups[i].size() > inst.groups[best].size()) best = i;
  }
  return best;
}

// Largest achievable true-positive count ignoring disparity bounds. Throws
// Infeasible when no k-list meets the precision cap.
inline std::int64_t unconstrained_max_tp(const SelectionInstance& inst) {
  detail::validate(inst);
  const auto t = detail::unconstrained_optimum(inst);
  if (!t) {
    throw Error(ErrorCode::kInfeasible,
                "no list of size " + std::to_string(inst.k) + " meets the precision cap");
  }
  return *t;
}

// Independent re-check of an allocation against every constraint, straight
// from the metric definitions.
inline bool satisfies_constraints(const SelectionInstance& inst, const GroupAllocation& a) {
  const std::size_t m = inst.groups.size();
  if (a.tp.size() != m || a.fp.size() != m) return false;
  std::int64_t size = 0;
  std::int64_t tp = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (a.tp[j] < 0 || a.tp[j] > inst.groups[j].positives) return false;
    if (a.fp[j] < 0 || a.fp[j] > inst.groups[j].negatives) return false;
    size += a.tp[j] + a.fp[j];
    tp += a.tp[j];
  }
  if (size != inst.k) return false;
  const auto cap = BoundRatio::from(inst.ppv_cap);
  if (static_cast<detail::i128>(tp) * BoundRatio::kDen > static_cast<detail::i128>(cap.num) * inst.k) {
    return false;
  }
  const auto lb = BoundRatio::from(inst.lb);
  const auto ub = BoundRatio::from(inst.ub);
  const std::size_t r = reference_index(inst);
  const auto& gr = inst.groups[r];
  for (std::size_t j = 0; j < m; ++j) {
    if (j == r) continue;
    const auto& gj = inst.groups[j];
    // FPR = f/N, FNR = (P - t)/P, PPV = t/(t + f)
    if (!detail::ratio_ok(a.fp[j], gj.negatives, a.fp[r], gr.negatives, lb, ub)) return false;
    if (!detail::ratio_ok(gj.positives - a.tp[j], gj.positives, gr.positives - a.tp[r],
                          gr.positives, lb, ub)) {
      return false;
    }
    if (!detail::ratio_ok(a.tp[j], a.tp[j] + a.fp[j], a.tp[r], a.tp[r] + a.fp[r], lb, ub)) {
      return false;
    }
  }
  return true;
}

namespace detail {

// Continuous relaxation of one group's admissible t over its list share s:
// hi(s) = min(t_hi, s - f_lo, b*s) and lo(s) = max(t_lo, s - f_hi, a*s),
// where a and b are the PPV bounds implied by the reference.
struct Envelope {
  double s_min = 0.0, s_max = -1.0;
  double hi_at_min = 0.0, lo_at_min = 0.0;
  std::vector<std::pair<double, double>> hi_seg, lo_seg;  // (length, slope)
  bool empty() const { return s_min > s_max; }
};

inline Envelope make_envelope(double t_lo, double t_hi, double f_lo, double f_hi, double a,
                              double b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Envelope e;
  auto hi = [&](double s) { return std::min({t_hi, s - f_lo, b * s}); };
  auto lo = [&](double s) { return std::max({t_lo, s - f_hi, a * s}); };
  double s_min = std::max(t_lo + f_lo, 0.0);
  double s_max = t_hi + f_hi;
  if (b <= 0.0) {
    if (t_lo > 0.0) return e;
  } else if (b < inf) {
    s_min = std::max(s_min, t_lo / b);
  }
  if (a < 1.0) {
    s_min = std::max(s_min, f_lo / (1.0 - a));
  } else if (f_lo > 0.0) {
    return e;
  }
  if (b < 1.0) s_max = std::min(s_max, f_hi / (1.0 - b));
  if (a > 0.0) s_max = std::min(s_max, t_hi / a);
  // Tolerate rounding at the ends; callers round the domain outward.
  if (s_min > s_max + 1e-9) return e;
  s_max = std::max(s_max, s_min);
  e.s_min = s_min;
  e.s_max = s_max;
  e.hi_at_min = hi(s_min);
  e.lo_at_min = lo(s_min);
  auto segments = [&](auto f, std::vector<double> cuts, std::vector<std::pair<double, double>>& out) {
    std::vector<double> xs{s_min, s_max};
    for (double c : cuts) {
      if (c > s_min && c < s_max) xs.push_back(c);
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double len = xs[i] - xs[i - 1];
      if (len <= 0.0) continue;
      out.emplace_back(len, (f(xs[i]) - f(xs[i - 1])) / len);
    }
  };
  std::vector<double> hi_cuts{t_hi + f_lo}, lo_cuts{t_lo + f_hi};
  if (b > 0.0 && b < inf) hi_cuts.push_back(t_hi / b);
  if (b < 1.0) hi_cuts.push_back(f_lo / (1.0 - b));
  if (a > 0.0) lo_cuts.push_back(t_lo / a);
  if (a < 1.0) lo_cuts.push_back(f_hi / (1.0 - a));
  segments(hi, hi_cuts, e.hi_seg);
  segments(lo, lo_cuts, e.lo_seg);
  return e;
}

// Sum of envelopes: best and worst total t over shares summing to r.
struct Relaxation {
  double s_min = 0.0, s_max = 0.0, hi0 = 0.0, lo0 = 0.0;
  std::vector<std::pair<double, double>> hi_seg, lo_seg;

  void add(const Envelope& e) {
    s_min += e.s_min;
    s_max += e.s_max;
    hi0 += e.hi_at_min;
    lo0 += e.lo_at_min;
    hi_seg.insert(hi_seg.end(), e.hi_seg.begin(), e.hi_seg.end());
    lo_seg.insert(lo_seg.end(), e.lo_seg.begin(), e.lo_seg.end());
  }
  void finish() {
    std::sort(hi_seg.begin(), hi_seg.end(), [](auto& x, auto& y) { return x.second > y.second; });
    std::sort(lo_seg.begin(), lo_seg.end(), [](auto& x, auto& y) { return x.second < y.second; });
  }
  static double walk(double base, double extra, const std::vector<std::pair<double, double>>& segs) {
    for (const auto& [len, slope] : segs) {
      if (extra <= 0.0) break;
      const double step = std::min(len, extra);
      base += step * slope;
      extra -= step;
    }
    return base;
  }
  bool contains(double r) const { return r >= s_min - kSlack && r <= s_max + kSlack; }
  // Integer bounds on the total t, valid for every integer point.
  std::int64_t max_t(double r) const {
    return static_cast<std::int64_t>(std::floor(walk(hi0, r - s_min, hi_seg) + kSlack));
  }
  std::int64_t min_t(double r) const {
    return static_cast<std::int64_t>(std::ceil(walk(lo0, r - s_min, lo_seg) - kSlack));
  }

  static constexpr double kSlack = 1e-6;
};

class GroupCountSearch {
 public:
  explicit GroupCountSearch(const SelectionInstance& inst)
      : inst_(inst),
        lb_(BoundRatio::from(inst.lb)),
        ub_(BoundRatio::from(inst.ub)),
        ref_(reference_index(inst)),
        cap_t_(cap_tp(inst)) {
    for (std::size_t j = 0; j < inst.groups.size(); ++j) {
      if (j != ref_) others_.push_back(j);
    }
    ranges_.resize(others_.size());
    envs_.resize(others_.size());
    rel_.resize(others_.size() + 1);
    chosen_s_.resize(others_.size());
    min_size_suffix_.assign(others_.size() + 1, 0);
    max_size_suffix_.assign(others_.size() + 1, 0);
    min_t_suffix_.assign(others_.size() + 1, 0);
    max_t_suffix_.assign(others_.size() + 1, 0);
  }

  // Returns the best allocation, or nullopt if none is feasible.
  std::optional<GroupAllocation> run() {
    const auto bound = unconstrained_optimum(inst_);
    if (!bound) return std::nullopt;
    upper_bound_ = *bound;
    const auto& gr = inst_.groups[ref_];
    std::int64_t others_positives = 0;
    for (auto j : others_) others_positives += inst_.groups[j].positives;

    for (std::int64_t t_r = std::min({gr.positives, cap_t_, inst_.k}); t_r >= 0; --t_r) {
      if (std::min(cap_t_, t_r + others_positives) <= best_) break;
      std::int64_t f_lo = 0, f_hi = std::min(gr.negatives, inst_.k - t_r);
      if (!reference_window(t_r, f_lo, f_hi)) continue;
      for (std::int64_t f_r = f_lo; f_r <= f_hi; ++f_r) {
        try_reference(t_r, f_r);
        if (best_ == upper_bound_) return best_allocation_;
      }
    }
    if (best_ < 0) return std::nullopt;
    return best_allocation_;
  }

 private:
  // Total list share the other groups can take, summed over their count
  // windows. Both ends are nondecreasing in f_r.
  std::pair<std::int64_t, std::int64_t> share_span(std::int64_t t_r, std::int64_t f_r) const {
    const auto& gr = inst_.groups[ref_];
    std::int64_t lo = 0, hi = 0;
    for (auto j : others_) {
      const auto& gj = inst_.groups[j];
      std::int64_t miss_lo, miss_hi, fl, fh;
      ratio_window(gr.positives - t_r, gr.positives, gj.positives, miss_lo, miss_hi);
      ratio_window(f_r, gr.negatives, gj.negatives, fl, fh);
      lo += gj.positives - miss_hi + fl;
      hi += gj.positives - miss_lo + fh;
    }
    return {lo, hi};
  }

  // Narrows [f_lo, f_hi] to the f_r whose remaining list share fits the
  // other groups' windows.
  bool reference_window(std::int64_t t_r, std::int64_t& f_lo, std::int64_t& f_hi) const {
    const std::int64_t need = inst_.k - t_r;
    if (f_lo > f_hi) return false;
    std::int64_t a = f_lo, b = f_hi + 1;  // first f with f + hi >= need
    while (a < b) {
      const std::int64_t mid = a + (b - a) / 2;
      if (mid + share_span(t_r, mid).second >= need) b = mid;
      else a = mid + 1;
    }
    const std::int64_t first = a;
    a = f_lo - 1;
    b = f_hi;  // last f with f + lo <= need
    while (a < b) {
      const std::int64_t mid = b - (b - a) / 2;
      if (mid + share_span(t_r, mid).first <= need) a = mid;
      else b = mid - 1;
    }
    f_lo = first;
    f_hi = a;
    return f_lo <= f_hi;
  }

  struct Range {
    std::int64_t t_lo, t_hi, f_lo, f_hi;
    std::int64_t size_lo() const { return t_lo + f_lo; }
    std::int64_t size_hi() const { return t_hi + f_hi; }
  };

  // Admissible t for group `idx` (index into others_) at list share s.
  bool t_interval(std::size_t idx, std::int64_t s, std::int64_t& lo, std::int64_t& hi) const {
    const Range& rg = ranges_[idx];
    lo = std::max(rg.t_lo, s - rg.f_hi);
    hi = std::min(rg.t_hi, s - rg.f_lo);
    if (s > 0 && ref_size_ > 0) {
      // lb * t_r/s_r <= t/s <= ub * t_r/s_r
      lo = std::max(lo, ceil_div(static_cast<i128>(lb_.num) * ref_t_ * s,
                                 static_cast<i128>(BoundRatio::kDen) * ref_size_));
      if (!ub_.infinite) {
        hi = std::min(hi, floor_div(static_cast<i128>(ub_.num) * ref_t_ * s,
                                    static_cast<i128>(BoundRatio::kDen) * ref_size_));
      }
    }
    return lo <= hi;
  }

  // Upper bound on the positives any groups can contribute with `size` list
  // slots between them, from t_j <= ub * PPV_ref * s_j.
  std::int64_t ppv_t_bound(std::int64_t size) const {
    if (ub_.infinite || ref_size_ == 0) return size;
    return std::min(size, floor_div(static_cast<i128>(ub_.num) * ref_t_ * size,
                                    static_cast<i128>(BoundRatio::kDen) * ref_size_));
  }

  // Interval of x = numerator of M_j over den_j implied by M_ref = a/b.
  void ratio_window(std::int64_t a, std::int64_t b, std::int64_t den_j, std::int64_t& lo,
                    std::int64_t& hi) const {
    lo = 0;
    hi = den_j;
    if (b == 0 || den_j == 0) return;
    lo = std::max(lo, ceil_div(static_cast<i128>(lb_.num) * a * den_j,
                               static_cast<i128>(BoundRatio::kDen) * b));
    if (!ub_.infinite) {
      hi = std::min(hi, floor_div(static_cast<i128>(ub_.num) * a * den_j,
                                  static_cast<i128>(BoundRatio::kDen) * b));
    }
  }

  void try_reference(std::int64_t t_r, std::int64_t f_r) {
    const auto& gr = inst_.groups[ref_];
    ref_t_ = t_r;
    ref_size_ = t_r + f_r;
    for (std::size_t idx = 0; idx < others_.size(); ++idx) {
      const auto& gj = inst_.groups[others_[idx]];
      Range& rg = ranges_[idx];
      std::int64_t miss_lo, miss_hi;
      ratio_window(gr.positives - t_r, gr.positives, gj.positives, miss_lo, miss_hi);
      rg.t_lo = gj.positives - miss_hi;
      rg.t_hi = gj.positives - miss_lo;
      ratio_window(f_r, gr.negatives, gj.negatives, rg.f_lo, rg.f_hi);
      if (rg.t_lo > rg.t_hi || rg.f_lo > rg.f_hi) return;
    }
    const std::size_t m = others_.size();
    for (std::size_t i = m; i-- > 0;) {
      min_size_suffix_[i] = min_size_suffix_[i + 1] + ranges_[i].size_lo();
      max_size_suffix_[i] = max_size_suffix_[i + 1] + ranges_[i].size_hi();
      min_t_suffix_[i] = min_t_suffix_[i + 1] + ranges_[i].t_lo;
      max_t_suffix_[i] = max_t_suffix_[i + 1] + ranges_[i].t_hi;
    }
    const std::int64_t rest = inst_.k - ref_size_;
    const std::int64_t cap_rest = cap_t_ - t_r;
    if (rest < min_size_suffix_[0] || rest > max_size_suffix_[0]) return;
    if (min_t_suffix_[0] > cap_rest) return;
    if (t_r + std::min({cap_rest, max_t_suffix_[0], ppv_t_bound(rest)}) <= best_) return;

    const double a = ref_size_ > 0 ? lb_.value() * static_cast<double>(t_r) / static_cast<double>(ref_size_) : 0.0;
    const double b = ref_size_ == 0 || ub_.infinite
                         ? std::numeric_limits<double>::infinity()
                         : ub_.value() * static_cast<double>(t_r) / static_cast<double>(ref_size_);
    Relaxation& all = rel_[0];
    all = Relaxation{};
    for (std::size_t i = 0; i < m; ++i) {
      const Range& rg = ranges_[i];
      envs_[i] = make_envelope(static_cast<double>(rg.t_lo), static_cast<double>(rg.t_hi),
                               static_cast<double>(rg.f_lo), static_cast<double>(rg.f_hi), a, b);
      if (envs_[i].empty()) return;
      all.add(envs_[i]);
    }
    all.finish();
    const auto r = static_cast<double>(rest);
    if (!all.contains(r) || all.min_t(r) > cap_rest) return;
    if (t_r + std::min(cap_rest, all.max_t(r)) <= best_) return;
    rel_[m] = Relaxation{};
    for (std::size_t i = m; i-- > 1;) {
      rel_[i] = rel_[i + 1];
      rel_[i].add(envs_[i]);
      rel_[i].finish();
    }
    search(0, rest, 0, 0, cap_rest, t_r, f_r);
  }

  void search(std::size_t idx, std::int64_t rest, std::int64_t sum_lo, std::int64_t sum_hi,
              std::int64_t cap_rest, std::int64_t t_r, std::int64_t f_r) {
    if (idx == others_.size()) {
      if (rest != 0 || sum_lo > cap_rest) return;
      const std::int64_t value = t_r + std::min(sum_hi, cap_rest);
      if (value > best_) record(value - t_r, t_r, f_r);
      return;
    }
    const Range& rg = ranges_[idx];
    const Envelope& env = envs_[idx];
    const Relaxation& tail = rel_[idx + 1];
    constexpr double slack = Relaxation::kSlack;
    std::int64_t s_hi = std::min(rg.size_hi(), rest - min_size_suffix_[idx + 1]);
    std::int64_t s_lo = std::max(rg.size_lo(), rest - max_size_suffix_[idx + 1]);
    s_hi = std::min({s_hi, static_cast<std::int64_t>(std::floor(env.s_max + slack)),
                     rest - static_cast<std::int64_t>(std::ceil(tail.s_min - slack))});
    s_lo = std::max({s_lo, static_cast<std::int64_t>(std::ceil(env.s_min - slack)),
                     rest - static_cast<std::int64_t>(std::floor(tail.s_max + slack))});
    for (std::int64_t s = s_hi; s >= s_lo; --s) {
      std::int64_t lo, hi;
      if (!t_interval(idx, s, lo, hi)) continue;
      const auto r = static_cast<double>(rest - s);
      if (sum_lo + lo + tail.min_t(r) > cap_rest) continue;
      if (t_r + std::min(cap_rest, sum_hi + hi + tail.max_t(r)) <= best_) continue;
      chosen_s_[idx] = s;
      search(idx + 1, rest - s, sum_lo + lo, sum_hi + hi, cap_rest, t_r, f_r);
      if (best_ == upper_bound_) return;
    }
  }

  // Spread `others_tp` over the chosen shares, starting from each lower end.
  void record(std::int64_t others_tp, std::int64_t t_r, std::int64_t f_r) {
    GroupAllocation a;
    a.tp.assign(inst_.groups.size(), 0);
    a.fp.assign(inst_.groups.size(), 0);
    a.tp[ref_] = t_r;
    a.fp[ref_] = f_r;
    std::vector<std::int64_t> lo(others_.size()), hi(others_.size());
    std::int64_t remaining = others_tp;
    for (std::size_t idx = 0; idx < others_.size(); ++idx) {
      t_interval(idx, chosen_s_[idx], lo[idx], hi[idx]);
      remaining -= lo[idx];
    }
    for (std::size_t idx = 0; idx < others_.size(); ++idx) {
      const std::int64_t extra = std::min(remaining, hi[idx] - lo[idx]);
      const std::int64_t t = lo[idx] + extra;
      remaining -= extra;
      a.tp[others_[idx]] = t;
      a.fp[others_[idx]] = chosen_s_[idx] - t;
    }
    best_ = t_r + others_tp;
    best_allocation_ = std::move(a);
  }

  const SelectionInstance& inst_;
  BoundRatio lb_, ub_;
  std::size_t ref_;
  std::int64_t cap_t_;
  std::vector<std::size_t> others_;
  std::vector<Range> ranges_;
  std::vector<Envelope> envs_;
  std::vector<Relaxation> rel_;
  std::vector<std::int64_t> chosen_s_;
  std::vector<std::int64_t> min_size_suffix_, max_size_suffix_, min_t_suffix_, max_t_suffix_;
  std::int64_t ref_t_ = 0;
  std::int64_t ref_size_ = 0;
  std::int64_t upper_bound_ = 0;
  std::int64_t best_ = -1;
  GroupAllocation best_allocation_;
};

inline std::optional<double> disparity(const Rate& mj, const Rate& mr) {
  if (!mj || !mr || *mr == 0.0) return std::nullopt;
  return *mj / *mr;
}

}  // namespace detail

// Per-group metrics of the selected list and their ratios to the reference.
inline SelectionResult describe_allocation(const SelectionInstance& inst, GroupAllocation a) {
  SelectionResult res;
  res.status = SelectionStatus::kOptimal;
  res.reference = reference_index(inst);
  for (auto t : a.tp) res.tp_total += t;
  res.list_ppv = static_cast<double>(res.tp_total) / static_cast<double>(inst.k);
  res.recall = detail::ratio(res.tp_total, inst.total_positives());
  for (std::size_t j = 0; j < inst.groups.size(); ++j) {
    const auto& g = inst.groups[j];
    GroupSelectionMetrics gm;
    gm.key = g.key;
    gm.fpr = detail::ratio(a.fp[j], g.negatives);
    gm.fnr = detail::ratio(g.positives - a.tp[j], g.positives);
    gm.ppv = detail::ratio(a.tp[j], a.tp[j] + a.fp[j]);
    res.groups.push_back(std::move(gm));
  }
  const auto& ref = res.groups[res.reference];
  for (auto& gm : res.groups) {
    gm.fpr_disparity = detail::disparity(gm.fpr, ref.fpr);
    gm.fnr_disparity = detail::disparity(gm.fnr, ref.fnr);
    gm.ppv_disparity = detail::disparity(gm.ppv, ref.ppv);
  }
  res.allocation = std::move(a);
  return res;
}

// Maximizes selected true positives subject to list size k, the precision
// cap and the disparity bounds. Returns status kInfeasible when no
// allocation satisfies them.
inline SelectionResult solve_exact(const SelectionInstance& inst) {
  detail::validate(inst);
  if (inst.groups.size() > kMaxSelectionGroups) {
    throw Error(ErrorCode::kTooManyGroups,
                std::to_string(inst.groups.size()) + " groups, limit is " +
                    std::to_string(kMaxSelectionGroups));
  }
  detail::GroupCountSearch search(inst);
  auto best = search.run();
  if (!best) {
    SelectionResult res;
    res.status = SelectionStatus::kInfeasible;
    res.reference = reference_index(inst);
    return res;
  }
  return describe_allocation(inst, std::move(*best));
}

struct KScanRow {
  double k_pct = 0.0;
  std::int64_t k_abs = 0;
  std::optional<std::int64_t> unconstrained_tp;  // absent when infeasible
  std::optional<std::int64_t> constrained_tp;
  bool optimal = false;
};

struct KScanReport {
  std::string grouping;
  std::vector<KScanRow> rows;
  std::string summary;  // "All", "None" or "[a,b]" in percent
};

struct KScanOptions {
  double ppv_cap = 0.7;
  double lb = 0.8;
  double ub = 1.2;
  std::vector<double> k_grid_pct;  // empty: 5, 10, ..., 100
  std::int64_t tp_slack = 0;       // optimal if constrained >= unconstrained - slack
  std::optional<std::string> reference_group;
};

inline std::vector<double> default_k_grid() {
  std::vector<double> grid;
  for (int pct = 5; pct <= 100; pct += 5) grid.push_back(pct);
  return grid;
}

inline SelectionInstance selection_instance(const CohortStats& stats, std::int64_t k,
                                            const KScanOptions& opts) {
  SelectionInstance inst;
  for (const auto& g : stats.groups) inst.groups.push_back({g.group_key, g.p_count, g.n - g.p_count});
  inst.k = k;
  inst.ppv_cap = opts.ppv_cap;
  inst.lb = opts.lb;
  inst.ub = opts.ub;
  inst.reference_group = opts.reference_group;
  return inst;
}

namespace detail {

inline std::string format_pct(double pct) {
  if (pct == std::floor(pct)) return std::to_string(static_cast<long long>(pct));
  std::string s = std::to_string(pct);
  while (!s.empty() && s.back() == '0') s.pop_back();
  return s;
}

}  // namespace detail

// "All" when every grid point is optimal, "None" when none is, else the
// longest contiguous optimal run (earliest on ties).
inline std::string summarize_k_range(const std::vector<KScanRow>& rows) {
  std::size_t best_start = 0, best_len = 0, count = 0;
  for (std::size_t i = 0; i < rows.size();) {
    if (!rows[i].optimal) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < rows.size() && rows[j].optimal) ++j;
    count += j - i;
    if (j - i > best_len) {
      best_len = j - i;
      best_start = i;
    }
    i = j;
  }
  if (count == 0) return "None";
  if (count == rows.size()) return "All";
  return "[" + detail::format_pct(rows[best_start].k_pct) + "," +
         detail::format_pct(rows[best_start + best_len - 1].k_pct) + "]";
}

inline KScanReport k_scan(const CohortStats& stats, const KScanOptions& opts) {
  if (stats.groups.empty() || stats.n <= 0) {
    throw Error(ErrorCode::kEmptyGroup, "cohort statistics are empty");
  }
  const auto grid = opts.k_grid_pct.empty() ? default_k_grid() : opts.k_grid_pct;
  KScanReport rep;
  rep.grouping = stats.grouping;
  rep.rows.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 100.0)) {
      throw Error(ErrorCode::kDomainError, "k percentages must lie in (0, 100]");
    }
    rep.rows[i].k_pct = grid[i];
    const auto k = static_cast<std::int64_t>(std::llround(grid[i] / 100.0 * static_cast<double>(stats.n)));
    rep.rows[i].k_abs = std::clamp<std::int64_t>(k, 1, stats.n);
  }
  // Validate once on the calling thread so bad options surface as Error.
  detail::validate(selection_instance(stats, rep.rows.front().k_abs, opts));
  parallel_for(rep.rows.size(), [&](std::size_t i) {
    KScanRow& row = rep.rows[i];
    const auto inst = selection_instance(stats, row.k_abs, opts);
    row.unconstrained_tp = detail::unconstrained_optimum(inst);
    const auto res = solve_exact(inst);
    if (res.status == SelectionStatus::kOptimal) row.constrained_tp = res.tp_total;
    row.optimal = row.unconstrained_tp && row.constrained_tp &&
                  *row.constrained_tp >= *row.unconstrained_tp - opts.tp_slack;
  });
  rep.summary = summarize_k_range(rep.rows);
  return rep;
}

// Row ordinals realizing an allocation: within each group the first t_j
// positives and f_j negatives in file order. Limited to cohorts of at most
// 10^4 rows.
inline std::vector<std::size_t> realize_selection(const Cohort& cohort, const GroupingSpec& grouping,
                                                  const SelectionInstance& inst,
                                                  const GroupAllocation& alloc) {
  constexpr std::size_t kMaxRows = 10'000;
  if (cohort.size() > kMaxRows) {
    throw Error(ErrorCode::kDomainError, "row realization is limited to 10^4 rows");
  }
  const auto pos = grouping.positions(cohort.schema);
  std::vector<std::int64_t> need_tp = alloc.tp, need_fp = alloc.fp;
  std::vector<std::size_t> out;
  for (const auto& row : cohort.rows) {
    const auto key = grouping.key(row, pos);
    for (std::size_t j = 0; j < inst.groups.size(); ++j) {
      if (inst.groups[j].key != key) continue;
      auto& need = row.label ? need_tp[j] : need_fp[j];
      if (need > 0) {
        --need;
        out.push_back(row.ordinal);
      }
      break;
    }
  }
  return out;
}

}  // namespace fairfeas
