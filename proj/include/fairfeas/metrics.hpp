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

// Confusion-matrix metrics, top-k thresholding, expected precision at k and
// pooled (intersectional) prevalence arithmetic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairfeas/error.hpp"

namespace fairfeas {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  constexpr std::int64_t total() const { return tp + fp + tn + fn; }
  constexpr std::int64_t positives() const { return tp + fn; }
  constexpr std::int64_t negatives() const { return fp + tn; }
};

// A rate whose denominator is zero is std::nullopt ("undefined"); callers
// branch on it instead of receiving 0 or NaN.
using Rate = std::optional<double>;

struct MetricPoint {
  Rate fpr;
  Rate fnr;
  Rate ppv;
  double acc = 0.0;
  double prevalence = 0.0;
};

struct GroupCounts {
  std::string group_key;
  std::int64_t n = 0;        // group size
  std::int64_t p_count = 0;  // positives in the group

  double prevalence() const {
    return static_cast<double>(p_count) / static_cast<double>(n);
  }
};

struct ScoredItem {
  double score = 0.0;
  bool label = false;
  std::size_t index = 0;
};

namespace detail {

inline Rate ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline void check_group(const GroupCounts& g) {
  if (g.n <= 0 || g.p_count < 0 || g.p_count > g.n) {
    throw Error(ErrorCode::kDomainError,
                "group '" + g.group_key + "' needs n > 0 and 0 <= p_count <= n");
  }
}

}  // namespace detail

inline MetricPoint rates_from_counts(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
    throw Error(ErrorCode::kDomainError, "confusion counts must be non-negative");
  }
  if (c.total() == 0) {
    throw Error(ErrorCode::kEmptyCounts, "confusion matrix has no observations");
  }
  const auto total = static_cast<double>(c.total());
  MetricPoint m;
  m.fpr = detail::ratio(c.fp, c.fp + c.tn);
  m.fnr = detail::ratio(c.fn, c.fn + c.tp);
  m.ppv = detail::ratio(c.tp, c.tp + c.fp);
  m.acc = static_cast<double>(c.tp + c.tn) / total;
  m.prevalence = static_cast<double>(c.tp + c.fn) / total;
  return m;
}

// Indices of the k highest scores. Equal scores are ranked by ascending
// position in `items`, so the result is deterministic. Returned ascending.
inline std::vector<std::size_t> topk_select(std::span<const ScoredItem> items,
                                            std::size_t k) {
  if (k < 1 || k > items.size()) {
    throw Error(ErrorCode::kKOutOfRange,
                "k=" + std::to_string(k) + " with " +
                    std::to_string(items.size()) + " items");
  }
  for (const auto& it : items) {
    if (!std::isfinite(it.score) || it.score < 0.0 || it.score > 1.0) {
      throw Error(ErrorCode::kDomainError, "scores must be finite and in [0,1]");
    }
  }
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (items[a].score != items[b].score) {
                        return items[a].score > items[b].score;
                      }
                      return a < b;
                    });
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) picked.push_back(items[order[i]].index);
  std::sort(picked.begin(), picked.end());
  return picked;
}

// Expected precision of the top-k list of a calibrated classifier: the mean
// of the k largest positive-class probabilities.
inline double expected_ppv_at_k(std::span<const double> calibrated_probs,
                                std::size_t k) {
  if (k < 1 || k > calibrated_probs.size()) {
    throw Error(ErrorCode::kKOutOfRange,
                "k=" + std::to_string(k) + " with " +
                    std::to_string(calibrated_probs.size()) + " probabilities");
  }
  for (std::size_t i = 0; i < calibrated_probs.size(); ++i) {
    const double p = calibrated_probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kDomainError, "probabilities must lie in [0,1]");
    }
    if (i > 0 && p > calibrated_probs[i - 1]) {
      throw Error(ErrorCode::kNotSorted,
                  "probabilities must be non-increasing (index " +
                      std::to_string(i) + ")");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += calibrated_probs[i];
  return sum / static_cast<double>(k);
}

// Prevalence of the union of two disjoint groups. Always lies between the
// two group prevalences.
inline double pooled_prevalence(const GroupCounts& a, const GroupCounts& b) {
  detail::check_group(a);
  detail::check_group(b);
  return static_cast<double>(a.p_count + b.p_count) /
         static_cast<double>(a.n + b.n);
}

inline double max_pairwise_prevalence_diff(std::span<const GroupCounts> groups) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::kTooFewGroups,
                "need at least two groups, got " + std::to_string(groups.size()));
  }
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& g : groups) {
    detail::check_group(g);
    lo = std::min(lo, g.prevalence());
    hi = std::max(hi, g.prevalence());
  }
  // max |p_i - p_j| over pairs is attained by the extreme pair.
  return hi - lo;
}

}  // namespace fairfeas
