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

// Closed-form relations between FPR, FNR, PPV, ACC and prevalence for two
// groups whose metrics may differ by bounded tolerances.
//
// Sign convention: a group-2 quantity equals the group-1 quantity plus its
// epsilon (p2 = p1 + eps_p, FPR2 = FPR1 + eps_fpr, ...). The ACC balance
// carries eps_acc on the group-2 side: ACC1 = ACC2 + eps_acc.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "fairfeas/error.hpp"

namespace fairfeas {

struct AccRelaxation {
  double eps_fpr = 0.0;
  double eps_fnr = 0.0;
  double eps_acc = 0.0;
  double eps_p = 0.0;
  double p = 0.5;
};

struct PpvRelaxation {
  double eps_fpr = 0.0;
  double eps_fnr = 0.0;
  double eps_v = 0.0;
  double eps_p = 0.0;
  double p = 0.5;
  double v = 0.5;
};

// Symmetric tolerance gamma on FPR, FNR and ACC differences. `p` is only
// needed to check the eps_p < 1 - p assumption and may be omitted.
struct RegionSpec {
  double gamma = 0.05;
  double eps_p = 0.1;
  std::optional<double> p;
};

struct OffsetBounds {
  double c_max = 0.0;
  double c_min = 0.0;
};

inline constexpr double kDefaultSingularityThreshold = 1e-12;

namespace detail {

inline bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }
inline bool in_open_pm1(double x) { return x > -1.0 && x < 1.0; }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

inline void validate(const AccRelaxation& r) {
  require(r.eps_p != 0.0, ErrorCode::kZeroEpsP,
          "equal prevalences are excluded (eps_p = 0)");
  require(in_open_pm1(r.eps_fpr) && in_open_pm1(r.eps_fnr) &&
              in_open_pm1(r.eps_acc) && in_open_pm1(r.eps_p),
          ErrorCode::kDomainError, "epsilon terms must lie in (-1, 1)");
  require(in_open_unit(r.p), ErrorCode::kDomainError, "p must lie in (0, 1)");
  require(in_open_unit(r.p + r.eps_p), ErrorCode::kDomainError,
          "p + eps_p must lie in (0, 1)");
}

inline void validate(const PpvRelaxation& r) {
  require(in_open_pm1(r.eps_fpr) && in_open_pm1(r.eps_fnr) &&
              in_open_pm1(r.eps_v) && in_open_pm1(r.eps_p),
          ErrorCode::kDomainError, "epsilon terms must lie in (-1, 1)");
  require(in_open_unit(r.p) && in_open_unit(r.p + r.eps_p),
          ErrorCode::kDomainError, "p and p + eps_p must lie in (0, 1)");
  require(in_open_unit(r.v) && in_open_unit(r.v + r.eps_v),
          ErrorCode::kDomainError, "v and v + eps_v must lie in (0, 1)");
}

inline void validate(const RegionSpec& s) {
  require(s.eps_p != 0.0, ErrorCode::kZeroEpsP,
          "equal prevalences are excluded (eps_p = 0)");
  require(std::isfinite(s.eps_p) && std::abs(s.eps_p) < 1.0,
          ErrorCode::kDomainError, "eps_p must lie in (-1, 1)");
  require(s.gamma > 0.0 && s.gamma <= 1.0, ErrorCode::kDomainError,
          "gamma must lie in (0, 1]");
  if (s.p) {
    require(in_open_unit(*s.p), ErrorCode::kDomainError, "p must lie in (0, 1)");
    require(s.eps_p < 1.0 - *s.p, ErrorCode::kDomainError,
            "requires eps_p < 1 - p");
  }
}

}  // namespace detail

// FPR implied by prevalence, PPV and FNR for a single group. The result can
// exceed 1, in which case no classifier realizes the inputs.
inline double fpr_from_relation(double p, double ppv, double fnr) {
  detail::require(detail::in_open_unit(p), ErrorCode::kDomainError,
                  "p must lie in (0, 1)");
  detail::require(ppv > 0.0 && ppv <= 1.0, ErrorCode::kDomainError,
                  "ppv must lie in (0, 1]");
  detail::require(fnr >= 0.0 && fnr <= 1.0, ErrorCode::kDomainError,
                  "fnr must lie in [0, 1]");
  return (p / (1.0 - p)) * ((1.0 - ppv) / ppv) * (1.0 - fnr);
}

inline double acc_identity(double p, double fnr, double fpr) {
  return (1.0 - fnr) * p + (1.0 - fpr) * (1.0 - p);
}

// Group-1 FNR on the feasible line for a given group-1 FPR. Not clipped to
// [0, 1].
inline double relaxed_fnr_acc(const AccRelaxation& r, double fpr1) {
  detail::validate(r);
  const double numerator = -r.eps_fpr + r.eps_acc + r.eps_fpr * r.p -
                           r.eps_fnr * r.p + fpr1 * r.eps_p +
                           r.eps_fpr * r.eps_p - r.eps_fnr * r.eps_p;
  return numerator / r.eps_p;
}

// ACC1 - (ACC2 + eps_acc) with group-2 metrics shifted by the epsilons. Zero
// exactly on the line returned by relaxed_fnr_acc.
inline double acc_balance_residual(const AccRelaxation& r, double fpr1,
                                   double fnr1) {
  const double acc1 = acc_identity(r.p, fnr1, fpr1);
  const double acc2 =
      acc_identity(r.p + r.eps_p, fnr1 + r.eps_fnr, fpr1 + r.eps_fpr);
  return acc1 - acc2 - r.eps_acc;
}

inline OffsetBounds offset_bounds(const RegionSpec& spec) {
  detail::validate(spec);
  const double c = 2.0 * spec.gamma / std::abs(spec.eps_p);
  return {c, -c};
}

// Area of the band |FPR - FNR| <= c over the unit square, c = 2*gamma/|eps_p|
// clamped to 1 (full square).
inline double fairness_area_acc(const RegionSpec& spec) {
  const double c = std::min(offset_bounds(spec).c_max, 1.0);
  return 2.0 * c - c * c;
}

inline double ppv_relaxation_denominator(const PpvRelaxation& r) {
  const double p = r.p, v = r.v, ev = r.eps_v, ep = r.eps_p;
  return ep * (p * ev - v * v - v * ev + v) + (p - 1.0) * p * ev;
}

// Group-1 FNR (beta) satisfying the FPR balance
//   p/(1-p) (1-v)/v (1-beta)
//     = (p+eps_p)/(1-p-eps_p) (1-v-eps_v)/(v+eps_v) (1-beta-eps_fnr) + eps_fpr.
inline double relaxed_fnr_ppv(const PpvRelaxation& r,
                              double singular_threshold = kDefaultSingularityThreshold) {
  detail::validate(r);
  const double p = r.p, v = r.v, ev = r.eps_v, ep = r.eps_p;
  const double ef = r.eps_fpr, en = r.eps_fnr;
  const double den = ppv_relaxation_denominator(r);
  if (!(std::abs(den) > singular_threshold)) {
    throw Error(ErrorCode::kSingularDenominator,
                "|D| <= " + std::to_string(singular_threshold) +
                    "; the balance does not determine FNR");
  }
  const double shrink = ef * (p - 1.0) - 1.0;
  const double num = ep * (v * v * shrink + v * ev * shrink + p * ev + v) +
                     (p - 1.0) * (ef * (p - 1.0) * v * (v + ev) + p * ev) -
                     en * (p - 1.0) * v * (p + ep) * (v + ev - 1.0);
  return num / den;
}

// LHS - RHS of the FPR balance above at a given beta.
inline double ppv_balance_residual(const PpvRelaxation& r, double beta) {
  detail::validate(r);
  const double p2 = r.p + r.eps_p;
  const double v2 = r.v + r.eps_v;
  const double lhs = (r.p / (1.0 - r.p)) * ((1.0 - r.v) / r.v) * (1.0 - beta);
  const double rhs = (p2 / (1.0 - p2)) * ((1.0 - v2) / v2) *
                         (1.0 - (beta + r.eps_fnr)) +
                     r.eps_fpr;
  return lhs - rhs;
}

}  // namespace fairfeas
