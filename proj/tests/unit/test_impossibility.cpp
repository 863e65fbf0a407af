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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairfeas/impossibility.hpp"
#include "fairfeas/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fairfeas;

TEST(FprFromRelation, Examples) {
  EXPECT_NEAR(fpr_from_relation(0.3, 0.6, 0.2), 0.3 / 0.7 * (0.4 / 0.6) * 0.8, 1e-15);
  EXPECT_NEAR(fpr_from_relation(0.3, 0.6, 0.2), 0.2285714285714, 1e-12);
  EXPECT_EQ(fpr_from_relation(0.5, 1.0, 0.0), 0.0);
  EXPECT_EQ(fpr_from_relation(0.5, 0.5, 0.0), 1.0);
  EXPECT_FF_ERROR(fpr_from_relation(0.0, 0.5, 0.1), ErrorCode::kDomainError);
  EXPECT_FF_ERROR(fpr_from_relation(0.3, 0.0, 0.1), ErrorCode::kDomainError);
}

TEST(FprFromRelation, MatchesIntegerCounts) {
  // p = 0.3, ppv = 0.6, fnr = 0.2 on 700 rows: P = 210, TP = 168, FP = 112.
  const auto m = rates_from_counts({.tp = 168, .fp = 112, .tn = 378, .fn = 42});
  EXPECT_NEAR(*m.fpr, fpr_from_relation(0.3, 0.6, 0.2), 1e-12);
}

TEST(AccIdentity, Examples) {
  EXPECT_DOUBLE_EQ(acc_identity(0.25, 0.2, 0.1), 0.875);
  EXPECT_EQ(acc_identity(0.5, 0, 0), 1.0);
  EXPECT_EQ(acc_identity(0.5, 1, 1), 0.0);
}

TEST(RelaxedFnrAcc, Examples) {
  EXPECT_NEAR(relaxed_fnr_acc({.eps_p = 0.1, .p = 0.4}, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(relaxed_fnr_acc({.eps_acc = 0.05, .eps_p = 0.1, .p = 0.4}, 0.2), 0.7, 1e-12);
  EXPECT_FF_ERROR(relaxed_fnr_acc({.eps_p = 0.0, .p = 0.4}, 0.2), ErrorCode::kZeroEpsP);
}

TEST(RelaxedFnrAcc, SatisfiesBalance) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> e(-0.2, 0.2), u(0.05, 0.95);
  int checked = 0;
  while (checked < 5000) {
    AccRelaxation r{e(rng), e(rng), e(rng), e(rng), u(rng)};
    if (std::abs(r.eps_p) < 1e-3 || r.p + r.eps_p <= 0 || r.p + r.eps_p >= 1) continue;
    const double fpr1 = u(rng);
    const double fnr1 = relaxed_fnr_acc(r, fpr1);
    ASSERT_NEAR(acc_balance_residual(r, fpr1, fnr1), 0.0, 1e-10);
    ++checked;
  }
}

TEST(OffsetBounds, Examples) {
  auto b = offset_bounds({0.05, 0.2});
  EXPECT_NEAR(b.c_max, 0.5, 1e-15);
  EXPECT_NEAR(b.c_min, -0.5, 1e-15);
  b = offset_bounds({0.05, 0.1});
  EXPECT_NEAR(b.c_max, 1.0, 1e-15);
  b = offset_bounds({0.01, 0.5});
  EXPECT_NEAR(b.c_max, 0.04, 1e-15);
  EXPECT_NEAR(b.c_min, -0.04, 1e-15);
  EXPECT_FF_ERROR(offset_bounds({0.05, 0.0}), ErrorCode::kZeroEpsP);
}

TEST(FairnessArea, Examples) {
  EXPECT_NEAR(fairness_area_acc({0.05, 0.2}), 0.75, 1e-15);
  EXPECT_EQ(fairness_area_acc({0.05, 0.1}), 1.0);
  EXPECT_NEAR(fairness_area_acc({0.01, 0.4}), 0.0975, 1e-15);
  EXPECT_FF_ERROR(fairness_area_acc({0.05, 0.0}), ErrorCode::kZeroEpsP);
  EXPECT_FF_ERROR(fairness_area_acc({0.05, 0.6, 0.5}), ErrorCode::kDomainError);
}

TEST(FairnessArea, SymmetricInEpsP) {
  EXPECT_EQ(fairness_area_acc({0.03, 0.25}), fairness_area_acc({0.03, -0.25}));
}

TEST(FairnessArea, ClosedFormBelowSaturation) {
  for (double g : {0.01, 0.02, 0.05}) {
    for (double ep : {0.1, 0.2, 0.4}) {
      if (2 * g > ep) continue;
      EXPECT_NEAR(fairness_area_acc({g, ep}), 4 * g / ep - 4 * g * g / (ep * ep), 1e-14);
    }
  }
}

TEST(FairnessArea, Monotone) {
  double prev = 0;
  for (double g = 0.005; g <= 0.3; g += 0.005) {
    const double a = fairness_area_acc({g, 0.3});
    ASSERT_GE(a, prev);
    prev = a;
  }
  prev = 1.0;
  for (double ep = 0.05; ep < 0.95; ep += 0.01) {
    const double a = fairness_area_acc({0.02, ep});
    ASSERT_LE(a, prev);
    prev = a;
  }
}

TEST(FairnessArea, MonteCarloOracle) {
  for (auto [g, ep] : {std::pair{0.05, 0.2}, std::pair{0.01, 0.4}}) {
    const double c = 2 * g / ep;
    const double area = fairness_area_acc({g, ep});
    const std::int64_t n = 1'000'000;
    const double mc = oracle::mc_band_fraction(c, n, 99);
    const double se = std::sqrt(area * (1 - area) / n);
    EXPECT_LE(std::abs(mc - area), 3 * se) << g << " " << ep;
  }
}

TEST(RelaxedFnrPpv, Examples) {
  EXPECT_NEAR(relaxed_fnr_ppv({.eps_p = 0.2, .p = 0.3, .v = 0.5}), 1.0, 1e-12);
  EXPECT_NEAR(relaxed_fnr_ppv({.eps_fpr = 0.05, .eps_v = 0.1, .eps_p = 0.0, .p = 0.5, .v = 0.5}), 0.85, 1e-12);
  EXPECT_FF_ERROR(relaxed_fnr_ppv({.eps_fpr = 0.1, .eps_fnr = 0.05, .p = 0.5, .v = 0.5}),
                  ErrorCode::kSingularDenominator);
}

TEST(RelaxedFnrPpv, ThresholdIsConfigurable) {
  const PpvRelaxation r{.eps_p = 1e-9, .p = 0.5, .v = 0.5};
  EXPECT_NO_THROW(relaxed_fnr_ppv(r, 0.0));
  EXPECT_FF_ERROR(relaxed_fnr_ppv(r, 1e-6), ErrorCode::kSingularDenominator);
}

TEST(RelaxedFnrPpv, DegenerateSolutionWithoutTolerance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95), e(-0.3, 0.3);
  for (int i = 0; i < 2000; ++i) {
    PpvRelaxation r{.eps_p = e(rng), .p = u(rng), .v = u(rng)};
    if (std::abs(r.eps_p) < 1e-3 || r.p + r.eps_p <= 0.01 || r.p + r.eps_p >= 0.99) continue;
    ASSERT_NEAR(relaxed_fnr_ppv(r), 1.0, 1e-9);
  }
}

TEST(PpvBalanceResidual, Examples) {
  EXPECT_EQ(ppv_balance_residual({.p = 0.4, .v = 0.6}, 0.37), 0.0);
  // (3/7)(1 - 0) - (1 - 0) != 0, while beta = 1 is the root.
  const PpvRelaxation r{.eps_p = 0.2, .p = 0.3, .v = 0.5};
  EXPECT_NEAR(ppv_balance_residual(r, 0.0), 3.0 / 7.0 - 1.0, 1e-12);
  EXPECT_NEAR(ppv_balance_residual(r, 1.0), 0.0, 1e-15);
  EXPECT_FF_ERROR(ppv_balance_residual({.p = 0.4, .v = 1.0}, 0.1), ErrorCode::kDomainError);
}

TEST(RelaxedFnrPpv, SatisfiesBalance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 0.95), e(-0.2, 0.2);
  int checked = 0;
  while (checked < 5000) {
    PpvRelaxation r{e(rng), e(rng), e(rng), e(rng), u(rng), u(rng)};
    if (r.p + r.eps_p <= 0.01 || r.p + r.eps_p >= 0.99 || r.v + r.eps_v <= 0.01 || r.v + r.eps_v >= 0.99) {
      continue;
    }
    double beta;
    try {
      beta = relaxed_fnr_ppv(r);
    } catch (const Error& err) {
      ASSERT_EQ(err.code(), ErrorCode::kSingularDenominator);
      continue;
    }
    ASSERT_NEAR(ppv_balance_residual(r, beta), 0.0, 1e-9) << beta;
    ++checked;
  }
}
