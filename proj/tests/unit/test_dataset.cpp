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

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fairfeas/csv.hpp"
#include "fairfeas/dataset.hpp"
#include "fairfeas/json_io.hpp"
#include "test_util.hpp"

using namespace fairfeas;

namespace {

TableSchema sex_race_schema() { return {"y", "yes", {"sex", "race"}, std::nullopt}; }

// Cohort with the given (sex, race, label) rows.
Cohort make_cohort(const std::vector<std::tuple<std::string, std::string, bool>>& rows) {
  Cohort c{sex_race_schema(), {}};
  std::size_t i = 0;
  for (const auto& [s, r, y] : rows) c.rows.push_back({y, y ? "yes" : "no", {s, r}, i++, std::nullopt});
  return c;
}

Cohort random_cohort(std::mt19937_64& rng, int n) {
  const char* sexes[] = {"F", "M"};
  const char* races[] = {"A", "B", "C"};
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> base(6);
  for (auto& b : base) b = u(rng);
  std::vector<std::tuple<std::string, std::string, bool>> rows;
  for (int i = 0; i < n; ++i) {
    const int s = static_cast<int>(rng() % 2), r = static_cast<int>(rng() % 3);
    rows.emplace_back(sexes[s], races[r], u(rng) < base[s * 3 + r]);
  }
  return make_cohort(rows);
}

}  // namespace

TEST(Csv, QuotingRoundTrip) {
  const csv::Record rec{"plain", "with,comma", "with \"quote\"", "line\nbreak", ""};
  const auto text = csv::format_record(rec);
  const auto parsed = csv::parse(text);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], rec);
}

TEST(Csv, CrLfAndBlankLines) {
  const auto r = csv::parse("a,b\r\n1,2\r\n\r\n3,4");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[2], (csv::Record{"3", "4"}));
}

TEST(Csv, Malformed) {
  EXPECT_FF_ERROR(csv::parse("a,\"b\n"), ErrorCode::kBadCsv);
  EXPECT_FF_ERROR(csv::parse("a,b\"c\n"), ErrorCode::kBadCsv);
}

TEST(LoadCsv, LabelsByExactMatch) {
  const TableSchema schema{"y", "yes", {"g"}, std::nullopt};
  const auto c = parse_cohort("y,g\nyes,a\nno,a\nyes,b\n", schema);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_TRUE(c.rows[0].label);
  EXPECT_FALSE(c.rows[1].label);
  EXPECT_TRUE(c.rows[2].label);
  EXPECT_EQ(c.rows[2].ordinal, 2u);
  EXPECT_FALSE(parse_cohort("y,g\nYes,a\n", schema).rows[0].label);
  EXPECT_FALSE(parse_cohort("y,g\n yes,a\n", schema).rows[0].label);
}

TEST(LoadCsv, Errors) {
  const TableSchema schema{"y", "yes", {"g", "h"}, std::nullopt};
  EXPECT_FF_ERROR(parse_cohort("y,g\nyes,a\n", schema), ErrorCode::kMissingColumn);
  EXPECT_FF_ERROR(parse_cohort("", schema), ErrorCode::kEmptyFile);
  EXPECT_FF_ERROR(parse_cohort("y,g,h\n", schema), ErrorCode::kEmptyFile);
  EXPECT_FF_ERROR(parse_cohort("y,g,h\nyes,a\n", schema), ErrorCode::kBadCsv);
  EXPECT_FF_ERROR(parse_cohort("y,g,h\nyes,a|b,c\n", schema), ErrorCode::kBadCsv);
  EXPECT_FF_ERROR(parse_cohort("y,g\nyes,a\n", TableSchema{"y", "yes", {"y"}, std::nullopt}),
                  ErrorCode::kBadSchema);
}

TEST(LoadCsv, MissingValueReportsRow) {
  std::string text = "y,g,h\n";
  for (int i = 0; i < 10; ++i) text += i == 7 ? "no,,x\n" : "yes,a,x\n";
  try {
    parse_cohort(text, TableSchema{"y", "yes", {"g", "h"}, std::nullopt});
    FAIL() << "expected MissingValue";
  } catch (const MissingValueError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingValue);
    EXPECT_EQ(e.row(), 7u);
  }
}

TEST(LoadCsv, FileRoundTrip) {
  std::mt19937_64 rng(9);
  auto c = random_cohort(rng, 200);
  c.schema.id_column = "id";
  for (auto& row : c.rows) row.id = "r" + std::to_string(row.ordinal);
  const auto dir = std::filesystem::temp_directory_path() / "fairfeas_roundtrip";
  std::filesystem::create_directories(dir);
  const auto path = dir / "cohort.csv";
  write_file_atomic(path, format_cohort_csv(c));
  const auto back = load_csv(path, c.schema);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.rows[i].label, c.rows[i].label);
    EXPECT_EQ(back.rows[i].group_values, c.rows[i].group_values);
    EXPECT_EQ(back.rows[i].id, c.rows[i].id);
  }
  EXPECT_FF_ERROR(load_csv(dir / "absent.csv", c.schema), ErrorCode::kIoError);
  std::filesystem::remove_all(dir);
}

TEST(Schema, FromJson) {
  const auto s = schema_from_json(Json::parse(R"({"label":"y","positive":"1","sensitive":["a","b"]})"));
  EXPECT_EQ(s.label_column, "y");
  EXPECT_EQ(s.sensitive_columns, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(s.id_column);
  EXPECT_FF_ERROR(schema_from_json(Json::parse(R"({"label":"y"})")), ErrorCode::kBadSchema);
  EXPECT_FF_ERROR(schema_from_json(Json::parse(R"({"label":"y","positive":"1","sensitive":[]})")),
                  ErrorCode::kBadSchema);
}

TEST(GroupStats, CrossProductKeys) {
  const auto c = make_cohort({{"F", "A", true}, {"F", "B", false}, {"M", "A", true}, {"M", "B", true}});
  const auto s = group_stats(c, {{"sex", "race"}});
  ASSERT_EQ(s.groups.size(), 4u);
  EXPECT_EQ(s.groups[0].group_key, "F|A");
  EXPECT_EQ(s.groups[1].group_key, "F|B");
  EXPECT_EQ(s.groups[2].group_key, "M|A");
  EXPECT_EQ(s.groups[3].group_key, "M|B");
  EXPECT_EQ(s.grouping, "sex|race");
  // Keys follow schema order even when the grouping lists columns differently.
  EXPECT_EQ(group_stats(c, {{"race", "sex"}}).groups[0].group_key, "F|A");
}

TEST(GroupStats, DiabetesStyle) {
  // 520 rows: 192 female with 173 positive, 328 male with 147 positive.
  std::vector<std::tuple<std::string, std::string, bool>> rows;
  for (int i = 0; i < 192; ++i) rows.emplace_back("Female", "x", i < 173);
  for (int i = 0; i < 328; ++i) rows.emplace_back("Male", "x", i < 147);
  const auto s = group_stats(make_cohort(rows), {{"sex"}});
  EXPECT_NEAR(s.distribution_pct[0], 36.92, 0.01);
  EXPECT_NEAR(s.distribution_pct[1], 63.08, 0.01);
  EXPECT_NEAR(100 * s.groups[0].prevalence(), 90.10, 0.01);
  EXPECT_NEAR(100 * s.groups[1].prevalence(), 44.82, 0.01);
  EXPECT_NEAR(100 * *s.max_prevalence_diff, 45.28, 0.01);
}

TEST(GroupStats, SingleGroup) {
  const auto s = group_stats(make_cohort({{"F", "A", true}, {"F", "A", false}}), {{"sex"}});
  EXPECT_FALSE(s.max_prevalence_diff);
  EXPECT_FF_ERROR(max_pairwise_prevalence_diff(s.groups), ErrorCode::kTooFewGroups);
  EXPECT_FF_ERROR(group_stats(Cohort{sex_race_schema(), {}}, {{"sex"}}), ErrorCode::kEmptyGroup);
  EXPECT_FF_ERROR(group_stats(make_cohort({{"F", "A", true}}), {{"age"}}), ErrorCode::kBadGrouping);
}

TEST(GroupStats, SizesAndPercentagesAddUp) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const auto c = random_cohort(rng, 50 + t * 7);
    const auto s = group_stats(c, {{"sex", "race"}});
    std::int64_t n = 0;
    double pct = 0;
    for (std::size_t i = 0; i < s.groups.size(); ++i) {
      n += s.groups[i].n;
      pct += s.distribution_pct[i];
    }
    EXPECT_EQ(n, static_cast<std::int64_t>(c.size()));
    EXPECT_NEAR(pct, 100.0, 0.01);
  }
}

TEST(Bracketing, OneRefinementPerGroupIsEquality) {
  const auto c = make_cohort({{"F", "A", true}, {"F", "A", false}, {"M", "B", true}, {"M", "B", true}});
  const auto r = intersection_bracketing_check(c, {{"sex"}}, {{"sex", "race"}});
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.single_max_diff, r.intersected_max_diff);
}

TEST(Bracketing, RandomCohortsPass) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 300; ++t) {
    const auto c = random_cohort(rng, 20 + static_cast<int>(rng() % 200));
    for (const GroupingSpec& single : {GroupingSpec{{"sex"}}, GroupingSpec{{"race"}}}) {
      const auto r = intersection_bracketing_check(c, single, {{"sex", "race"}});
      ASSERT_TRUE(r.passed);
      ASSERT_LE(r.single_max_diff, r.intersected_max_diff + 1e-12);
    }
  }
}

TEST(Bracketing, RejectsNonRefinement) {
  const auto c = make_cohort({{"F", "A", true}, {"M", "B", false}});
  EXPECT_FF_ERROR(intersection_bracketing_check(c, {{"sex", "race"}}, {{"sex"}}), ErrorCode::kBadGrouping);
}

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion({70, 30}, 10), (std::vector<std::int64_t>{7, 3}));
  EXPECT_EQ(apportion({1, 1, 1}, 2), (std::vector<std::int64_t>{1, 1, 0}));
  EXPECT_EQ(apportion({5, 3, 2}, 10), (std::vector<std::int64_t>{5, 3, 2}));
  EXPECT_EQ(apportion({34, 33, 33}, 10), (std::vector<std::int64_t>{4, 3, 3}));
}

TEST(StratifiedSample, SeventyThirty) {
  std::vector<std::tuple<std::string, std::string, bool>> rows;
  for (int i = 0; i < 100; ++i) rows.emplace_back("F", "A", i < 70);
  const auto c = make_cohort(rows);
  const auto s = stratified_sample(c, {{"sex"}}, 10, 42);
  ASSERT_EQ(s.size(), 10u);
  int pos = 0;
  for (const auto& r : s.rows) pos += r.label;
  EXPECT_EQ(pos, 7);
}

TEST(StratifiedSample, IdentityDeterminismErrors) {
  std::mt19937_64 rng(14);
  const auto c = random_cohort(rng, 500);
  const GroupingSpec g{{"sex", "race"}};
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const auto all = stratified_sample(c, g, 500, seed);
    for (std::size_t i = 0; i < c.size(); ++i) ASSERT_EQ(all.rows[i].ordinal, i);
  }
  const auto a = stratified_sample(c, g, 123, 5);
  const auto b = stratified_sample(c, g, 123, 5);
  const auto d = stratified_sample(c, g, 123, 6);
  std::vector<std::size_t> oa, ob, od;
  for (const auto& r : a.rows) oa.push_back(r.ordinal);
  for (const auto& r : b.rows) ob.push_back(r.ordinal);
  for (const auto& r : d.rows) od.push_back(r.ordinal);
  EXPECT_EQ(oa, ob);
  EXPECT_NE(oa, od);
  const auto count = [&](const Cohort& x) {
    std::map<std::pair<std::string, bool>, int> m;
    for (const auto& r : x.rows) m[{r.group_values[0] + r.group_values[1], r.label}]++;
    return m;
  };
  EXPECT_EQ(count(a), count(d));
  EXPECT_FF_ERROR(stratified_sample(c, g, 501, 1), ErrorCode::kTargetTooLarge);
}

TEST(StratifiedSample, ProportionsWithinOneRow) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 40; ++t) {
    const auto c = random_cohort(rng, 300 + t * 13);
    const GroupingSpec g{{"sex", "race"}};
    const std::int64_t target = 50 + t * 5;
    const auto s = stratified_sample(c, g, target, static_cast<std::uint64_t>(t));
    ASSERT_EQ(static_cast<std::int64_t>(s.size()), target);
    std::map<std::pair<std::string, bool>, int> full, part;
    const auto pos = g.positions(c.schema);
    for (const auto& r : c.rows) full[{g.key(r, pos), r.label}]++;
    for (const auto& r : s.rows) part[{g.key(r, pos), r.label}]++;
    for (const auto& [k, n] : full) {
      const double exact = static_cast<double>(target) * n / static_cast<double>(c.size());
      ASSERT_LE(std::abs(part[k] - exact), 1.0);
    }
    // Prevalence drift per group is bounded by one row of the smallest stratum.
    const auto before = group_stats(c, g), after = group_stats(s, g);
    int smallest = INT32_MAX;
    for (const auto& [k, n] : part) {
      if (n > 0) smallest = std::min(smallest, n);
    }
    for (std::size_t i = 0; i < after.groups.size(); ++i) {
      for (const auto& gb : before.groups) {
        if (gb.group_key != after.groups[i].group_key) continue;
        ASSERT_LE(std::abs(gb.prevalence() - after.groups[i].prevalence()), 1.0 / smallest + 1e-12);
      }
    }
  }
}
