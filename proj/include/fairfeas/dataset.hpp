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

// Tabular cohorts: CSV ingestion against a schema, (intersectional) group
// statistics, prevalence bracketing checks and stratified down-sampling.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fairfeas/csv.hpp"
#include "fairfeas/error.hpp"
#include "fairfeas/metrics.hpp"

namespace fairfeas {

inline constexpr char kGroupSeparator = '|';

struct TableSchema {
  std::string label_column;
  std::string positive_value;
  std::vector<std::string> sensitive_columns;
  std::optional<std::string> id_column;

  void validate() const {
    if (label_column.empty() || sensitive_columns.empty()) {
      throw Error(ErrorCode::kBadSchema, "schema needs a label and at least one sensitive column");
    }
    if (std::find(sensitive_columns.begin(), sensitive_columns.end(), label_column) !=
        sensitive_columns.end()) {
      throw Error(ErrorCode::kBadSchema, "label column cannot be sensitive");
    }
    std::set<std::string> seen(sensitive_columns.begin(), sensitive_columns.end());
    if (seen.size() != sensitive_columns.size()) {
      throw Error(ErrorCode::kBadSchema, "duplicate sensitive column");
    }
  }
};

struct CohortRow {
  bool label = false;
  std::string label_value;                // raw cell, kept for lossless export
  std::vector<std::string> group_values;  // schema sensitive-column order
  std::size_t ordinal = 0;                // 0-based data row in the source
  std::optional<std::string> id;
};

struct Cohort {
  TableSchema schema;
  std::vector<CohortRow> rows;

  std::size_t size() const { return rows.size(); }
};

struct GroupingSpec {
  std::vector<std::string> columns;

  // Positions of the chosen columns in schema order.
  std::vector<std::size_t> positions(const TableSchema& schema) const {
    if (columns.empty()) throw Error(ErrorCode::kBadGrouping, "grouping needs a column");
    std::vector<std::size_t> pos;
    for (const auto& col : columns) {
      auto it = std::find(schema.sensitive_columns.begin(), schema.sensitive_columns.end(), col);
      if (it == schema.sensitive_columns.end()) {
        throw Error(ErrorCode::kBadGrouping, "'" + col + "' is not a sensitive column");
      }
      pos.push_back(static_cast<std::size_t>(it - schema.sensitive_columns.begin()));
    }
    std::sort(pos.begin(), pos.end());
    if (std::adjacent_find(pos.begin(), pos.end()) != pos.end()) {
      throw Error(ErrorCode::kBadGrouping, "grouping repeats a column");
    }
    return pos;
  }

  std::string key(const CohortRow& row, const std::vector<std::size_t>& pos) const {
    std::string k;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (i) k += kGroupSeparator;
      k += row.group_values[pos[i]];
    }
    return k;
  }

  std::string name() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out += kGroupSeparator;
      out += columns[i];
    }
    return out;
  }
};

inline Cohort parse_cohort(std::string_view text, const TableSchema& schema) {
  schema.validate();
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorCode::kEmptyFile, "no header row");
  const auto& header = records.front();
  const auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::kMissingColumn, "'" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = column(schema.label_column);
  std::vector<std::size_t> sens_cols;
  for (const auto& name : schema.sensitive_columns) sens_cols.push_back(column(name));
  std::optional<std::size_t> id_col;
  if (schema.id_column) id_col = column(*schema.id_column);

  Cohort cohort{schema, {}};
  cohort.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t ordinal = r - 1;
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::kBadCsv, "row " + std::to_string(ordinal) + " has " +
                                          std::to_string(rec.size()) + " fields, header has " +
                                          std::to_string(header.size()));
    }
    CohortRow row;
    row.ordinal = ordinal;
    row.label_value = rec[label_col];
    if (row.label_value.empty()) throw MissingValueError(ordinal, schema.label_column);
    row.label = row.label_value == schema.positive_value;
    for (std::size_t s = 0; s < sens_cols.size(); ++s) {
      const auto& value = rec[sens_cols[s]];
      if (value.empty()) throw MissingValueError(ordinal, schema.sensitive_columns[s]);
      if (value.find(kGroupSeparator) != std::string::npos) {
        throw Error(ErrorCode::kBadCsv, "row " + std::to_string(ordinal) +
                                            ": sensitive values may not contain '|'");
      }
      row.group_values.push_back(value);
    }
    if (id_col) row.id = rec[*id_col];
    cohort.rows.push_back(std::move(row));
  }
  if (cohort.rows.empty()) throw Error(ErrorCode::kEmptyFile, "no data rows");
  return cohort;
}

inline Cohort load_csv(const std::filesystem::path& path, const TableSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.empty()) throw Error(ErrorCode::kEmptyFile, path.string());
  return parse_cohort(text, schema);
}

// Writes the id (when present), label and sensitive columns.
inline std::string format_cohort_csv(const Cohort& c) {
  csv::Record header;
  if (c.schema.id_column) header.push_back(*c.schema.id_column);
  header.push_back(c.schema.label_column);
  header.insert(header.end(), c.schema.sensitive_columns.begin(),
                c.schema.sensitive_columns.end());
  std::string out = csv::format_record(header);
  for (const auto& row : c.rows) {
    csv::Record rec;
    if (c.schema.id_column) rec.push_back(row.id.value_or(""));
    rec.push_back(row.label_value);
    rec.insert(rec.end(), row.group_values.begin(), row.group_values.end());
    out += csv::format_record(rec);
  }
  return out;
}

struct CohortStats {
  std::string grouping;             // column names joined by '|'
  std::vector<GroupCounts> groups;  // sorted by key
  std::vector<double> distribution_pct;
  std::int64_t n = 0;
  std::int64_t positives = 0;
  double overall_prevalence = 0.0;
  std::optional<double> max_prevalence_diff;  // absent with a single group
};

inline CohortStats group_stats(const Cohort& c, const GroupingSpec& g) {
  const auto pos = g.positions(c.schema);
  if (c.rows.empty()) throw Error(ErrorCode::kEmptyGroup, "cohort has no rows");
  std::map<std::string, GroupCounts> by_key;
  for (const auto& row : c.rows) {
    const auto key = g.key(row, pos);
    auto& gc = by_key[key];
    gc.group_key = key;
    ++gc.n;
    gc.p_count += row.label ? 1 : 0;
  }
  CohortStats s;
  s.grouping = g.name();
  s.n = static_cast<std::int64_t>(c.rows.size());
  for (auto& [key, gc] : by_key) {
    s.positives += gc.p_count;
    s.distribution_pct.push_back(100.0 * static_cast<double>(gc.n) / static_cast<double>(s.n));
    s.groups.push_back(std::move(gc));
  }
  s.overall_prevalence = static_cast<double>(s.positives) / static_cast<double>(s.n);
  if (s.groups.size() >= 2) s.max_prevalence_diff = max_pairwise_prevalence_diff(s.groups);
  return s;
}

struct CoarseGroupCheck {
  std::string key;
  double prevalence = 0.0;
  double min_refined = 0.0;
  double max_refined = 0.0;
  std::vector<std::string> refined_keys;
  bool within = false;
};

struct BracketingReport {
  std::string single;
  std::string intersected;
  double single_max_diff = 0.0;       // 0 when only one group exists
  double intersected_max_diff = 0.0;
  std::vector<CoarseGroupCheck> groups;
  bool diff_ordered = false;  // single_max_diff <= intersected_max_diff
  bool passed = false;
};

// Every coarse group's prevalence must lie between the prevalences of the
// finer groups that partition it, hence the coarse maximum prevalence gap
// cannot exceed the fine one.
inline BracketingReport intersection_bracketing_check(const Cohort& c,
                                                      const GroupingSpec& single,
                                                      const GroupingSpec& intersected) {
  const auto coarse_pos = single.positions(c.schema);
  const auto fine_pos = intersected.positions(c.schema);
  if (!std::includes(fine_pos.begin(), fine_pos.end(), coarse_pos.begin(), coarse_pos.end())) {
    throw Error(ErrorCode::kBadGrouping, "intersected grouping must contain the single grouping");
  }
  const auto coarse = group_stats(c, single);
  const auto fine = group_stats(c, intersected);
  std::map<std::string, double> fine_prev;
  for (const auto& gc : fine.groups) fine_prev[gc.group_key] = gc.prevalence();
  std::map<std::string, std::set<std::string>> members;
  for (const auto& row : c.rows) {
    members[single.key(row, coarse_pos)].insert(intersected.key(row, fine_pos));
  }

  BracketingReport rep;
  rep.single = coarse.grouping;
  rep.intersected = fine.grouping;
  rep.single_max_diff = coarse.max_prevalence_diff.value_or(0.0);
  rep.intersected_max_diff = fine.max_prevalence_diff.value_or(0.0);
  bool all_within = true;
  for (const auto& gc : coarse.groups) {
    CoarseGroupCheck chk;
    chk.key = gc.group_key;
    chk.prevalence = gc.prevalence();
    chk.min_refined = 1.0;
    chk.max_refined = 0.0;
    for (const auto& fk : members.at(gc.group_key)) {
      chk.refined_keys.push_back(fk);
      chk.min_refined = std::min(chk.min_refined, fine_prev.at(fk));
      chk.max_refined = std::max(chk.max_refined, fine_prev.at(fk));
    }
    // Pooled prevalences are exact ratios; allow for one rounding step.
    constexpr double tol = 1e-12;
    chk.within = chk.prevalence >= chk.min_refined - tol && chk.prevalence <= chk.max_refined + tol;
    all_within = all_within && chk.within;
    rep.groups.push_back(std::move(chk));
  }
  rep.diff_ordered = rep.single_max_diff <= rep.intersected_max_diff + 1e-12;
  rep.passed = all_within && rep.diff_ordered;
  return rep;
}

namespace detail {

// Unbiased draw from [0, bound) using only the engine's raw output, so the
// sequence is identical on every standard library.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace detail

// Largest-remainder apportionment of target_n over `sizes`; ties go to the
// earlier entry.
inline std::vector<std::int64_t> apportion(const std::vector<std::int64_t>& sizes,
                                           std::int64_t target_n) {
  std::int64_t total = 0;
  for (auto s : sizes) total += s;
  std::vector<std::int64_t> quota(sizes.size(), 0);
  if (total == 0) return quota;
  std::vector<std::pair<std::int64_t, std::size_t>> rem;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto prod = static_cast<__int128>(target_n) * sizes[i];
    quota[i] = static_cast<std::int64_t>(prod / total);
    rem.emplace_back(static_cast<std::int64_t>(prod % total), i);
    assigned += quota[i];
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t i = 0; i < target_n - assigned; ++i) ++quota[rem[static_cast<std::size_t>(i)].second];
  return quota;
}

// Down-samples to exactly target_n rows, stratified on (group key, label).
// Rows keep their original order.
inline Cohort stratified_sample(const Cohort& c, const GroupingSpec& g, std::int64_t target_n,
                                std::uint64_t seed) {
  if (target_n < 0 || target_n > static_cast<std::int64_t>(c.rows.size())) {
    throw Error(ErrorCode::kTargetTooLarge, "target " + std::to_string(target_n) +
                                                " exceeds cohort size " +
                                                std::to_string(c.rows.size()));
  }
  const auto pos = g.positions(c.schema);
  std::map<std::pair<std::string, bool>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    strata[{g.key(c.rows[i], pos), c.rows[i].label}].push_back(i);
  }
  std::vector<std::int64_t> sizes;
  for (const auto& [key, members] : strata) sizes.push_back(static_cast<std::int64_t>(members.size()));
  const auto quota = apportion(sizes, target_n);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  std::size_t s = 0;
  for (auto& [key, members] : strata) {
    // Partial Fisher-Yates: the first quota slots end up uniformly chosen.
    const auto take = static_cast<std::size_t>(quota[s++]);
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + detail::uniform_below(rng, members.size() - i);
      std::swap(members[i], members[j]);
    }
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(keep.begin(), keep.end());
  Cohort out{c.schema, {}};
  out.rows.reserve(keep.size());
  for (auto i : keep) out.rows.push_back(c.rows[i]);
  return out;
}

}  // namespace fairfeas
