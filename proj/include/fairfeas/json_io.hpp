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

// JSON and table serialization for reports, plus schema config loading.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fairfeas/csv.hpp"
#include "fairfeas/dataset.hpp"
#include "fairfeas/error.hpp"
#include "fairfeas/planimeter.hpp"
#include "fairfeas/region.hpp"
#include "fairfeas/selection.hpp"
#include "json.hpp"

namespace fairfeas {

using Json = nlohmann::ordered_json;

// {"label": name, "positive": literal, "sensitive": [names], "id": optional}
inline TableSchema schema_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kBadSchema, "schema must be a JSON object");
  TableSchema s;
  try {
    s.label_column = j.at("label").get<std::string>();
    s.positive_value = j.at("positive").get<std::string>();
    s.sensitive_columns = j.at("sensitive").get<std::vector<std::string>>();
    if (j.contains("id") && !j.at("id").is_null()) s.id_column = j.at("id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadSchema, e.what());
  }
  s.validate();
  return s;
}

inline TableSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open schema " + path.string());
  try {
    return schema_from_json(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kBadSchema, e.what());
  }
}

inline Json to_json(const TableSchema& s) {
  Json j;
  j["label"] = s.label_column;
  j["positive"] = s.positive_value;
  j["sensitive"] = s.sensitive_columns;
  if (s.id_column) j["id"] = *s.id_column;
  return j;
}

namespace detail {

inline Json rate_json(const Rate& r) { return r ? Json(*r) : Json(nullptr); }

inline Json opt_json(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const CohortStats& s) {
  Json j;
  j["grouping"] = s.grouping;
  j["n"] = s.n;
  j["positives"] = s.positives;
  j["overall_prevalence"] = s.overall_prevalence;
  j["max_prevalence_diff"] = s.max_prevalence_diff ? Json(*s.max_prevalence_diff) : Json(nullptr);
  Json groups = Json::array();
  for (std::size_t i = 0; i < s.groups.size(); ++i) {
    const auto& g = s.groups[i];
    groups.push_back({{"key", g.group_key},
                      {"n", g.n},
                      {"positives", g.p_count},
                      {"prevalence", g.prevalence()},
                      {"distribution_pct", s.distribution_pct[i]}});
  }
  j["groups"] = std::move(groups);
  return j;
}

inline Json to_json(const BracketingReport& r) {
  Json j;
  j["single"] = r.single;
  j["intersected"] = r.intersected;
  j["single_max_diff"] = r.single_max_diff;
  j["intersected_max_diff"] = r.intersected_max_diff;
  j["diff_ordered"] = r.diff_ordered;
  j["passed"] = r.passed;
  Json groups = Json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"key", g.key},
                      {"prevalence", g.prevalence},
                      {"min_refined", g.min_refined},
                      {"max_refined", g.max_refined},
                      {"refined", g.refined_keys},
                      {"within", g.within}});
  }
  j["groups"] = std::move(groups);
  return j;
}

inline Json to_json(const KScanReport& r) {
  Json j;
  j["grouping"] = r.grouping;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k_pct", row.k_pct},
                    {"k_abs", row.k_abs},
                    {"unconstrained_tp", detail::opt_json(row.unconstrained_tp)},
                    {"constrained_tp", detail::opt_json(row.constrained_tp)},
                    {"optimal", row.optimal}});
  }
  j["rows"] = std::move(rows);
  j["summary"] = r.summary;
  return j;
}

inline Json to_json(const SelectionInstance& inst, const SelectionResult& r) {
  Json j;
  j["status"] = r.status == SelectionStatus::kOptimal ? "optimal" : "infeasible";
  j["k"] = inst.k;
  j["reference_group"] = inst.groups.at(r.reference).key;
  if (r.status != SelectionStatus::kOptimal) return j;
  j["tp_total"] = r.tp_total;
  j["list_ppv"] = r.list_ppv;
  j["recall"] = detail::rate_json(r.recall);
  Json groups = Json::array();
  for (std::size_t i = 0; i < r.groups.size(); ++i) {
    const auto& g = r.groups[i];
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    groups.push_back({{"key", g.key},
                      {"tp", r.allocation.tp[i]},
                      {"fp", r.allocation.fp[i]},
                      {"fpr", detail::rate_json(g.fpr)},
                      {"fnr", detail::rate_json(g.fnr)},
                      {"ppv", detail::rate_json(g.ppv)},
                      {"fpr_disparity", opt(g.fpr_disparity)},
                      {"fnr_disparity", opt(g.fnr_disparity)},
                      {"ppv_disparity", opt(g.ppv_disparity)}});
  }
  j["groups"] = std::move(groups);
  return j;
}

inline Json to_json(const PlanimeterEstimate& e) {
  return {{"g", e.g}, {"satisfied", e.satisfied}, {"total", e.total}, {"fraction", e.fraction}};
}

namespace detail {

inline std::string pct2(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << x;
  return os.str();
}

inline std::string join_groups(const CohortStats& s, bool prevalence) {
  std::string out;
  for (std::size_t i = 0; i < s.groups.size(); ++i) {
    if (i) out += "; ";
    const double v = prevalence ? 100.0 * s.groups[i].prevalence() : s.distribution_pct[i];
    out += s.groups[i].group_key + ": " + pct2(v);
  }
  return out;
}

}  // namespace detail

inline constexpr const char* kSummaryTableHeader[] = {
    "Dataset", "Grouping", "Group Distribution %", "Group Prevalence %",
    "Maximum Prevalence Difference %", "Optimal k Range"};

// One summary-table row per grouping, e.g. "Female: 51.97; Male: 48.03".
inline csv::Record summary_table_row(const std::string& dataset, const CohortStats& s,
                                     const KScanReport& scan) {
  return {dataset,
          s.grouping,
          detail::join_groups(s, false),
          detail::join_groups(s, true),
          detail::pct2(100.0 * s.max_prevalence_diff.value_or(0.0)),
          scan.summary};
}

inline std::string summary_table_header() {
  return csv::format_record(csv::Record(std::begin(kSummaryTableHeader), std::end(kSummaryTableHeader)));
}

}  // namespace fairfeas
