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

// Command-line front end. run_cli() takes its output streams as parameters so
// tests can drive it in-process.

#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairfeas/fairfeas.hpp"

namespace fairfeas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kDomainError, "cannot parse " + what + " '" + s + "'");
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kDomainError, "cannot parse " + what + " '" + s + "'");
}

inline std::vector<double> parse_k_grid(const std::string& s) {
  if (s.empty()) return default_k_grid();
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_real(tok, "k percentage"));
  return out;
}

// "line:y=x", "line:m,b", "const:c", "acc-band", "ppv-region"
struct FamilyArgs {
  std::string spec = "line:y=x";
  double gamma = 0.05;
  double eps_p = 0.2;
  std::optional<double> p;
  int steps = 5;
};

inline CurveFamily make_family(const FamilyArgs& a, const DetectorGrid& grid) {
  const auto& s = a.spec;
  if (s == "line:y=x") return line_family(1.0, 0.0);
  if (s.rfind("line:", 0) == 0) {
    const auto parts = split(s.substr(5), ',');
    if (parts.size() != 2) throw Error(ErrorCode::kDomainError, "line family needs 'line:m,b'");
    return line_family(parse_real(parts[0], "slope"), parse_real(parts[1], "intercept"));
  }
  if (s.rfind("const:", 0) == 0) return constant_family(parse_real(s.substr(6), "constant"));
  if (s == "acc-band") return acc_band_family(RegionSpec{a.gamma, a.eps_p, a.p}, grid);
  if (s == "ppv-region") {
    if (!a.p) throw Error(ErrorCode::kDomainError, "ppv-region needs --p");
    return ppv_region_family(*a.p, a.eps_p, a.gamma, a.steps);
  }
  throw Error(ErrorCode::kDomainError, "unknown curve family '" + s + "'");
}

inline Fill parse_fill(const std::string& s) {
  if (s == "below") return Fill::kBelow;
  if (s == "above") return Fill::kAbove;
  if (s == "curve") return Fill::kCurveOnly;
  throw Error(ErrorCode::kDomainError, "fill must be below, above or curve");
}

// "A:P:N,B:P:N"
inline std::vector<SelectionGroup> parse_groups(const std::string& s) {
  std::vector<SelectionGroup> out;
  for (const auto& tok : split(s, ',')) {
    const auto parts = split(tok, ':');
    if (parts.size() != 3 || parts[0].empty()) {
      throw Error(ErrorCode::kDomainError, "groups are given as KEY:POSITIVES:NEGATIVES");
    }
    out.push_back({parts[0], parse_int(parts[1], "positives"), parse_int(parts[2], "negatives")});
  }
  return out;
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

}  // namespace detail

struct AreaArgs {
  double gamma = 0.05;
  double eps_p = 0.2;
  std::optional<double> p;
};

inline int cmd_area(const AreaArgs& a, std::ostream& out) {
  out << format_real(fairness_area_acc(RegionSpec{a.gamma, a.eps_p, a.p})) << '\n';
  return kExitOk;
}

struct RegionArgs {
  int n = 100;
  double eps = 0.0;
  double step = 0.01;
  std::optional<double> ppv_min;
  std::optional<double> ppv_max;
  bool strict = false;
  std::optional<double> p1;
  std::optional<double> p2;
  bool single_cell = false;
  std::string out_dir;
};

inline int cmd_region(const RegionArgs& a, std::ostream& out) {
  const auto disc = Discretization::with_defaults(a.n);
  disc.validate();
  HeatmapOptions opts;
  opts.eps_max = a.eps;
  opts.p_grid_step = a.step;
  opts.strict = a.strict;
  if (a.ppv_min || a.ppv_max) {
    const auto idx = [&](double x) { return static_cast<int>(std::lround(x * a.n)); };
    const IndexRange w{a.ppv_min ? idx(*a.ppv_min) : disc.v.lo, a.ppv_max ? idx(*a.ppv_max) : disc.v.hi};
    if (w.empty() || w.lo < disc.v.lo || w.hi > disc.v.hi) {
      throw Error(ErrorCode::kDomainError, "PPV window must be non-empty and inside [0, 0.99]");
    }
    opts.ppv_window = w;
  }
  if (a.single_cell) {
    if (!a.p1 || !a.p2) throw Error(ErrorCode::kDomainError, "--single-cell needs --p1 and --p2");
    const auto to_idx = [&](double p) {
      const int i = static_cast<int>(std::lround(p * a.n));
      if (std::abs(p * a.n - i) > 1e-9) {
        throw Error(ErrorCode::kBadPrevalence, "prevalence must be a multiple of 1/N");
      }
      return i;
    };
    JointCountQuery q;
    q.p1_idx = to_idx(*a.p1);
    q.p2_idx = to_idx(*a.p2);
    q.eps_max_idx = eps_to_index(a.eps, a.n);
    q.strict = a.strict;
    auto s1 = enumerate_triples(q.p1_idx, disc);
    auto s2 = enumerate_triples(q.p2_idx, disc);
    if (opts.ppv_window) {
      s1 = s1.restrict_v(*opts.ppv_window);
      s2 = s2.restrict_v(*opts.ppv_window);
    }
    out << count_joint(q, s1, s2, disc) << '\n';
    return kExitOk;
  }
  const auto hm = heatmap(disc, opts);
  out << hm.total << '\n';
  if (!a.out_dir.empty()) {
    const std::filesystem::path dir(a.out_dir);
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "heatmap.csv", hm.to_csv());
    write_file_atomic(dir / "heatmap.pgm", hm.to_pgm());
    Json meta;
    meta["n"] = a.n;
    meta["eps"] = a.eps;
    meta["p_grid_step"] = a.step;
    meta["strict"] = a.strict;
    meta["ppv_window"] = opts.ppv_window ? Json::array({opts.ppv_window->lo, opts.ppv_window->hi})
                                         : Json(nullptr);
    meta["prevalence_idx"] = hm.p_idx;
    meta["total"] = hm.total;
    write_file_atomic(dir / "heatmap.json", meta.dump(2) + "\n");
  }
  return kExitOk;
}

struct PlanimeterArgs {
  std::optional<int> g;
  std::optional<int> b;
  std::optional<double> err;
  detail::FamilyArgs family;
  std::string fill = "curve";
  std::string out;
  std::string mask;
  bool circle_sum = false;
};

inline int cmd_planimeter(const PlanimeterArgs& a, std::ostream& out) {
  int g = 0;
  if (a.g) {
    g = *a.g;
  } else if (a.b && a.err) {
    if (*a.b < 1 || !(*a.err > 0.0)) {
      throw Error(ErrorCode::kBadGrid, "--b must be positive and --err must exceed 0");
    }
    g = required_grid_size(*a.b, *a.err);
  } else {
    throw Error(ErrorCode::kBadGrid, "give --g or both --b and --err");
  }
  const DetectorGrid grid(g);
  const auto fill = detail::parse_fill(a.fill);
  const auto fam = detail::make_family(a.family, grid);
  const auto est = estimate_area(grid, fam, fill);
  Json j = to_json(est);
  j["family"] = a.family.spec;
  j["fill"] = a.fill;
  if (a.circle_sum) j["circle_sum_area"] = circle_sum_area(est);
  detail::emit(a.out, j.dump(2) + "\n", out);
  if (!a.mask.empty()) write_file_atomic(a.mask, est.to_pgm());
  return kExitOk;
}

struct SelectArgs {
  std::string groups;
  std::int64_t k = 1;
  double cap = 0.7;
  double lb = 0.8;
  double ub = 1.2;
  std::string reference;
};

inline int cmd_select(const SelectArgs& a, std::ostream& out) {
  SelectionInstance inst;
  inst.groups = detail::parse_groups(a.groups);
  inst.k = a.k;
  inst.ppv_cap = a.cap;
  inst.lb = a.lb;
  inst.ub = a.ub;
  if (!a.reference.empty()) inst.reference_group = a.reference;
  const auto res = solve_exact(inst);
  Json j = to_json(inst, res);
  const auto unconstrained = fairfeas::detail::unconstrained_optimum(inst);
  j["unconstrained_tp"] = unconstrained ? Json(*unconstrained) : Json(nullptr);
  out << j.dump(2) << '\n';
  return res.status == SelectionStatus::kOptimal ? kExitOk : kExitInfeasible;
}

struct AnalyzeArgs {
  std::string csv;
  std::string schema;
  std::vector<std::string> groups;
  bool intersect = false;
  double cap = 0.7;
  double lb = 0.8;
  double ub = 1.2;
  std::string k_grid;
  std::int64_t delta_tp = 0;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> sample_n;
  std::string dataset;
  std::string out;
  std::string table_csv;
  std::optional<double> emit_rows;
};

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto schema = load_schema(a.schema);
  auto cohort = load_csv(a.csv, schema);
  const auto grid = detail::parse_k_grid(a.k_grid);

  std::vector<GroupingSpec> groupings;
  if (a.groups.empty()) {
    for (const auto& col : schema.sensitive_columns) groupings.push_back({{col}});
  } else {
    for (const auto& g : a.groups) groupings.push_back({detail::split(g, ',')});
  }
  for (const auto& g : groupings) g.positions(schema);
  std::optional<GroupingSpec> joint;
  if (a.intersect) {
    GroupingSpec all;
    for (const auto& g : groupings) {
      for (const auto& col : g.columns) {
        if (std::find(all.columns.begin(), all.columns.end(), col) == all.columns.end()) {
          all.columns.push_back(col);
        }
      }
    }
    if (all.columns.size() < 2) {
      throw Error(ErrorCode::kBadGrouping, "--intersect needs at least two grouping columns");
    }
    joint = all;
  }

  Json report;
  report["dataset"] = a.dataset.empty() ? std::filesystem::path(a.csv).stem().string() : a.dataset;
  report["schema"] = to_json(schema);
  report["rows_loaded"] = cohort.size();
  if (a.sample_n) {
    const GroupingSpec strata{schema.sensitive_columns};
    cohort = stratified_sample(cohort, strata, *a.sample_n, a.seed);
    report["sample"] = {{"n", *a.sample_n}, {"seed", a.seed}, {"strata", strata.name()}};
  }
  report["n"] = cohort.size();

  KScanOptions kopts;
  kopts.ppv_cap = a.cap;
  kopts.lb = a.lb;
  kopts.ub = a.ub;
  kopts.k_grid_pct = grid;
  kopts.tp_slack = a.delta_tp;
  report["constraints"] = {{"ppv_cap", a.cap}, {"lb", a.lb}, {"ub", a.ub}, {"delta_tp", a.delta_tp}};

  std::vector<GroupingSpec> scanned = groupings;
  if (joint) scanned.push_back(*joint);
  std::string table = summary_table_header();
  Json results = Json::array();
  for (const auto& g : scanned) {
    const auto stats = group_stats(cohort, g);
    Json entry;
    entry["stats"] = to_json(stats);
    if (stats.groups.size() > kMaxSelectionGroups) {
      entry["k_scan"] = nullptr;
      entry["skipped"] = "more than " + std::to_string(kMaxSelectionGroups) + " groups";
      results.push_back(std::move(entry));
      continue;
    }
    const auto scan = k_scan(stats, kopts);
    entry["k_scan"] = to_json(scan);
    if (a.emit_rows) {
      auto k = static_cast<std::int64_t>(std::llround(*a.emit_rows / 100.0 * static_cast<double>(stats.n)));
      k = std::clamp<std::int64_t>(k, 1, stats.n);
      const auto inst = selection_instance(stats, k, kopts);
      const auto res = solve_exact(inst);
      Json sel = to_json(inst, res);
      if (res.status == SelectionStatus::kOptimal && cohort.size() <= 10'000) {
        sel["rows"] = realize_selection(cohort, g, inst, res.allocation);
      }
      entry["selection"] = std::move(sel);
    }
    table += csv::format_record(summary_table_row(report["dataset"].get<std::string>(), stats, scan));
    results.push_back(std::move(entry));
  }
  report["groupings"] = std::move(results);
  if (joint) {
    Json checks = Json::array();
    for (const auto& g : groupings) checks.push_back(to_json(intersection_bracketing_check(cohort, g, *joint)));
    report["bracketing"] = std::move(checks);
  }
  detail::emit(a.out, report.dump(2) + "\n", out);
  if (!a.table_csv.empty()) write_file_atomic(a.table_csv, table);
  return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feasibility analysis for group fairness constraints", "fairfeas"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "1.0.0");

  AreaArgs area;
  auto* area_cmd = app.add_subcommand("area", "Size of the accuracy fairness region");
  area_cmd->add_option("--gamma", area.gamma, "Tolerance on each metric difference");
  area_cmd->add_option("--eps-p", area.eps_p, "Prevalence difference between the groups");
  area_cmd->add_option("--p", area.p, "Prevalence of group 1 (optional check)");

  RegionArgs region;
  auto* region_cmd = app.add_subcommand("region", "Count feasible discretized model pairs");
  region_cmd->add_option("--n", region.n, "Discretization denominator N");
  region_cmd->add_option("--eps", region.eps, "Largest allowed metric difference");
  region_cmd->add_option("--step", region.step, "Prevalence grid step");
  region_cmd->add_option("--ppv-min", region.ppv_min, "Lower end of the PPV window");
  region_cmd->add_option("--ppv-max", region.ppv_max, "Upper end of the PPV window");
  region_cmd->add_flag("--strict", region.strict, "Require differences strictly below eps");
  region_cmd->add_option("--p1", region.p1, "Group 1 prevalence for --single-cell");
  region_cmd->add_option("--p2", region.p2, "Group 2 prevalence for --single-cell");
  region_cmd->add_flag("--single-cell", region.single_cell, "Count one prevalence pair only");
  region_cmd->add_option("--out-dir", region.out_dir, "Directory for heatmap CSV, PGM and JSON");

  PlanimeterArgs plan;
  auto* plan_cmd = app.add_subcommand("planimeter", "Estimate an area with a dot planimeter");
  plan_cmd->add_option("--g", plan.g, "Detectors per side");
  plan_cmd->add_option("--b", plan.b, "Critical points per curve, sets g with --err");
  plan_cmd->add_option("--err", plan.err, "Target absolute error, sets g with --b");
  plan_cmd->add_option("--family", plan.family.spec,
                       "line:y=x | line:M,B | const:C | acc-band | ppv-region");
  plan_cmd->add_option("--fill", plan.fill, "below | above | curve");
  plan_cmd->add_option("--gamma", plan.family.gamma, "Tolerance for the region families");
  plan_cmd->add_option("--eps-p", plan.family.eps_p, "Prevalence difference for the region families");
  plan_cmd->add_option("--p", plan.family.p, "Group 1 prevalence");
  plan_cmd->add_option("--steps", plan.family.steps, "Tolerance samples per axis for ppv-region");
  plan_cmd->add_option("--out", plan.out, "Estimate JSON path (default stdout)");
  plan_cmd->add_option("--mask", plan.mask, "Detector mask PGM path");
  plan_cmd->add_flag("--circle-sum", plan.circle_sum, "Also report the disc-sum area");

  SelectArgs sel;
  auto* sel_cmd = app.add_subcommand("select", "Solve one constrained top-k selection");
  sel_cmd->add_option("--groups", sel.groups, "Groups as KEY:POSITIVES:NEGATIVES,...")->required();
  sel_cmd->add_option("--k", sel.k, "List size")->required()->default_str("");
  sel_cmd->add_option("--cap", sel.cap, "Upper limit on list precision");
  sel_cmd->add_option("--lb", sel.lb, "Lower disparity ratio bound");
  sel_cmd->add_option("--ub", sel.ub, "Upper disparity ratio bound (inf disables)");
  sel_cmd->add_option("--reference", sel.reference, "Reference group key (default: largest)");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Feasibility report for a tabular cohort");
  an_cmd->add_option("--csv", an.csv, "Input CSV with a header row")->required();
  an_cmd->add_option("--schema", an.schema, "Schema JSON")->required();
  an_cmd->add_option("--group", an.groups,
                     "Grouping columns, comma-joined for an explicit intersection (repeatable)")
      ->default_str("each sensitive column");
  an_cmd->add_flag("--intersect", an.intersect, "Also analyze the intersection of all groupings");
  an_cmd->add_option("--cap", an.cap, "Upper limit on list precision");
  an_cmd->add_option("--lb", an.lb, "Lower disparity ratio bound");
  an_cmd->add_option("--ub", an.ub, "Upper disparity ratio bound (inf disables)");
  an_cmd->add_option("--k-grid", an.k_grid, "Comma-separated list sizes in percent (default 5..100 step 5)");
  an_cmd->add_option("--delta-tp", an.delta_tp, "Allowed true-positive shortfall for an optimal k");
  an_cmd->add_option("--seed", an.seed, "Seed for --sample-n");
  an_cmd->add_option("--sample-n", an.sample_n, "Stratified sample size");
  an_cmd->add_option("--dataset", an.dataset, "Dataset name for reports (default: CSV stem)");
  an_cmd->add_option("--out", an.out, "Report JSON path (default stdout)");
  an_cmd->add_option("--table-csv", an.table_csv, "Summary table CSV path");
  an_cmd->add_option("--emit-rows", an.emit_rows, "Also solve at this k percent and list selected rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*area_cmd) return cmd_area(area, out);
    if (*region_cmd) return cmd_region(region, out);
    if (*plan_cmd) return cmd_planimeter(plan, out);
    if (*sel_cmd) return cmd_select(sel, out);
    if (*an_cmd) return cmd_analyze(an, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fairfeas::cli
