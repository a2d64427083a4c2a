// Copyright 2026 The edgewatch Authors
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

// edgewatch command line: synth, timeline, drilldown, sweep, calibrate, rank.
//
// Exit codes: 0 success, 1 fatal input error, 2 configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edgewatch/config.hpp"
#include "edgewatch/edgewatch.hpp"

namespace fs = std::filesystem;
using namespace edgewatch;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitConfig = 2;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

FlowLog load_flows(const std::string& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  auto log = parse_flow_log(in, strict ? OnMalformed::abort : OnMalformed::skip);
  if (!log.errors.empty()) {
    std::cerr << "warning: skipped " << log.errors.size()
              << " malformed line(s), first at line " << log.errors.front().line
              << ": " << log.errors.front().reason << '\n';
  }
  return log;
}

/// "a:b:step" (inclusive) or a comma separated list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto parts = detail::split(text, ':');
  if (parts.size() == 3) {
    const auto a = detail::parse_number<double>(detail::trim(parts[0]));
    const auto b = detail::parse_number<double>(detail::trim(parts[1]));
    const auto s = detail::parse_number<double>(detail::trim(parts[2]));
    if (!a || !b || !s || !(*s > 0.0) || *b < *a) {
      throw ConfigError("bad grid '" + text + "'");
    }
    const auto n = static_cast<std::size_t>(std::floor((*b - *a) / *s + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
      // round away the accumulated binary noise so CSV values stay readable
      out.push_back(std::round((*a + static_cast<double>(i) * *s) * 1e12) / 1e12);
    }
    return out;
  }
  for (const auto part : detail::split(text, ',')) {
    const auto v = detail::parse_number<double>(detail::trim(part));
    if (!v) throw ConfigError("bad grid value in '" + text + "'");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto part : detail::split(text, ',')) {
    const auto v = detail::parse_number<std::size_t>(detail::trim(part));
    if (!v) throw ConfigError("bad count in '" + text + "'");
    out.push_back(*v);
  }
  return out;
}

struct GlobalOptions {
  std::string config_file;
  std::string output_dir = ".";
  std::optional<double> delta_t, step, epsilon, event_threshold,
      major_threshold;
  std::optional<std::size_t> min_flow, min_pts, top_stars;
  std::string percentiles, utc_offset, feature_mode;
  bool strict = false;
};

/// Flags first, then the config file on top.
PipelineConfig make_pipeline_config(const GlobalOptions& g) {
  PipelineConfig cfg;
  if (g.delta_t) cfg.delta_t_days = *g.delta_t;
  if (g.step) cfg.step_days = *g.step;
  if (g.min_flow) cfg.features.min_flow = *g.min_flow;
  if (g.epsilon) cfg.cluster.epsilon = *g.epsilon;
  if (g.min_pts) cfg.cluster.min_pts = *g.min_pts;
  if (g.event_threshold) cfg.event_threshold = *g.event_threshold;
  if (g.major_threshold) cfg.major_threshold = *g.major_threshold;
  if (g.top_stars) cfg.top_stars = *g.top_stars;
  if (!g.percentiles.empty()) cfg.features.percentiles = parse_grid(g.percentiles);
  if (!g.utc_offset.empty()) cfg.utc_offset = parse_utc_offset(g.utc_offset);
  if (g.feature_mode == "mean_std") {
    cfg.features.mode = FeatureMode::mean_std;
  } else if (!g.feature_mode.empty() && g.feature_mode != "percentiles") {
    throw ConfigError("unknown feature mode '" + g.feature_mode + "'");
  }
  if (!g.config_file.empty()) {
    std::string text;
    try {
      text = read_file(g.config_file);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
    apply_pipeline_config(text, cfg);
  }
  try {
    validate(cfg);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

fs::path output_path(const GlobalOptions& g, const std::string& explicit_path,
                     const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(g.output_dir) / default_name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-node change detection from passive CDN flow logs"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_file,
                 "Pipeline YAML file; its values override flags");
  app.add_option("--output-dir", g.output_dir, "Directory for outputs");
  app.add_option("--delta-t", g.delta_t, "Snapshot width in days (7)");
  app.add_option("--step", g.step, "Snapshot step in days (1)");
  app.add_option("--min-flow", g.min_flow, "Minimum flows per cache (50)");
  app.add_option("--percentiles", g.percentiles,
                 "Feature percentiles, e.g. 20,35,50,65,80");
  app.add_option("--feature-mode", g.feature_mode, "percentiles or mean_std");
  app.add_option("--epsilon", g.epsilon, "DBSCAN epsilon (0.04)");
  app.add_option("--min-pts", g.min_pts, "DBSCAN min points (5)");
  app.add_option("--event-threshold", g.event_threshold, "CD event level (10)");
  app.add_option("--major-threshold", g.major_threshold, "CD major level (50)");
  app.add_option("--utc-offset", g.utc_offset, "Midnight zone, e.g. +01:00");
  app.add_option("--top-stars", g.top_stars, "Contributors reported (3)");
  app.add_flag("--strict", g.strict, "Abort on the first malformed log line");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled trace");
  std::string synth_file, trace_out, gt_out;
  std::optional<std::uint64_t> seed_override;
  synth->add_option("spec", synth_file, "Generator YAML")->required();
  synth->add_option("--trace", trace_out, "Trace output (trace.tsv)");
  synth->add_option("--ground-truth", gt_out, "Labels output (ground_truth.tsv)");
  synth->add_option("--seed", seed_override, "Override the seed");

  // timeline
  auto* timeline = app.add_subcommand("timeline", "CD timeline of a trace");
  std::string input;
  std::string timeline_out;
  bool dump = false;
  timeline->add_option("input", input, "Flow log")->required();
  timeline->add_option("-o,--output", timeline_out, "Timeline CSV (timeline.csv)");
  timeline->add_flag("--dump", dump,
                     "Also write per-snapshot feature and cluster CSVs");

  // drilldown
  auto* drill = app.add_subcommand("drilldown", "Per-star report of one step");
  std::size_t entry = 0;
  bool force = false;
  std::string drill_out;
  drill->add_option("input", input, "Flow log")->required();
  drill->add_option("--entry", entry, "Timeline entry (snapshot index)")
      ->required();
  drill->add_flag("--force", force, "Report even if the entry is not flagged");
  drill->add_option("-o,--output", drill_out, "Report CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Epsilon sweep against labels");
  std::string gt_in, grid_text = "0.005:0.2:0.005", sweep_out;
  std::size_t sweep_snapshot = 0;
  sweep->add_option("input", input, "Flow log")->required();
  sweep->add_option("--ground-truth", gt_in, "Labels TSV")->required();
  sweep->add_option("--grid", grid_text, "a:b:step or comma list");
  sweep->add_option("--snapshot", sweep_snapshot, "Snapshot index (0)");
  sweep->add_option("-o,--output", sweep_out, "Sweep CSV (sweep.csv)");

  // calibrate
  auto* calib = app.add_subcommand("calibrate", "Monte-Carlo CD calibration");
  std::string stars_text = "5,10", e_grid = "0:0.2:0.02", extra_text = "0";
  std::size_t trials = 100;
  std::uint64_t calib_seed = 1;
  std::optional<std::size_t> calib_dim;
  std::string calib_out;
  calib->add_option("--stars", stars_text, "Star counts N");
  calib->add_option("--e-grid", e_grid, "Displacement radii");
  calib->add_option("--extra-stars", extra_text, "New-star counts");
  calib->add_option("--trials", trials, "Trials per point (100)");
  calib->add_option("--seed", calib_seed, "Master seed");
  calib->add_option("--dimension", calib_dim,
                    "Space dimension (defaults to N)");
  calib->add_option("-o,--output", calib_out, "CSV (calibration.csv)");

  // rank
  auto* rank = app.add_subcommand("rank", "Per-period cache rank matrix");
  double period_days = 1.0;
  std::string rank_out;
  rank->add_option("input", input, "Flow log")->required();
  rank->add_option("--period-days", period_days, "Period width in days (1)");
  rank->add_option("-o,--output", rank_out, "CSV (rank.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      auto cfg = parse_synth_config(read_file(synth_file));
      if (seed_override) cfg.seed = *seed_override;
      const auto trace = generate_trace(cfg);
      auto out = open_output(output_path(g, trace_out, "trace.tsv"));
      write_flow_log(out, trace.records);
      auto gt = open_output(output_path(g, gt_out, "ground_truth.tsv"));
      write_ground_truth(gt, trace.ground_truth);
      std::cerr << "wrote " << trace.records.size() << " flows\n";
      return 0;
    }

    const auto cfg = make_pipeline_config(g);

    if (*timeline) {
      const auto log = load_flows(input, g.strict);
      const auto t = run_timeline(log.records, cfg);
      for (const auto& w : t.warnings) std::cerr << "warning: " << w << '\n';
      auto out = open_output(output_path(g, timeline_out, "timeline.csv"));
      write_timeline(out, t);
      auto cd = open_output(fs::path(g.output_dir) / "cd_report.csv");
      write_timeline_cd_reports(cd, t);
      if (dump) {
        for (const auto& s : t.snapshots) {
          char name[64];
          std::snprintf(name, sizeof(name), "snapshot_%03zu",
                        s.snapshot.index);
          auto clusters = open_output(fs::path(g.output_dir) / "clusters" /
                                      (std::string(name) + ".csv"));
          write_clustering(clusters, s.clustering);
          if (s.bounds) {
            auto features = open_output(fs::path(g.output_dir) / "features" /
                                        (std::string(name) + ".csv"));
            write_feature_dump(features, s.features.caches, *s.bounds,
                               cfg.features);
          }
        }
      }
      return 0;
    }

    if (*drill) {
      const auto log = load_flows(input, g.strict);
      const auto t = run_timeline(log.records, cfg);
      const auto report = drilldown(t, entry, cfg, force);
      auto out = open_output(output_path(
          g, drill_out, "drilldown_" + std::to_string(entry) + ".csv"));
      write_drilldown(out, report, cfg);
      if (report.stars.empty()) {
        std::cerr << "entry " << entry << " is not flagged (cd="
                  << report.cd << "); use --force for a report\n";
      }
      return 0;
    }

    if (*sweep) {
      const auto log = load_flows(input, g.strict);
      std::ifstream gt_stream(gt_in, std::ios::binary);
      if (!gt_stream) throw InputError("cannot open " + gt_in);
      const auto gt = read_ground_truth(gt_stream);
      const auto snapshots = window_flows(log.records, cfg.windows());
      if (sweep_snapshot >= snapshots.size()) {
        throw InputError("trace has only " + std::to_string(snapshots.size()) +
                         " snapshot(s)");
      }
      const auto grid = parse_grid(grid_text);
      const auto rows = epsilon_sweep(snapshots[sweep_snapshot], cfg.features,
                                      gt, grid, cfg.cluster.min_pts);
      auto out = open_output(output_path(g, sweep_out, "sweep.csv"));
      write_sweep(out, rows);
      return 0;
    }

    if (*calib) {
      const auto stars = parse_counts(stars_text);
      const auto extras = parse_counts(extra_text);
      const auto radii = parse_grid(e_grid);
      auto out = open_output(output_path(g, calib_out, "calibration.csv"));
      out << "stars,dimension,extra_stars,e,trials,mean_cd,mean_displacement\n";
      for (auto n : stars) {
        for (auto extra : extras) {
          for (double e : radii) {
            CalibrationOptions o{n, e, trials, extra, calib_seed, calib_dim};
            CalibrationResult r;
            try {
              r = cd_calibration(o);
            } catch (const std::domain_error& err) {
              throw ConfigError(err.what());
            }
            out << n << ',' << calib_dim.value_or(n) << ',' << extra << ','
                << detail::format_double(e) << ',' << trials << ','
                << detail::format_double(r.mean_cd) << ','
                << detail::format_double(r.mean_displacement) << '\n';
          }
        }
      }
      return 0;
    }

    if (*rank) {
      const auto log = load_flows(input, g.strict);
      const auto m = rank_matrix(log.records, period_days, cfg.utc_offset);
      auto out = open_output(output_path(g, rank_out, "rank.csv"));
      write_rank_matrix(out, m);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
