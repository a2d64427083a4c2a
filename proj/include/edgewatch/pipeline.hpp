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

// End-to-end change detection: snapshots -> features -> DBSCAN ->
// constellations -> constellation distance between consecutive snapshots,
// plus the per-star drill-down of a flagged step.

#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgewatch/constellation.hpp"
#include "edgewatch/dbscan.hpp"
#include "edgewatch/features.hpp"
#include "edgewatch/flow.hpp"

namespace edgewatch {

/// Raised when the input cannot produce a timeline at all.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  double delta_t_days = 7.0;
  double step_days = 1.0;
  FeatureOptions features;  // MinFlow and percentile list
  ClusterParams cluster;    // epsilon and min_pts
  double event_threshold = 10.0;
  double major_threshold = 50.0;
  int utc_offset = 0;  // seconds east of UTC
  std::size_t top_stars = 3;

  WindowOptions windows() const {
    return {delta_t_days * kSecondsPerDay, step_days * kSecondsPerDay,
            utc_offset, std::nullopt};
  }
  std::size_t dimension() const { return 2 * features.block_size(); }
};

inline void validate(const PipelineConfig& cfg) {
  if (!(cfg.delta_t_days > 0.0) || !(cfg.step_days > 0.0)) {
    throw std::domain_error("window width and step must be positive");
  }
  if (!(cfg.event_threshold > 0.0) || !(cfg.major_threshold > 0.0)) {
    throw std::domain_error("thresholds must be positive");
  }
  if (cfg.event_threshold > cfg.major_threshold) {
    throw std::domain_error("event threshold exceeds major threshold");
  }
  if (cfg.utc_offset <= -86400 || cfg.utc_offset >= 86400) {
    throw std::domain_error("utc offset out of range");
  }
  validate(cfg.features);
  validate(cfg.cluster);
}

enum class Flag { none, event, major };

inline std::string_view flag_name(Flag f) {
  switch (f) {
    case Flag::none:
      return "none";
    case Flag::event:
      return "event";
    case Flag::major:
      return "major";
  }
  return "none";
}

inline Flag classify(double cd, const PipelineConfig& cfg) {
  if (cd >= cfg.major_threshold) return Flag::major;
  if (cd >= cfg.event_threshold) return Flag::event;
  return Flag::none;
}

/// Everything computed for one snapshot.
struct SnapshotAnalysis {
  Snapshot snapshot;
  FeatureSet features;
  std::optional<NormalizationBounds> bounds;  // empty without caches
  Clustering clustering;
  std::vector<RawStar> stars;
  std::map<std::string, std::string> iata;  // cache -> decoded IATA code
};

struct StarSummary {
  Side side = Side::first;
  std::size_t star = 0;
  double astral_distance = 0.0;
  std::string label;  // majority IATA of the members, empty if unknown
  std::size_t members = 0;
};

struct TimelineEntry {
  std::size_t index = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::optional<double> cd;  // to the previous snapshot; absent for entry 0
  std::size_t noise_count = 0;
  std::size_t cluster_count = 0;
  std::size_t cache_count = 0;
  Flag flag = Flag::none;
  std::vector<StarSummary> top;
};

struct Timeline {
  std::vector<SnapshotAnalysis> snapshots;
  std::vector<TimelineEntry> entries;
  std::vector<CDReport> reports;  // reports[n - 1] compares n - 1 with n
  std::vector<Constellation> first, second;  // constellations of each pair
  std::vector<std::string> warnings;
};

/// Majority IATA code among caches; ties go to the smaller code.
inline std::string majority_label(std::span<const std::string> caches,
                                  const std::map<std::string, std::string>& iata) {
  std::map<std::string, std::size_t> votes;
  for (const auto& c : caches) {
    const auto it = iata.find(c);
    if (it != iata.end()) ++votes[it->second];
  }
  std::string best;
  std::size_t count = 0;
  for (const auto& [label, n] : votes) {
    if (n > count) {
      best = label;
      count = n;
    }
  }
  return best;
}

inline SnapshotAnalysis analyze_snapshot(Snapshot snapshot,
                                         const PipelineConfig& cfg) {
  SnapshotAnalysis a;
  a.features = extract_cache_features(snapshot, cfg.features);
  if (!a.features.caches.empty()) {
    const auto normalized = normalize_snapshot(a.features.caches);
    a.bounds = normalized.bounds;
    a.clustering = dbscan(normalized.points, cfg.cluster, snapshot.index);
    a.stars = raw_stars(a.clustering, a.features.caches);
  } else {
    a.clustering.params = cfg.cluster;
    a.clustering.snapshot = snapshot.index;
  }
  for (const auto& [cache, flows] : snapshot.caches) {
    if (flows.empty()) continue;
    if (auto name = parse_cache_hostname(flows.front()->hostname); name.iata) {
      a.iata[cache] = *name.iata;
    }
  }
  a.snapshot = std::move(snapshot);
  return a;
}

/// Compares two analyzed snapshots in their joint space.
inline std::pair<Constellation, Constellation> constellation_pair(
    const SnapshotAnalysis& a, const SnapshotAnalysis& b,
    std::size_t dimension) {
  const auto joint = joint_bounds(a.bounds, b.bounds);
  const NormalizationBounds bounds = joint.value_or(NormalizationBounds{});
  return {build_constellation(a.stars, bounds, dimension, a.snapshot.index),
          build_constellation(b.stars, bounds, dimension, b.snapshot.index)};
}

inline std::vector<StarSummary> top_contributors(
    const CDReport& report, const Constellation& first,
    const Constellation& second, const SnapshotAnalysis& a,
    const SnapshotAnalysis& b, std::size_t limit) {
  std::vector<StarSummary> out;
  for (const auto& c : report.ranked) {
    if (out.size() >= limit || !(c.distance > 0.0)) break;
    const auto& star = c.side == Side::first ? first.stars[c.star]
                                             : second.stars[c.star];
    const auto& iata = c.side == Side::first ? a.iata : b.iata;
    out.push_back({c.side, c.star, c.distance,
                   majority_label(star.members, iata), star.members.size()});
  }
  return out;
}

/// Runs the whole pipeline over `records`, which must outlive the result.
inline Timeline run_timeline(std::span<const FlowRecord> records,
                             const PipelineConfig& cfg) {
  validate(cfg);
  auto snapshots = window_flows(records, cfg.windows());
  if (snapshots.size() < 2) {
    throw PipelineError("need at least 2 snapshots, the input yields " +
                        std::to_string(snapshots.size()));
  }

  Timeline t;
  for (auto& s : snapshots) {
    t.snapshots.push_back(analyze_snapshot(std::move(s), cfg));
    const auto& a = t.snapshots.back();
    if (a.features.caches.empty()) {
      t.warnings.push_back("snapshot " + std::to_string(a.snapshot.index) +
                           " has no cache with at least " +
                           std::to_string(cfg.features.min_flow) + " flows");
    }
  }

  for (std::size_t n = 0; n < t.snapshots.size(); ++n) {
    const auto& a = t.snapshots[n];
    TimelineEntry e;
    e.index = n;
    e.window_start = a.snapshot.window_start;
    e.window_end = a.snapshot.window_end;
    e.noise_count = a.clustering.noise.size();
    e.cluster_count = a.clustering.clusters.size();
    e.cache_count = a.features.caches.size();
    if (n > 0) {
      const auto& prev = t.snapshots[n - 1];
      auto [first, second] = constellation_pair(prev, a, cfg.dimension());
      auto report = constellation_distance(first, second);
      e.cd = report.cd;
      e.flag = classify(report.cd, cfg);
      e.top = top_contributors(report, first, second, prev, a, cfg.top_stars);
      t.reports.push_back(std::move(report));
      t.first.push_back(std::move(first));
      t.second.push_back(std::move(second));
    }
    t.entries.push_back(std::move(e));
  }
  return t;
}

inline void write_timeline(std::ostream& out, const Timeline& t) {
  out << "snapshot,window_start,window_end,cd,noise_count,n_clusters,n_caches,"
         "flag,top_side,top_star,top_label,top_astral_distance\n";
  for (const auto& e : t.entries) {
    out << e.index << ',' << detail::format_double(e.window_start) << ','
        << detail::format_double(e.window_end) << ','
        << (e.cd ? detail::format_double(*e.cd) : "") << ',' << e.noise_count
        << ',' << e.cluster_count << ',' << e.cache_count << ','
        << flag_name(e.flag) << ',';
    if (!e.top.empty()) {
      const auto& s = e.top.front();
      out << side_name(s.side) << ',' << s.star << ',' << s.label << ','
          << detail::format_double(s.astral_distance);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

inline void write_timeline_cd_reports(std::ostream& out, const Timeline& t) {
  write_cd_report_header(out);
  for (std::size_t i = 0; i < t.reports.size(); ++i) {
    write_cd_report_rows(out, t.reports[i], i, i + 1);
  }
}

/// Flows of a group of caches within one snapshot.
struct GroupProfile {
  std::size_t flows = 0;
  std::vector<double> throughput_deciles;  // 10th..90th
  std::vector<double> rtt_percentiles;     // at the configured percentiles
};

struct StarDrilldown {
  std::size_t rank = 0;  // 1 = largest astral distance
  Side side = Side::first;
  std::size_t star = 0;
  double astral_distance = 0.0;
  std::string label;
  std::vector<std::string> members;
  GroupProfile before;  // the members in snapshot n - 1
  GroupProfile after;   // the same caches in snapshot n
};

struct DrilldownReport {
  std::size_t entry = 0;
  double cd = 0.0;
  Flag flag = Flag::none;
  std::vector<StarDrilldown> stars;
};

inline GroupProfile group_profile(const Snapshot& snapshot,
                                  std::span<const std::string> caches,
                                  const PipelineConfig& cfg) {
  GroupProfile p;
  std::vector<double> thr, rtt;
  for (const auto& c : caches) {
    const auto it = snapshot.caches.find(c);
    if (it == snapshot.caches.end()) continue;
    for (const auto* f : it->second) {
      thr.push_back(f->avg_throughput);
      rtt.push_back(f->min_rtt);
    }
  }
  p.flows = thr.size();
  if (thr.empty()) return p;
  std::sort(thr.begin(), thr.end());
  std::sort(rtt.begin(), rtt.end());
  for (int d = 1; d <= 9; ++d) {
    p.throughput_deciles.push_back(percentile_sorted(thr, 10.0 * d));
  }
  const auto& levels = cfg.features.mode == FeatureMode::percentiles
                           ? cfg.features.percentiles
                           : default_percentiles();
  for (double q : levels) p.rtt_percentiles.push_back(percentile_sorted(rtt, q));
  return p;
}

/// Per-star breakdown of the step into timeline entry `entry`. Unflagged
/// entries give an empty report unless `force` is set.
inline DrilldownReport drilldown(const Timeline& t, std::size_t entry,
                                 const PipelineConfig& cfg, bool force = false) {
  if (entry >= t.entries.size()) {
    throw std::out_of_range("no timeline entry " + std::to_string(entry));
  }
  DrilldownReport r;
  r.entry = entry;
  const auto& e = t.entries[entry];
  r.flag = e.flag;
  if (!e.cd) return r;
  r.cd = *e.cd;
  if (e.flag == Flag::none && !force) return r;

  const auto& report = t.reports[entry - 1];
  const auto& first = t.first[entry - 1];
  const auto& second = t.second[entry - 1];
  const auto& before = t.snapshots[entry - 1];
  const auto& after = t.snapshots[entry];
  for (const auto& c : report.ranked) {
    if (r.stars.size() >= cfg.top_stars || !(c.distance > 0.0)) break;
    const auto& star = c.side == Side::first ? first.stars[c.star]
                                             : second.stars[c.star];
    StarDrilldown s;
    s.rank = r.stars.size() + 1;
    s.side = c.side;
    s.star = c.star;
    s.astral_distance = c.distance;
    s.members = star.members;
    s.label = majority_label(star.members,
                             c.side == Side::first ? before.iata : after.iata);
    s.before = group_profile(before.snapshot, s.members, cfg);
    s.after = group_profile(after.snapshot, s.members, cfg);
    r.stars.push_back(std::move(s));
  }
  return r;
}

/// Long-format CSV, one value per row.
inline void write_drilldown(std::ostream& out, const DrilldownReport& r,
                            const PipelineConfig& cfg) {
  out << "entry,cd,flag,rank,side,star_id,label,members,astral_distance,"
         "quantity,phase,level,value\n";
  const auto& levels = cfg.features.mode == FeatureMode::percentiles
                           ? cfg.features.percentiles
                           : default_percentiles();
  for (const auto& s : r.stars) {
    const auto prefix = std::to_string(r.entry) + ',' +
                        detail::format_double(r.cd) + ',' +
                        std::string(flag_name(r.flag)) + ',' +
                        std::to_string(s.rank) + ',' +
                        std::string(side_name(s.side)) + ',' +
                        std::to_string(s.star) + ',' + s.label + ',' +
                        std::to_string(s.members.size()) + ',' +
                        detail::format_double(s.astral_distance) + ',';
    for (const auto* phase : {"before", "after"}) {
      const auto& p = std::string_view(phase) == "before" ? s.before : s.after;
      out << prefix << "flows," << phase << ",," << p.flows << '\n';
      for (std::size_t i = 0; i < p.throughput_deciles.size(); ++i) {
        out << prefix << "throughput_kbps," << phase << ',' << (i + 1) * 10
            << ',' << detail::format_double(p.throughput_deciles[i]) << '\n';
      }
      for (std::size_t i = 0; i < p.rtt_percentiles.size(); ++i) {
        out << prefix << "rtt_ms," << phase << ','
            << detail::format_double(levels[i]) << ','
            << detail::format_double(p.rtt_percentiles[i]) << '\n';
      }
    }
  }
}

}  // namespace edgewatch
