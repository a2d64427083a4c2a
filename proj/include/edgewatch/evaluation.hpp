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

// Clustering quality against ground-truth edge-node labels, the epsilon
// sweep harness and Monte-Carlo calibration of the constellation distance.

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgewatch/constellation.hpp"
#include "edgewatch/dbscan.hpp"
#include "edgewatch/detail/text.hpp"
#include "edgewatch/features.hpp"

namespace edgewatch {

inline constexpr std::string_view kGroundTruthHeader = "cache_id\tgt_label";

struct GroundTruth {
  std::map<std::string, std::string> labels;  // cache_id -> GT-label

  const std::string* find(const std::string& cache) const {
    const auto it = labels.find(cache);
    return it == labels.end() ? nullptr : &it->second;
  }
};

inline GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth gt;
  std::string line;
  if (!std::getline(in, line) || line != kGroundTruthHeader) {
    throw FormatError("ground truth header mismatch");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw MalformedLineError({line_no, "expected cache_id and gt_label"});
    }
    gt.labels[std::string(fields[0])] = std::string(fields[1]);
  }
  return gt;
}

inline void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
  out << kGroundTruthHeader << '\n';
  for (const auto& [cache, label] : gt.labels) {
    out << cache << '\t' << label << '\n';
  }
}

struct VoteResult {
  std::vector<std::string> cluster_labels;       // majority label per cluster
  std::map<std::string, std::string> assigned;  // clustered caches only
  std::size_t n_tp = 0;
  std::size_t n_fp = 0;
};

/// Every cluster takes its most frequent GT-label (ties: smallest label).
/// Noise caches get no label.
inline VoteResult majority_vote_labels(const Clustering& clustering,
                                       const GroundTruth& gt) {
  VoteResult out;
  for (const auto& cluster : clustering.clusters) {
    std::map<std::string, std::size_t> votes;
    for (const auto& m : cluster.members) {
      const auto* label = gt.find(m.cache_id);
      if (!label) {
        throw std::domain_error("no ground-truth label for " + m.cache_id);
      }
      ++votes[*label];
    }
    // std::map iterates labels in ascending order, so the first maximum wins.
    const std::string* winner = nullptr;
    std::size_t best = 0;
    for (const auto& [label, count] : votes) {
      if (count > best) {
        best = count;
        winner = &label;
      }
    }
    out.cluster_labels.push_back(winner ? *winner : std::string());
    for (const auto& m : cluster.members) {
      out.assigned[m.cache_id] = out.cluster_labels.back();
      if (*gt.find(m.cache_id) == out.cluster_labels.back()) {
        ++out.n_tp;
      } else {
        ++out.n_fp;
      }
    }
  }
  return out;
}

struct QualityIndices {
  double tpr = 0.0;
  std::optional<double> fragmentation;  // undefined when no label survives
  double pureness = 0.0;
  std::size_t noise_count = 0;
  std::size_t n_tp = 0;
  std::size_t n_fp = 0;
  std::size_t n_clusters = 0;  // N_C
  std::size_t n_labels = 0;    // N_L, distinct majority labels
  std::size_t n_gt = 0;        // N_GT, distinct labels among the points
  std::size_t n_points = 0;    // |X|, clustered plus noise
};

/// TPR = N_TP/|X|, fragmentation = N_C/N_L, pureness = N_L/N_GT.
inline QualityIndices clustering_indices(const Clustering& clustering,
                                         const GroundTruth& gt) {
  const auto vote = majority_vote_labels(clustering, gt);
  QualityIndices q;
  q.n_tp = vote.n_tp;
  q.n_fp = vote.n_fp;
  q.n_clusters = clustering.clusters.size();
  q.noise_count = clustering.noise.size();
  q.n_points = clustering.point_count();
  q.n_labels =
      std::set<std::string>(vote.cluster_labels.begin(),
                            vote.cluster_labels.end())
          .size();

  std::set<std::string> gt_labels;
  for (const auto& c : clustering.clusters) {
    for (const auto& m : c.members) gt_labels.insert(*gt.find(m.cache_id));
  }
  for (const auto& id : clustering.noise) {
    if (const auto* label = gt.find(id)) gt_labels.insert(*label);
  }
  q.n_gt = gt_labels.size();

  if (q.n_points > 0) {
    q.tpr = static_cast<double>(q.n_tp) / static_cast<double>(q.n_points);
  }
  if (q.n_labels > 0) {
    q.fragmentation =
        static_cast<double>(q.n_clusters) / static_cast<double>(q.n_labels);
  }
  if (q.n_gt > 0) {
    q.pureness = static_cast<double>(q.n_labels) / static_cast<double>(q.n_gt);
  }
  return q;
}

struct SweepRow {
  double epsilon = 0.0;
  QualityIndices indices;
};

inline std::vector<SweepRow> epsilon_sweep(std::span<const FeatureVector> points,
                                           const GroundTruth& gt,
                                           std::span<const double> grid,
                                           std::size_t min_pts = 5) {
  if (grid.empty()) throw std::domain_error("empty epsilon grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::domain_error("epsilon grid must be ascending");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double eps : grid) {
    const auto clustering = dbscan(points, {eps, min_pts});
    rows.push_back({eps, clustering_indices(clustering, gt)});
  }
  return rows;
}

/// Extracts features from `snapshot` in the requested mode, normalizes them
/// and sweeps epsilon.
inline std::vector<SweepRow> epsilon_sweep(const Snapshot& snapshot,
                                           const FeatureOptions& features,
                                           const GroundTruth& gt,
                                           std::span<const double> grid,
                                           std::size_t min_pts = 5) {
  const auto set = extract_cache_features(snapshot, features);
  if (set.caches.empty()) {
    throw std::domain_error("no cache reaches the minimum flow count");
  }
  const auto normalized = normalize_snapshot(set.caches);
  return epsilon_sweep(normalized.points, gt, grid, min_pts);
}

inline void write_sweep(std::ostream& out, std::span<const SweepRow> rows) {
  out << "epsilon,tpr,fragmentation,pureness,noise_count,n_clusters,n_labels,"
         "n_gt,n_tp,n_fp\n";
  for (const auto& r : rows) {
    const auto& q = r.indices;
    out << detail::format_double(r.epsilon) << ','
        << detail::format_double(q.tpr) << ','
        << (q.fragmentation ? detail::format_double(*q.fragmentation) : "")
        << ',' << detail::format_double(q.pureness) << ',' << q.noise_count
        << ',' << q.n_clusters << ',' << q.n_labels << ',' << q.n_gt << ','
        << q.n_tp << ',' << q.n_fp << '\n';
  }
}

/// Uniform point in the ball of radius `radius` around the origin:
/// isotropic direction and radius r * u^(1/dim).
template <typename Rng>
std::vector<double> sample_in_ball(std::size_t dim, double radius, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double r =
      radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
  const double scale = r / std::sqrt(norm2);
  for (auto& x : v) x *= scale;
  return v;
}

struct CalibrationOptions {
  std::size_t stars = 5;        // N
  double radius = 0.0;          // e
  std::size_t trials = 100;
  std::size_t extra_stars = 0;  // stars born in the second constellation
  std::uint64_t seed = 1;
  std::optional<std::size_t> dimension;  // defaults to N
};

struct CalibrationResult {
  double mean_cd = 0.0;
  double mean_displacement = 0.0;  // mean |delta| over all displaced stars
  std::vector<double> trial_cd;
};

/// Generator for one trial, derived from (seed, trial) only.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

/// Random constellation of N stars in the unit hypercube against a copy
/// whose stars are each displaced uniformly within radius e, plus
/// `extra_stars` new uniform stars. Returns the CD averaged over trials.
inline CalibrationResult cd_calibration(const CalibrationOptions& opts) {
  if (opts.stars < 1 || opts.trials < 1 || !(opts.radius >= 0.0)) {
    throw std::domain_error("invalid calibration options");
  }
  const std::size_t dim = opts.dimension.value_or(opts.stars);
  if (dim < 1) throw std::domain_error("calibration dimension must be >= 1");

  NormalizationBounds unit;
  for (Metric m : kMetrics) unit[m] = {0.0, 1.0};

  CalibrationResult result;
  double displacement_sum = 0.0;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    auto rng = trial_rng(opts.seed, t);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Constellation base, moved;
    base.dimension = moved.dimension = dim;
    base.bounds = moved.bounds = unit;
    for (std::size_t i = 0; i < opts.stars; ++i) {
      Star s;
      s.cluster_id = i;
      s.position.resize(dim);
      for (auto& x : s.position) x = uniform(rng);
      const auto offset = sample_in_ball(dim, opts.radius, rng);
      Star d = s;
      double norm2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        d.position[j] += offset[j];
        norm2 += offset[j] * offset[j];
      }
      displacement_sum += std::sqrt(norm2);
      base.stars.push_back(std::move(s));
      moved.stars.push_back(std::move(d));
    }
    for (std::size_t i = 0; i < opts.extra_stars; ++i) {
      Star s;
      s.cluster_id = opts.stars + i;
      s.position.resize(dim);
      for (auto& x : s.position) x = uniform(rng);
      moved.stars.push_back(std::move(s));
    }
    result.trial_cd.push_back(constellation_distance(base, moved).cd);
  }
  double sum = 0.0;
  for (double v : result.trial_cd) sum += v;
  result.mean_cd = sum / static_cast<double>(opts.trials);
  result.mean_displacement =
      displacement_sum / static_cast<double>(opts.trials * opts.stars);
  return result;
}

}  // namespace edgewatch
