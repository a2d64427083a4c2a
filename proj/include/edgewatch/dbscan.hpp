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

// Density-based clustering (DBSCAN) with exhaustive Euclidean neighborhoods.
//
// Conventions:
//  - a point's epsilon-neighborhood contains the point itself;
//  - p is core iff |N_eps(p)| >= min_pts;
//  - clusters are numbered in ascending order of their lowest-index core
//    point, and a border point reachable from several clusters joins the
//    lowest-numbered one.
// With these rules the output is a pure function of the input order.

#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <deque>
#include <ostream>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgewatch/features.hpp"

namespace edgewatch {

struct ClusterParams {
  double epsilon = 0.04;
  std::size_t min_pts = 5;
};

inline void validate(const ClusterParams& p) {
  if (!(p.epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
  if (p.min_pts < 1) throw std::domain_error("min_pts must be at least 1");
}

enum class PointRole { core, border, noise };

inline std::string_view role_name(PointRole r) {
  switch (r) {
    case PointRole::core:
      return "core";
    case PointRole::border:
      return "border";
    case PointRole::noise:
      return "noise";
  }
  return "noise";
}

inline constexpr int kNoise = -1;

/// Index-level result: label[i] is the cluster of point i or kNoise.
struct Labeling {
  std::vector<int> label;
  std::vector<PointRole> role;
  int cluster_count = 0;
};

/// A range of points, each a range of doubles (e.g. vector<vector<double>>).
template <typename P>
concept PointSet = std::ranges::random_access_range<P> &&
    std::ranges::random_access_range<std::ranges::range_value_t<P>> &&
    std::convertible_to<
        std::ranges::range_value_t<std::ranges::range_value_t<P>>, double>;

template <std::ranges::random_access_range A,
          std::ranges::random_access_range B>
double squared_distance(const A& a, const B& b) {
  double sum = 0.0;
  const auto n = std::ranges::size(a);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

template <std::ranges::random_access_range A,
          std::ranges::random_access_range B>
double euclidean_distance(const A& a, const B& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Indices (ascending, self included) within `epsilon` of point `index`.
template <PointSet P>
std::vector<std::size_t> region_query(const P& points, std::size_t index,
                                      double epsilon) {
  std::vector<std::size_t> out;
  const auto& q = points[index];
  const double eps2 = epsilon * epsilon;
  const auto n = std::ranges::size(points);
  for (std::size_t j = 0; j < n; ++j) {
    if (squared_distance(q, points[j]) <= eps2) out.push_back(j);
  }
  return out;
}

template <PointSet P>
Labeling dbscan_labels(const P& points, const ClusterParams& params) {
  validate(params);
  const auto n = std::ranges::size(points);
  if (n > 0) {
    const auto dim = std::ranges::size(points[0]);
    for (std::size_t i = 1; i < n; ++i) {
      if (std::ranges::size(points[i]) != dim) {
        throw std::domain_error("points differ in dimensionality");
      }
    }
  }

  constexpr int kUnvisited = -2;
  Labeling out;
  out.label.assign(n, kUnvisited);
  out.role.assign(n, PointRole::noise);

  for (std::size_t i = 0; i < n; ++i) {
    if (out.label[i] != kUnvisited) continue;
    auto neighbors = region_query(points, i, params.epsilon);
    if (neighbors.size() < params.min_pts) {
      out.label[i] = kNoise;  // may still be claimed as a border point
      continue;
    }
    const int cluster = out.cluster_count++;
    out.label[i] = cluster;
    out.role[i] = PointRole::core;
    std::deque<std::size_t> seeds(neighbors.begin(), neighbors.end());
    while (!seeds.empty()) {
      const std::size_t j = seeds.front();
      seeds.pop_front();
      if (out.label[j] == kNoise) {
        out.label[j] = cluster;
        out.role[j] = PointRole::border;
      }
      if (out.label[j] != kUnvisited) continue;
      out.label[j] = cluster;
      auto reach = region_query(points, j, params.epsilon);
      if (reach.size() >= params.min_pts) {
        out.role[j] = PointRole::core;
        seeds.insert(seeds.end(), reach.begin(), reach.end());
      } else {
        out.role[j] = PointRole::border;
      }
    }
  }
  return out;
}

/// Partition of a snapshot's caches into clusters and noise.
struct Clustering {
  struct Member {
    std::string cache_id;
    PointRole role = PointRole::core;
  };
  struct Cluster {
    std::vector<Member> members;
  };

  std::vector<Cluster> clusters;
  std::vector<std::string> noise;
  ClusterParams params;
  std::size_t snapshot = 0;

  std::size_t point_count() const {
    std::size_t n = noise.size();
    for (const auto& c : clusters) n += c.members.size();
    return n;
  }
};

inline Clustering dbscan(std::span<const FeatureVector> points,
                         const ClusterParams& params,
                         std::size_t snapshot = 0) {
  auto coords = std::views::transform(
      points, [](const FeatureVector& p) -> const std::vector<double>& {
        return p.values;
      });
  const Labeling lab = dbscan_labels(coords, params);

  Clustering out;
  out.params = params;
  out.snapshot = snapshot;
  out.clusters.resize(static_cast<std::size_t>(lab.cluster_count));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (lab.label[i] == kNoise) {
      out.noise.push_back(points[i].cache_id);
    } else {
      out.clusters[static_cast<std::size_t>(lab.label[i])].members.push_back(
          {points[i].cache_id, lab.role[i]});
    }
  }
  return out;
}

/// CSV `cache_id,cluster_id,role`; noise rows carry cluster_id -1.
inline void write_clustering(std::ostream& out, const Clustering& c) {
  out << "cache_id,cluster_id,role\n";
  for (std::size_t k = 0; k < c.clusters.size(); ++k) {
    for (const auto& m : c.clusters[k].members) {
      out << m.cache_id << ',' << k << ',' << role_name(m.role) << '\n';
    }
  }
  for (const auto& id : c.noise) out << id << ",-1,noise\n";
}

}  // namespace edgewatch
