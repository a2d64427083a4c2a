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

// Constellations and the distance between two clusterings.
//
// A star is the centroid of one cluster. Two snapshots are compared in a
// common space: both are renormalized with the union of their per-metric
// bounds. Since renormalization is affine per metric, a star is computed as
// the raw-space mean of its members and renormalized once, which equals
// averaging the renormalized members.
//
// The astral distance of a star to a constellation is the distance to its
// nearest star there; the constellation distance sums the astral distances
// of every star of either side to the other side.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgewatch/dbscan.hpp"
#include "edgewatch/features.hpp"

namespace edgewatch {

/// Per-metric union of two ranges.
inline NormalizationBounds joint_bounds(const NormalizationBounds& a,
                                        const NormalizationBounds& b) {
  NormalizationBounds out;
  for (Metric m : kMetrics) {
    out[m] = {std::min(a[m].min, b[m].min), std::max(a[m].max, b[m].max)};
  }
  return out;
}

/// Union over the bounds that exist; nullopt if none do.
inline std::optional<NormalizationBounds> joint_bounds(
    const std::optional<NormalizationBounds>& a,
    const std::optional<NormalizationBounds>& b) {
  if (a && b) return joint_bounds(*a, *b);
  return a ? a : b;
}

/// Centroid of one cluster in raw metric units, kept per metric block.
struct RawStar {
  std::size_t cluster_id = 0;
  std::vector<std::string> members;
  std::array<std::vector<double>, kMetricCount> centroid;
};

struct Star {
  std::size_t cluster_id = 0;
  std::vector<std::string> members;
  std::vector<double> position;  // RTT block then TTL block
};

struct Constellation {
  std::vector<Star> stars;
  std::size_t snapshot = 0;
  std::size_t dimension = 0;  // 2k, also defined when there are no stars
  NormalizationBounds bounds;
};

namespace detail {

inline std::unordered_map<std::string, const CacheFeatures*> index_features(
    std::span<const CacheFeatures> features) {
  std::unordered_map<std::string, const CacheFeatures*> index;
  index.reserve(features.size());
  for (const auto& f : features) index.emplace(f.cache_id, &f);
  return index;
}

}  // namespace detail

/// Raw-space member means, one per cluster. Noise is ignored.
inline std::vector<RawStar> raw_stars(const Clustering& clustering,
                                      std::span<const CacheFeatures> features) {
  const auto index = detail::index_features(features);
  std::vector<RawStar> out;
  out.reserve(clustering.clusters.size());
  for (std::size_t k = 0; k < clustering.clusters.size(); ++k) {
    const auto& cluster = clustering.clusters[k];
    if (cluster.members.empty()) {
      throw std::domain_error("cluster without members");
    }
    RawStar star;
    star.cluster_id = k;
    for (const auto& member : cluster.members) {
      const auto it = index.find(member.cache_id);
      if (it == index.end()) {
        throw std::domain_error("clustered cache " + member.cache_id +
                                " has no features");
      }
      star.members.push_back(member.cache_id);
      for (Metric m : kMetrics) {
        const auto& block = it->second->block(m);
        auto& acc = star.centroid[static_cast<std::size_t>(m)];
        if (acc.empty()) acc.assign(block.size(), 0.0);
        if (acc.size() != block.size()) {
          throw std::domain_error("feature blocks differ in length");
        }
        for (std::size_t i = 0; i < block.size(); ++i) acc[i] += block[i];
      }
    }
    const double size = static_cast<double>(cluster.members.size());
    for (auto& acc : star.centroid) {
      for (auto& v : acc) v /= size;
    }
    out.push_back(std::move(star));
  }
  return out;
}

inline std::vector<double> renormalize(
    const std::array<std::vector<double>, kMetricCount>& raw,
    const NormalizationBounds& bounds) {
  std::vector<double> out;
  for (Metric m : kMetrics) {
    for (double v : raw[static_cast<std::size_t>(m)]) {
      out.push_back(normalize(v, bounds[m]));
    }
  }
  return out;
}

inline Constellation build_constellation(std::span<const RawStar> stars,
                                         const NormalizationBounds& joint,
                                         std::size_t dimension,
                                         std::size_t snapshot = 0) {
  Constellation c;
  c.snapshot = snapshot;
  c.dimension = dimension;
  c.bounds = joint;
  for (const auto& raw : stars) {
    Star s{raw.cluster_id, raw.members, renormalize(raw.centroid, joint)};
    if (s.position.size() != dimension) {
      throw std::domain_error("star dimensionality mismatch");
    }
    c.stars.push_back(std::move(s));
  }
  return c;
}

/// One star per cluster at the mean of its members' features, renormalized
/// with `joint`. `dimension` may be 0 to infer it from the features.
inline Constellation build_constellation(const Clustering& clustering,
                                         std::span<const CacheFeatures> features,
                                         const NormalizationBounds& joint,
                                         std::size_t dimension = 0) {
  if (dimension == 0 && !features.empty()) {
    dimension = features.front().block(Metric::rtt).size() +
                features.front().block(Metric::ttl).size();
  }
  const auto stars = raw_stars(clustering, features);
  return build_constellation(stars, joint, dimension, clustering.snapshot);
}

struct EuclideanDistance {
  double operator()(std::span<const double> a,
                    std::span<const double> b) const {
    return euclidean_distance(a, b);
  }
};

struct AstralCoupling {
  double distance = 0.0;
  std::optional<std::size_t> nearest;  // empty against an empty constellation
};

/// Distance of the empty-constellation case: the diagonal of [0,1]^dim.
inline double empty_sentinel(std::size_t dimension) {
  return std::sqrt(static_cast<double>(dimension));
}

/// Nearest star of `target` to `position`; ties go to the lowest index.
template <typename Distance = EuclideanDistance>
AstralCoupling astral_distance(std::span<const double> position,
                               const Constellation& target,
                               Distance distance = {}) {
  AstralCoupling best{empty_sentinel(position.size()), std::nullopt};
  for (std::size_t j = 0; j < target.stars.size(); ++j) {
    const auto& other = target.stars[j].position;
    if (other.size() != position.size()) {
      throw std::domain_error("star dimensionality mismatch");
    }
    const double d = distance(position, other);
    if (!best.nearest || d < best.distance) best = {d, j};
  }
  return best;
}

enum class Side { first, second };

inline std::string_view side_name(Side s) {
  return s == Side::first ? "n" : "n1";
}

struct Coupling {
  std::size_t star = 0;
  std::optional<std::size_t> nearest;
  double distance = 0.0;
};

struct Contributor {
  Side side = Side::first;
  std::size_t star = 0;
  double distance = 0.0;
};

struct CDReport {
  double cd = 0.0;
  std::vector<Coupling> first_to_second;  // stars of A against B
  std::vector<Coupling> second_to_first;  // stars of B against A
  std::vector<Contributor> ranked;        // by astral distance, descending
};

template <typename Distance = EuclideanDistance>
CDReport constellation_distance(const Constellation& a, const Constellation& b,
                                Distance distance = {}) {
  if (!(a.bounds == b.bounds)) {
    throw std::domain_error(
        "constellations were renormalized with different bounds");
  }
  if (a.dimension != 0 && b.dimension != 0 && a.dimension != b.dimension) {
    throw std::domain_error("constellation dimensionality mismatch");
  }

  CDReport report;
  const auto couple = [&](const Constellation& from, const Constellation& to,
                          Side side, std::vector<Coupling>& list) {
    for (std::size_t i = 0; i < from.stars.size(); ++i) {
      const auto ad = astral_distance(from.stars[i].position, to, distance);
      list.push_back({i, ad.nearest, ad.distance});
      report.ranked.push_back({side, i, ad.distance});
    }
  };
  couple(a, b, Side::first, report.first_to_second);
  couple(b, a, Side::second, report.second_to_first);

  // Each direction is summed on its own so that swapping a and b only swaps
  // the operands of the final (commutative) addition: CD is exactly symmetric.
  double ab = 0.0, ba = 0.0;
  for (const auto& c : report.first_to_second) ab += c.distance;
  for (const auto& c : report.second_to_first) ba += c.distance;
  report.cd = ab + ba;
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const Contributor& x, const Contributor& y) {
                     return x.distance > y.distance;
                   });
  return report;
}

/// CSV `snapshot_n,snapshot_n1,cd,side,star_id,nearest_star_id,
/// astral_distance`. A missing nearest star is written as -1.
inline void write_cd_report_header(std::ostream& out) {
  out << "snapshot_n,snapshot_n1,cd,side,star_id,nearest_star_id,"
         "astral_distance\n";
}

inline void write_cd_report_rows(std::ostream& out, const CDReport& report,
                                 std::size_t snapshot_n,
                                 std::size_t snapshot_n1) {
  const auto rows = [&](const std::vector<Coupling>& list, Side side) {
    for (const auto& c : list) {
      out << snapshot_n << ',' << snapshot_n1 << ','
          << detail::format_double(report.cd) << ',' << side_name(side) << ','
          << c.star << ','
          << (c.nearest ? std::to_string(*c.nearest) : std::string("-1"))
          << ',' << detail::format_double(c.distance) << '\n';
    }
  };
  rows(report.first_to_second, Side::first);
  rows(report.second_to_first, Side::second);
}

}  // namespace edgewatch
