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

// Per-cache feature extraction and per-snapshot min-max normalization.
//
// Each cache contributes one raw vector per metric (RTT in ms, TTL in hops).
// Normalization uses a single (min, max) pair per metric, taken over every
// cache and every percentile index of that metric, so that the affine map
// is shared by the whole metric block.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgewatch/detail/text.hpp"
#include "edgewatch/flow.hpp"

namespace edgewatch {

enum class Metric : std::size_t { rtt = 0, ttl = 1 };
inline constexpr std::size_t kMetricCount = 2;
inline constexpr std::array<Metric, kMetricCount> kMetrics = {Metric::rtt,
                                                              Metric::ttl};

inline std::string_view metric_name(Metric m) {
  return m == Metric::rtt ? "rtt" : "ttl";
}

inline const std::vector<double>& default_percentiles() {
  static const std::vector<double> list = {20, 35, 50, 65, 80};
  return list;
}

/// Percentile of already sorted samples, linear interpolation between
/// order statistics at rank h = (N-1) q / 100.
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::domain_error("percentile of empty sample");
  if (!(q >= 0.0 && q <= 100.0)) {
    throw std::domain_error("percentile rank outside [0, 100]");
  }
  const double h = static_cast<double>(sorted.size() - 1) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(std::span<const double> samples, double q) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, q);
}

enum class FeatureMode { percentiles, mean_std };

struct FeatureOptions {
  std::size_t min_flow = 50;
  std::vector<double> percentiles = default_percentiles();
  FeatureMode mode = FeatureMode::percentiles;

  /// Values per metric block.
  std::size_t block_size() const {
    return mode == FeatureMode::percentiles ? percentiles.size() : 2;
  }
};

/// Raw per-cache features. In percentile mode each block is non-decreasing;
/// in mean/std mode a block is (mean, standard deviation).
struct CacheFeatures {
  std::string cache_id;
  std::size_t flow_count = 0;
  std::array<std::vector<double>, kMetricCount> raw;

  const std::vector<double>& block(Metric m) const {
    return raw[static_cast<std::size_t>(m)];
  }
};

struct FeatureSet {
  std::vector<CacheFeatures> caches;  // ordered by cache_id
  std::size_t dropped = 0;            // caches below min_flow
};

inline void validate(const FeatureOptions& opts) {
  if (opts.mode == FeatureMode::mean_std) return;
  if (opts.percentiles.empty()) {
    throw std::domain_error("percentile list must not be empty");
  }
  for (std::size_t i = 0; i < opts.percentiles.size(); ++i) {
    const double q = opts.percentiles[i];
    if (!(q > 0.0 && q < 100.0)) {
      throw std::domain_error("percentiles must lie in (0, 100)");
    }
    if (i > 0 && !(q > opts.percentiles[i - 1])) {
      throw std::domain_error("percentiles must be strictly increasing");
    }
  }
}

namespace detail {

inline std::vector<double> summarize(std::vector<double>& samples,
                                     const FeatureOptions& opts) {
  std::vector<double> out;
  if (opts.mode == FeatureMode::mean_std) {
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    out = {mean, std::sqrt(ss / static_cast<double>(samples.size()))};
    return out;
  }
  std::sort(samples.begin(), samples.end());
  out.reserve(opts.percentiles.size());
  for (double q : opts.percentiles) out.push_back(percentile_sorted(samples, q));
  return out;
}

}  // namespace detail

inline CacheFeatures cache_features(std::string cache_id,
                                    std::span<const FlowRecord* const> flows,
                                    const FeatureOptions& opts) {
  std::vector<double> rtt, ttl;
  rtt.reserve(flows.size());
  ttl.reserve(flows.size());
  for (const auto* f : flows) {
    rtt.push_back(f->min_rtt);
    ttl.push_back(static_cast<double>(f->ttl));
  }
  CacheFeatures cf;
  cf.cache_id = std::move(cache_id);
  cf.flow_count = flows.size();
  cf.raw[static_cast<std::size_t>(Metric::rtt)] = detail::summarize(rtt, opts);
  cf.raw[static_cast<std::size_t>(Metric::ttl)] = detail::summarize(ttl, opts);
  return cf;
}

/// Keeps caches with at least `min_flow` flows and summarizes their RTT and
/// TTL samples.
inline FeatureSet extract_cache_features(const Snapshot& snapshot,
                                         const FeatureOptions& opts) {
  validate(opts);
  FeatureSet set;
  for (const auto& [cache, flows] : snapshot.caches) {
    if (flows.size() < opts.min_flow) {
      ++set.dropped;
      continue;
    }
    set.caches.push_back(cache_features(cache, flows, opts));
  }
  return set;
}

struct MetricRange {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const MetricRange&, const MetricRange&) = default;
};

/// Maps v into [0, 1] with the range; a zero-width range maps to 0.
inline double normalize(double v, const MetricRange& r) {
  const double span = r.max - r.min;
  if (!(span > 0.0)) return 0.0;
  return (v - r.min) / span;
}

inline double denormalize(double v, const MetricRange& r) {
  return r.min + v * (r.max - r.min);
}

struct NormalizationBounds {
  std::array<MetricRange, kMetricCount> ranges;

  const MetricRange& operator[](Metric m) const {
    return ranges[static_cast<std::size_t>(m)];
  }
  MetricRange& operator[](Metric m) {
    return ranges[static_cast<std::size_t>(m)];
  }
  friend bool operator==(const NormalizationBounds&,
                         const NormalizationBounds&) = default;
};

/// Normalized point for one cache: the RTT block followed by the TTL block.
struct FeatureVector {
  std::string cache_id;
  std::vector<double> values;
};

struct NormalizedSnapshot {
  std::vector<FeatureVector> points;
  NormalizationBounds bounds;
};

inline NormalizationBounds compute_bounds(std::span<const CacheFeatures> caches) {
  if (caches.empty()) throw std::domain_error("no caches to normalize");
  NormalizationBounds b;
  for (Metric m : kMetrics) {
    bool first = true;
    for (const auto& c : caches) {
      for (double v : c.block(m)) {
        if (first) {
          b[m] = {v, v};
          first = false;
        }
        b[m].min = std::min(b[m].min, v);
        b[m].max = std::max(b[m].max, v);
      }
    }
    if (first) throw std::domain_error("empty feature block");
  }
  return b;
}

/// Flattens a cache's raw blocks into a point, normalizing each block with
/// its metric's range.
inline std::vector<double> apply_bounds(const CacheFeatures& c,
                                        const NormalizationBounds& b) {
  std::vector<double> out;
  out.reserve(c.block(Metric::rtt).size() + c.block(Metric::ttl).size());
  for (Metric m : kMetrics) {
    for (double v : c.block(m)) out.push_back(normalize(v, b[m]));
  }
  return out;
}

inline NormalizedSnapshot normalize_snapshot(
    std::span<const CacheFeatures> caches) {
  NormalizedSnapshot ns;
  ns.bounds = compute_bounds(caches);
  ns.points.reserve(caches.size());
  for (const auto& c : caches) {
    ns.points.push_back({c.cache_id, apply_bounds(c, ns.bounds)});
  }
  return ns;
}

/// CSV `cache_id,metric,percentile,raw_value,normalized_value`. In mean/std
/// mode the percentile column holds "mean" or "std".
inline void write_feature_dump(std::ostream& out,
                               std::span<const CacheFeatures> caches,
                               const NormalizationBounds& bounds,
                               const FeatureOptions& opts) {
  out << "cache_id,metric,percentile,raw_value,normalized_value\n";
  for (const auto& c : caches) {
    for (Metric m : kMetrics) {
      const auto& block = c.block(m);
      for (std::size_t i = 0; i < block.size(); ++i) {
        std::string label;
        if (opts.mode == FeatureMode::percentiles) {
          label = detail::format_double(opts.percentiles.at(i));
        } else {
          label = i == 0 ? "mean" : "std";
        }
        out << c.cache_id << ',' << metric_name(m) << ',' << label << ','
            << detail::format_double(block[i]) << ','
            << detail::format_double(normalize(block[i], bounds[m])) << '\n';
      }
    }
  }
}

}  // namespace edgewatch
