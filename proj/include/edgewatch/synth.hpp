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

// Labeled synthetic flow traces.
//
// A trace is a set of edge-nodes, each a group of caches sharing one network
// path (RTT level, TTL). Flows are drawn day by day. The distributions here
// are test fixtures, not a model of any real CDN.
//
// Randomness is split into independent streams keyed by (seed, purpose, day,
// node, cache), so switching an event on or off only changes the samples it
// targets.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgewatch/detail/text.hpp"
#include "edgewatch/evaluation.hpp"
#include "edgewatch/flow.hpp"

namespace edgewatch {

struct EdgeNodeSpec {
  std::string label;  // GT-label and IATA code, three letters
  std::size_t cache_count = 10;
  double rtt_median = 20.0;  // ms
  double rtt_spread = 1.0;   // ms, scale of per-flow jitter
  int ttl = 54;
  double load_weight = 1.0;
};

enum class EventKind { node_birth, node_death, path_shift, congestion };

inline std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::node_birth:
      return "node_birth";
    case EventKind::node_death:
      return "node_death";
    case EventKind::path_shift:
      return "path_shift";
    case EventKind::congestion:
      return "congestion";
  }
  return "";
}

inline EventKind parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::node_birth, EventKind::node_death,
                 EventKind::path_shift, EventKind::congestion}) {
    if (event_kind_name(k) == s) return k;
  }
  throw std::domain_error("unknown event kind: " + std::string(s));
}

/// An event is active on days [start_day, end_day] (inclusive, 0-based).
///  node_birth  the node only exists while the event is active
///  node_death  the node is gone while the event is active
///  path_shift  the node's RTT median grows by `magnitude` ms
///  congestion  throughput is scaled by `throughput_factor` and the RTT
///              variance by `variance_factor`
struct EventSpec {
  EventKind kind = EventKind::node_death;
  std::string target;
  int start_day = 0;
  int end_day = 0;
  double magnitude = 0.0;
  double throughput_factor = 1.0;
  double variance_factor = 1.0;

  bool active(int day) const { return day >= start_day && day <= end_day; }
};

struct SynthConfig {
  std::vector<EdgeNodeSpec> nodes;
  std::vector<EventSpec> events;
  int days = 7;
  std::size_t flows_per_day = 5000;
  double rank_churn = 0.3;
  std::uint64_t seed = 1;
  double start_time = 1391212800.0;  // a UTC midnight
  double base_throughput = 2500.0;   // kb/s
  std::size_t clients = 500;
  std::string domain = "c.cdn.example";
};

inline void validate(const SynthConfig& cfg, std::size_t min_pts = 5) {
  const auto fail = [](const std::string& what) {
    throw std::domain_error("synth config: " + what);
  };
  if (cfg.days < 1) fail("days must be >= 1");
  if (cfg.flows_per_day < 1) fail("flows_per_day must be >= 1");
  if (!(cfg.rank_churn >= 0.0 && cfg.rank_churn <= 1.0)) {
    fail("rank_churn must lie in [0, 1]");
  }
  if (cfg.nodes.empty()) fail("at least one edge-node is required");
  if (cfg.nodes.size() > 254) fail("at most 254 edge-nodes");
  if (cfg.clients < 1) fail("clients must be >= 1");
  if (!(cfg.base_throughput > 0.0)) fail("base_throughput must be positive");
  std::map<std::string, int> seen;
  for (const auto& n : cfg.nodes) {
    if (n.label.size() != 3 ||
        !std::all_of(n.label.begin(), n.label.end(), [](char c) {
          return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
        })) {
      fail("node label must be three letters: '" + n.label + "'");
    }
    if (seen[detail::to_upper(n.label)]++) fail("duplicate label " + n.label);
    if (n.cache_count < min_pts) fail(n.label + ": cache_count below min_pts");
    if (n.cache_count > 62500) fail(n.label + ": too many caches");
    if (!(n.rtt_median > 0.0)) fail(n.label + ": rtt_median must be positive");
    if (!(n.rtt_spread >= 0.0)) fail(n.label + ": rtt_spread must be >= 0");
    if (n.ttl < 0 || n.ttl > 255) fail(n.label + ": ttl outside [0, 255]");
    if (!(n.load_weight >= 0.0)) fail(n.label + ": load_weight must be >= 0");
  }
  for (const auto& e : cfg.events) {
    if (!seen.count(detail::to_upper(e.target))) {
      fail("event targets unknown node " + e.target);
    }
    if (e.start_day > e.end_day) fail("event start_day after end_day");
    if (e.kind == EventKind::path_shift && !(e.magnitude > 0.0)) {
      fail("path_shift magnitude must be positive");
    }
    if (e.kind == EventKind::congestion &&
        (!(e.throughput_factor > 0.0 && e.throughput_factor <= 1.0) ||
         !(e.variance_factor >= 1.0))) {
      fail("congestion needs throughput_factor in (0, 1] and "
           "variance_factor >= 1");
    }
  }
}

struct SynthTrace {
  std::vector<FlowRecord> records;  // sorted by start_time
  GroundTruth ground_truth;         // server_ip -> node label
};

namespace detail {

enum class Stream : std::uint32_t { base_weight = 1, day_weight = 2, flows = 3 };

inline std::mt19937_64 stream_rng(std::uint64_t seed, Stream purpose,
                                  std::uint32_t day, std::uint32_t node,
                                  std::uint32_t cache) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), day, node, cache};
  return std::mt19937_64(seq);
}

inline double round_to(double v, double unit) {
  return std::round(v / unit) * unit;
}

}  // namespace detail

inline std::string synth_server_ip(std::size_t node, std::size_t cache) {
  return "10." + std::to_string(node + 1) + "." + std::to_string(cache / 250) +
         "." + std::to_string(cache % 250 + 1);
}

inline std::string synth_hostname(const SynthConfig& cfg, std::size_t node,
                                  std::size_t cache) {
  char machine[32];
  std::snprintf(machine, sizeof(machine), "%02zus%02zu", node + 1, cache + 1);
  return "r" + std::to_string(cache % 24 + 1) + "---" +
         detail::to_lower(cfg.nodes[node].label) + machine + "." + cfg.domain;
}

/// Node state on one day after applying the events.
struct NodeDay {
  bool present = true;
  double rtt_median = 0.0;
  double rtt_sigma = 0.0;  // log-scale
  double throughput_factor = 1.0;
};

inline NodeDay node_day(const SynthConfig& cfg, std::size_t node, int day) {
  const auto& spec = cfg.nodes[node];
  NodeDay s;
  s.rtt_median = spec.rtt_median;
  double variance = 1.0;
  const auto label = detail::to_upper(spec.label);
  for (const auto& e : cfg.events) {
    if (detail::to_upper(e.target) != label) continue;
    const bool on = e.active(day);
    switch (e.kind) {
      case EventKind::node_birth:
        if (!on) s.present = false;
        break;
      case EventKind::node_death:
        if (on) s.present = false;
        break;
      case EventKind::path_shift:
        if (on) s.rtt_median += e.magnitude;
        break;
      case EventKind::congestion:
        if (on) {
          s.throughput_factor *= e.throughput_factor;
          variance *= e.variance_factor;
        }
        break;
    }
  }
  // A log-normal with sigma = spread / median has roughly that many ms of
  // jitter around the median.
  s.rtt_sigma = spec.rtt_spread / spec.rtt_median * std::sqrt(variance);
  return s;
}

/// Draws the trace. Per day, flows are split over present nodes by load
/// weight and over each node's caches by a weight vector perturbed daily
/// with strength rank_churn; counts are rounded by largest remainder.
inline SynthTrace generate_trace(const SynthConfig& cfg) {
  validate(cfg);
  SynthTrace trace;
  for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
    for (std::size_t c = 0; c < cfg.nodes[n].cache_count; ++c) {
      trace.ground_truth.labels[synth_server_ip(n, c)] =
          detail::to_upper(cfg.nodes[n].label);
    }
  }

  std::vector<std::vector<double>> base_weight(cfg.nodes.size());
  for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
    for (std::size_t c = 0; c < cfg.nodes[n].cache_count; ++c) {
      auto rng = detail::stream_rng(cfg.seed, detail::Stream::base_weight, 0,
                                    static_cast<std::uint32_t>(n),
                                    static_cast<std::uint32_t>(c));
      std::normal_distribution<double> z(0.0, 1.0);
      base_weight[n].push_back(std::exp(0.5 * z(rng)));
    }
  }

  struct Slot {
    std::size_t node, cache;
    double expected;
    std::size_t count;
  };

  for (int day = 0; day < cfg.days; ++day) {
    std::vector<NodeDay> state;
    double load_total = 0.0;
    for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
      state.push_back(node_day(cfg, n, day));
      if (state.back().present) load_total += cfg.nodes[n].load_weight;
    }
    if (!(load_total > 0.0)) continue;

    std::vector<Slot> slots;
    for (std::size_t n = 0; n < cfg.nodes.size(); ++n) {
      if (!state[n].present || cfg.nodes[n].load_weight <= 0.0) continue;
      std::vector<double> w;
      double w_total = 0.0;
      for (std::size_t c = 0; c < cfg.nodes[n].cache_count; ++c) {
        auto rng = detail::stream_rng(cfg.seed, detail::Stream::day_weight,
                                      static_cast<std::uint32_t>(day),
                                      static_cast<std::uint32_t>(n),
                                      static_cast<std::uint32_t>(c));
        std::normal_distribution<double> z(0.0, 1.0);
        w.push_back(base_weight[n][c] * std::exp(2.0 * cfg.rank_churn * z(rng)));
        w_total += w.back();
      }
      const double node_flows = static_cast<double>(cfg.flows_per_day) *
                                cfg.nodes[n].load_weight / load_total;
      for (std::size_t c = 0; c < w.size(); ++c) {
        slots.push_back({n, c, node_flows * w[c] / w_total, 0});
      }
    }

    std::size_t assigned = 0;
    for (auto& s : slots) {
      s.count = static_cast<std::size_t>(std::floor(s.expected));
      assigned += s.count;
    }
    std::vector<std::size_t> order(slots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ra = slots[a].expected - std::floor(slots[a].expected);
      const double rb = slots[b].expected - std::floor(slots[b].expected);
      return ra > rb;
    });
    for (std::size_t i = 0; assigned < cfg.flows_per_day && i < order.size();
         ++i, ++assigned) {
      ++slots[order[i]].count;
    }

    const double day_start = cfg.start_time + day * kSecondsPerDay;
    for (const auto& s : slots) {
      const auto& spec = cfg.nodes[s.node];
      const auto& st = state[s.node];
      auto rng = detail::stream_rng(cfg.seed, detail::Stream::flows,
                                    static_cast<std::uint32_t>(day),
                                    static_cast<std::uint32_t>(s.node),
                                    static_cast<std::uint32_t>(s.cache));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> z(0.0, 1.0);
      std::uniform_int_distribution<std::size_t> client(0, cfg.clients - 1);
      const auto ip = synth_server_ip(s.node, s.cache);
      const auto host = synth_hostname(cfg, s.node, s.cache);
      for (std::size_t f = 0; f < s.count; ++f) {
        FlowRecord r;
        r.start_time = day_start + detail::round_to(unit(rng) * kSecondsPerDay, 1e-3);
        if (r.start_time >= day_start + kSecondsPerDay) r.start_time = day_start;
        r.client_id = "c" + std::to_string(client(rng));
        r.server_ip = ip;
        r.hostname = host;
        const double rtt = st.rtt_median * std::exp(st.rtt_sigma * z(rng));
        r.min_rtt = std::max(0.1, detail::round_to(rtt, 1e-3));
        r.ttl = spec.ttl;
        const double thr = cfg.base_throughput * st.throughput_factor *
                           std::exp(0.35 * z(rng));
        r.avg_throughput = detail::round_to(thr, 0.1);
        const double duration = 5.0 + 175.0 * unit(rng);
        r.bytes_down = static_cast<std::uint64_t>(
            std::llround(r.avg_throughput * 1000.0 / 8.0 * duration));
        r.bytes_up = static_cast<std::uint64_t>(std::llround(
            static_cast<double>(r.bytes_down) * (0.01 + 0.02 * unit(rng))));
        trace.records.push_back(std::move(r));
      }
    }
  }
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const FlowRecord& a, const FlowRecord& b) {
                     return a.start_time < b.start_time;
                   });
  return trace;
}

/// Daily (or per-period) flow-count ranks per cache. rank 1 is the busiest
/// cache of the period, ties go to the smaller cache_id, and 0 marks a cache
/// without flows in that period.
struct RankMatrix {
  double origin = 0.0;
  double period = kSecondsPerDay;
  std::vector<std::string> caches;               // ascending
  std::vector<std::vector<std::size_t>> flows;   // [cache][period]
  std::vector<std::vector<std::size_t>> rank;    // [cache][period]

  std::size_t periods() const { return caches.empty() ? 0 : rank.front().size(); }
};

inline RankMatrix rank_matrix(std::span<const FlowRecord> records,
                              double period_days = 1.0, int utc_offset = 0) {
  if (!(period_days > 0.0)) throw std::domain_error("period must be positive");
  RankMatrix m;
  m.period = period_days * kSecondsPerDay;
  if (records.empty()) return m;

  double t_min = records.front().start_time, t_max = t_min;
  std::map<std::string, std::size_t> ids;
  for (const auto& r : records) {
    t_min = std::min(t_min, r.start_time);
    t_max = std::max(t_max, r.start_time);
    ids.emplace(r.server_ip, 0);
  }
  m.origin = midnight_floor(t_min, utc_offset);
  const auto periods =
      static_cast<std::size_t>(std::floor((t_max - m.origin) / m.period)) + 1;
  for (auto& [id, idx] : ids) {
    idx = m.caches.size();
    m.caches.push_back(id);
  }
  m.flows.assign(m.caches.size(), std::vector<std::size_t>(periods, 0));
  m.rank.assign(m.caches.size(), std::vector<std::size_t>(periods, 0));
  for (const auto& r : records) {
    const auto p = static_cast<std::size_t>(
        std::floor((r.start_time - m.origin) / m.period));
    ++m.flows[ids[r.server_ip]][std::min(p, periods - 1)];
  }
  std::vector<std::size_t> order(m.caches.size());
  for (std::size_t p = 0; p < periods; ++p) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // caches are already sorted by id, so a stable sort keeps id order on ties
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return m.flows[a][p] > m.flows[b][p];
    });
    std::size_t next = 1;
    for (std::size_t i : order) {
      if (m.flows[i][p] > 0) m.rank[i][p] = next++;
    }
  }
  return m;
}

inline void write_rank_matrix(std::ostream& out, const RankMatrix& m) {
  out << "cache_id";
  for (std::size_t p = 0; p < m.periods(); ++p) out << ",period_" << p;
  out << '\n';
  for (std::size_t i = 0; i < m.caches.size(); ++i) {
    out << m.caches[i];
    for (std::size_t r : m.rank[i]) out << ',' << r;
    out << '\n';
  }
}

}  // namespace edgewatch
