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

// YAML configuration for the generator and the pipeline. Requires yaml-cpp.
// Unknown keys are rejected so that typos do not silently fall back to
// defaults. See configs/ for annotated examples.

#pragma once

#include <yaml-cpp/yaml.h>

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "edgewatch/detail/text.hpp"
#include "edgewatch/pipeline.hpp"
#include "edgewatch/synth.hpp"

namespace edgewatch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "+HH:MM", "-HH:MM", "HH:MM" or "Z" to seconds east of UTC.
inline int parse_utc_offset(std::string_view s) {
  if (s == "Z" || s == "z") return 0;
  int sign = 1;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    sign = s.front() == '-' ? -1 : 1;
    s.remove_prefix(1);
  }
  const auto colon = s.find(':');
  const auto hours = detail::parse_number<int>(s.substr(0, colon));
  int minutes = 0;
  if (colon != std::string_view::npos) {
    const auto m = detail::parse_number<int>(s.substr(colon + 1));
    if (!m || *m < 0 || *m >= 60) throw ConfigError("bad utc offset");
    minutes = *m;
  }
  if (!hours || *hours < 0 || *hours > 23) throw ConfigError("bad utc offset");
  return sign * (*hours * 3600 + minutes * 60);
}

namespace detail {

inline void check_keys(const YAML::Node& node, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ConfigError(std::string(where) + ": expected a map");
  const std::set<std::string_view> keys(allowed);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (const auto v = node[key]) {
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
  }
}

inline YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml: ") + e.what());
  }
}

}  // namespace detail

inline SynthConfig parse_synth_config(const std::string& text) {
  const auto root = detail::load_yaml(text);
  detail::check_keys(root, "synth",
                     {"days", "flows_per_day", "rank_churn", "seed",
                      "start_time", "base_throughput_kbps", "clients", "domain",
                      "nodes", "events"});
  SynthConfig cfg;
  detail::read(root, "days", cfg.days);
  detail::read(root, "flows_per_day", cfg.flows_per_day);
  detail::read(root, "rank_churn", cfg.rank_churn);
  detail::read(root, "seed", cfg.seed);
  detail::read(root, "start_time", cfg.start_time);
  detail::read(root, "base_throughput_kbps", cfg.base_throughput);
  detail::read(root, "clients", cfg.clients);
  detail::read(root, "domain", cfg.domain);

  const auto nodes = root["nodes"];
  if (!nodes || !nodes.IsSequence()) throw ConfigError("synth: missing nodes");
  for (const auto& n : nodes) {
    detail::check_keys(n, "node", {"label", "caches", "rtt_median",
                                   "rtt_spread", "ttl", "load"});
    EdgeNodeSpec spec;
    detail::read(n, "label", spec.label);
    detail::read(n, "caches", spec.cache_count);
    detail::read(n, "rtt_median", spec.rtt_median);
    detail::read(n, "rtt_spread", spec.rtt_spread);
    detail::read(n, "ttl", spec.ttl);
    detail::read(n, "load", spec.load_weight);
    cfg.nodes.push_back(std::move(spec));
  }
  if (const auto events = root["events"]) {
    if (!events.IsSequence()) throw ConfigError("synth: events is not a list");
    for (const auto& e : events) {
      detail::check_keys(e, "event", {"kind", "target", "start_day", "end_day",
                                      "magnitude", "throughput_factor",
                                      "variance_factor"});
      EventSpec spec;
      std::string kind;
      detail::read(e, "kind", kind);
      try {
        spec.kind = parse_event_kind(kind);
      } catch (const std::domain_error& err) {
        throw ConfigError(err.what());
      }
      detail::read(e, "target", spec.target);
      detail::read(e, "start_day", spec.start_day);
      spec.end_day = cfg.days - 1;
      detail::read(e, "end_day", spec.end_day);
      detail::read(e, "magnitude", spec.magnitude);
      detail::read(e, "throughput_factor", spec.throughput_factor);
      detail::read(e, "variance_factor", spec.variance_factor);
      cfg.events.push_back(std::move(spec));
    }
  }
  try {
    validate(cfg);
  } catch (const std::domain_error& err) {
    throw ConfigError(err.what());
  }
  return cfg;
}

/// Overrides the fields of `cfg` that appear in `text`.
inline void apply_pipeline_config(const std::string& text, PipelineConfig& cfg) {
  const auto root = detail::load_yaml(text);
  if (root.IsNull()) return;
  detail::check_keys(root, "pipeline",
                     {"delta_t_days", "step_days", "min_flow", "percentiles",
                      "feature_mode", "epsilon", "min_pts", "event_threshold",
                      "major_threshold", "utc_offset", "top_stars"});
  detail::read(root, "delta_t_days", cfg.delta_t_days);
  detail::read(root, "step_days", cfg.step_days);
  detail::read(root, "min_flow", cfg.features.min_flow);
  detail::read(root, "percentiles", cfg.features.percentiles);
  detail::read(root, "epsilon", cfg.cluster.epsilon);
  detail::read(root, "min_pts", cfg.cluster.min_pts);
  detail::read(root, "event_threshold", cfg.event_threshold);
  detail::read(root, "major_threshold", cfg.major_threshold);
  detail::read(root, "top_stars", cfg.top_stars);
  std::string mode;
  detail::read(root, "feature_mode", mode);
  if (mode == "percentiles") {
    cfg.features.mode = FeatureMode::percentiles;
  } else if (mode == "mean_std") {
    cfg.features.mode = FeatureMode::mean_std;
  } else if (!mode.empty()) {
    throw ConfigError("unknown feature_mode '" + mode + "'");
  }
  std::string offset;
  detail::read(root, "utc_offset", offset);
  if (!offset.empty()) cfg.utc_offset = parse_utc_offset(offset);
  try {
    validate(cfg);
  } catch (const std::domain_error& err) {
    throw ConfigError(err.what());
  }
}

}  // namespace edgewatch
