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

#include "edgewatch/config.hpp"

#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

namespace edgewatch {
namespace {

constexpr const char* kSynth = R"(
days: 12
flows_per_day: 900
seed: 3
nodes:
  - {label: FRA, caches: 6, rtt_median: 15, rtt_spread: 1, ttl: 54, load: 2}
  - {label: WAW, caches: 5, rtt_median: 95, rtt_spread: 4, ttl: 50}
events:
  - {kind: node_death, target: WAW, start_day: 4}
  - {kind: congestion, target: FRA, start_day: 2, end_day: 3,
     throughput_factor: 0.5, variance_factor: 4}
)";

TEST(SynthYaml, Parses) {
  const auto cfg = parse_synth_config(kSynth);
  EXPECT_EQ(cfg.days, 12);
  EXPECT_EQ(cfg.flows_per_day, 900u);
  EXPECT_EQ(cfg.seed, 3u);
  ASSERT_EQ(cfg.nodes.size(), 2u);
  EXPECT_EQ(cfg.nodes[0].label, "FRA");
  EXPECT_EQ(cfg.nodes[0].cache_count, 6u);
  EXPECT_EQ(cfg.nodes[0].load_weight, 2.0);
  EXPECT_EQ(cfg.nodes[1].load_weight, 1.0);
  ASSERT_EQ(cfg.events.size(), 2u);
  EXPECT_EQ(cfg.events[0].kind, EventKind::node_death);
  EXPECT_EQ(cfg.events[0].end_day, 11);  // open-ended
  EXPECT_EQ(cfg.events[1].end_day, 3);
  EXPECT_EQ(cfg.events[1].throughput_factor, 0.5);
}

TEST(SynthYaml, Errors) {
  EXPECT_THROW(parse_synth_config("days: 3\n"), ConfigError);
  EXPECT_THROW(parse_synth_config(std::string(kSynth) + "colour: red\n"),
               ConfigError);
  EXPECT_THROW(parse_synth_config("days: [\n"), ConfigError);
  EXPECT_THROW(parse_synth_config("days: many\nnodes: []\n"), ConfigError);
  EXPECT_THROW(parse_synth_config(
                   "nodes:\n  - {label: FRA, caches: 2, rtt_median: 10}\n"),
               ConfigError);
  EXPECT_THROW(parse_synth_config(
                   "nodes:\n  - {label: FRA, rtt_median: 10}\n"
                   "events:\n  - {kind: flood, target: FRA}\n"),
               ConfigError);
}

TEST(PipelineYaml, OverridesOnlyPresentKeys) {
  PipelineConfig cfg;
  cfg.top_stars = 7;
  apply_pipeline_config(
      "epsilon: 0.03\npercentiles: [10, 50, 90]\nutc_offset: \"+02:00\"\n"
      "feature_mode: mean_std\n",
      cfg);
  EXPECT_EQ(cfg.cluster.epsilon, 0.03);
  EXPECT_EQ(cfg.features.percentiles, (std::vector<double>{10, 50, 90}));
  EXPECT_EQ(cfg.utc_offset, 7200);
  EXPECT_EQ(cfg.features.mode, FeatureMode::mean_std);
  EXPECT_EQ(cfg.top_stars, 7u);
  EXPECT_EQ(cfg.delta_t_days, 7.0);
  apply_pipeline_config("", cfg);
  EXPECT_EQ(cfg.cluster.epsilon, 0.03);
}

TEST(PipelineYaml, Errors) {
  PipelineConfig cfg;
  EXPECT_THROW(apply_pipeline_config("epsilo: 0.1\n", cfg), ConfigError);
  EXPECT_THROW(apply_pipeline_config("feature_mode: median\n", cfg),
               ConfigError);
  EXPECT_THROW(apply_pipeline_config("event_threshold: 80\n", cfg),
               ConfigError);
}

TEST(UtcOffset, Forms) {
  EXPECT_EQ(parse_utc_offset("Z"), 0);
  EXPECT_EQ(parse_utc_offset("+01:00"), 3600);
  EXPECT_EQ(parse_utc_offset("-05:30"), -19800);
  EXPECT_EQ(parse_utc_offset("3"), 10800);
  EXPECT_THROW(parse_utc_offset("+25:00"), ConfigError);
  EXPECT_THROW(parse_utc_offset("+01:60"), ConfigError);
  EXPECT_THROW(parse_utc_offset("abc"), ConfigError);
}

TEST(ShippedConfigs, Parse) {
  for (const char* name : {"six_nodes.yaml", "events_30d.yaml"}) {
    std::ifstream in(std::string(EDGEWATCH_CONFIG_DIR) + "/" + name);
    ASSERT_TRUE(in) << name;
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_NO_THROW(parse_synth_config(buf.str())) << name;
  }
}

}  // namespace
}  // namespace edgewatch
