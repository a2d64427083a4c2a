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

#include "edgewatch/flow.hpp"

#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace edgewatch {
namespace {

using ::testing::ElementsAre;

constexpr double kDay = kSecondsPerDay;

std::string with_header(const std::string& body) {
  return std::string(kFlowLogHeader) + "\n" + body;
}

FlowRecord at(double t, std::string ip = "10.0.0.1") {
  FlowRecord r;
  r.start_time = t;
  r.client_id = "C1";
  r.server_ip = std::move(ip);
  r.hostname = "r1---fra01s01.c.cdn.example";
  r.min_rtt = 10.0;
  r.ttl = 54;
  return r;
}

TEST(ParseFlowLog, MapsFieldsDirectly) {
  std::istringstream in(with_header(
      "1391212800.5\tC1\t10.0.0.1\tr7---fra07t16.c.youtube.com\t15.2\t54\t"
      "1200\t8000000\t1350.0\n"));
  const auto log = parse_flow_log(in);
  ASSERT_EQ(log.records.size(), 1u);
  ASSERT_TRUE(log.errors.empty());
  const auto& r = log.records[0];
  EXPECT_DOUBLE_EQ(r.start_time, 1391212800.5);
  EXPECT_EQ(r.client_id, "C1");
  EXPECT_EQ(r.server_ip, "10.0.0.1");
  EXPECT_EQ(r.hostname, "r7---fra07t16.c.youtube.com");
  EXPECT_DOUBLE_EQ(r.min_rtt, 15.2);
  EXPECT_EQ(r.ttl, 54);
  EXPECT_EQ(r.bytes_up, 1200u);
  EXPECT_EQ(r.bytes_down, 8000000u);
  EXPECT_DOUBLE_EQ(r.avg_throughput, 1350.0);
}

TEST(ParseFlowLog, ShortLineIsSkippedWithLineNumber) {
  std::istringstream in(with_header(
      "1\tC1\t10.0.0.1\th\t15.2\t54\t1200\t8000000\t1350.0\n"
      "2\tC1\t10.0.0.1\th\t15.2\t54\t1200\t8000000\n"
      "3\tC1\t10.0.0.1\th\t15.2\t54\t1200\t8000000\t1350.0\n"));
  const auto log = parse_flow_log(in);
  EXPECT_EQ(log.records.size(), 2u);
  ASSERT_EQ(log.errors.size(), 1u);
  EXPECT_EQ(log.errors[0].line, 3u);
  EXPECT_THAT(log.errors[0].reason, ::testing::HasSubstr("8"));
}

TEST(ParseFlowLog, AbortPolicyThrowsOnFirstBadLine) {
  std::istringstream in(with_header(
      "1\tC1\t10.0.0.1\th\t15.2\t300\t1200\t8000000\t1350.0\n"));
  try {
    parse_flow_log(in, OnMalformed::abort);
    FAIL() << "expected MalformedLineError";
  } catch (const MalformedLineError& e) {
    EXPECT_EQ(e.error().line, 2u);
    EXPECT_EQ(e.error().reason, "bad ttl");
  }
}

TEST(ParseFlowLog, RejectsInvariantViolations) {
  const std::vector<std::string> bad = {
      "x\tC1\t10.0.0.1\th\t1\t54\t1\t1\t1",     // start_time
      "1\tC1\t\th\t1\t54\t1\t1\t1",             // empty server_ip
      "1\tC1\tip\th\t-1\t54\t1\t1\t1",          // negative rtt
      "1\tC1\tip\th\t1\t-3\t1\t1\t1",           // ttl
      "1\tC1\tip\th\t1\t54\t-1\t1\t1",          // bytes_up
      "1\tC1\tip\th\t1\t54\t1\t1.5\t1",         // bytes_down not integral
      "1\tC1\tip\th\t1\t54\t1\t1\t-2",          // throughput
      "1\tC1\tip\th\t1\t54\t1\t1\t1\textra",    // arity
      "1\tC1\tip\th\tnan\t54\t1\t1\t1",         // non-finite rtt
      "1\tC1\tip\th\t1,5\t54\t1\t1\t1",         // not C-locale
  };
  for (const auto& line : bad) {
    std::istringstream in(with_header(line + "\n"));
    const auto log = parse_flow_log(in);
    EXPECT_TRUE(log.records.empty()) << line;
    EXPECT_EQ(log.errors.size(), 1u) << line;
  }
}

TEST(ParseFlowLog, EmptyBodyGivesNoRecords) {
  std::istringstream in(with_header(""));
  const auto log = parse_flow_log(in);
  EXPECT_TRUE(log.records.empty());
  EXPECT_TRUE(log.errors.empty());
}

TEST(ParseFlowLog, HeaderMismatchIsFatal) {
  std::istringstream wrong("start_time\tclient\n");
  EXPECT_THROW(parse_flow_log(wrong), FormatError);
  std::istringstream empty("");
  EXPECT_THROW(parse_flow_log(empty), FormatError);
}

TEST(ParseFlowLog, RoundTripsRandomRecords) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FlowRecord> records;
  for (int i = 0; i < 500; ++i) {
    FlowRecord r;
    r.start_time = 1.39e9 + u(rng) * 1e7;
    r.client_id = "c" + std::to_string(i % 17);
    r.server_ip = "10.0." + std::to_string(i % 5) + ".1";
    r.hostname = i % 3 ? "r3---mad01s02.c.cdn.example" : "opaque-" + std::to_string(i);
    r.min_rtt = u(rng) * 200.0;
    r.ttl = static_cast<int>(u(rng) * 255.0);
    r.bytes_up = static_cast<std::uint64_t>(u(rng) * 1e6);
    r.bytes_down = static_cast<std::uint64_t>(u(rng) * 1e12);
    r.avg_throughput = u(rng) * 1e5;
    records.push_back(r);
  }
  std::stringstream buffer;
  write_flow_log(buffer, records);
  const auto parsed = parse_flow_log(buffer, OnMalformed::abort);
  EXPECT_EQ(parsed.records, records);
}

TEST(ParseCacheHostname, PlainFormCarriesIata) {
  const auto name = parse_cache_hostname("r7---fra07t16.c.youtube.com");
  ASSERT_TRUE(name.iata.has_value());
  EXPECT_EQ(*name.iata, "FRA");
  EXPECT_EQ(name.machine_suffix, "07t16");
  EXPECT_EQ(name.domain, "c.youtube.com");
}

TEST(ParseCacheHostname, ObfuscatedFormIsOpaque) {
  const auto name = parse_cache_hostname("r7---sn-4g57kued.c.youtube.com");
  EXPECT_FALSE(name.iata.has_value());
  EXPECT_EQ(name.raw, "r7---sn-4g57kued.c.youtube.com");
}

TEST(ParseCacheHostname, DegenerateInputs) {
  EXPECT_FALSE(parse_cache_hostname("").iata.has_value());
  EXPECT_EQ(parse_cache_hostname("").raw, "");
  EXPECT_FALSE(parse_cache_hostname("r---fra07.c.x").iata);  // no digits
  EXPECT_FALSE(parse_cache_hostname("r7--fra07.c.x").iata);  // two dashes
  EXPECT_FALSE(parse_cache_hostname("r7---fr.c.x").iata);    // short code
  EXPECT_FALSE(parse_cache_hostname("r7---f4a07.c.x").iata); // digit in code
  EXPECT_FALSE(parse_cache_hostname("r7---fra07").iata);     // no domain
  EXPECT_FALSE(parse_cache_hostname("10.0.0.1").iata);
  EXPECT_EQ(*parse_cache_hostname("r12---MAD.c.x").iata, "MAD");
}

TEST(WindowFlows, FourteenDaysGiveEightWeeklyWindows) {
  std::vector<FlowRecord> records;
  for (int h = 0; h < 14 * 24; ++h) records.push_back(at(h * 3600.0 + 60.0));
  const auto snaps = window_flows(records, {7 * kDay, kDay, 0, std::nullopt});
  ASSERT_EQ(snaps.size(), 8u);
  for (std::size_t n = 0; n < snaps.size(); ++n) {
    EXPECT_DOUBLE_EQ(snaps[n].window_start, n * kDay);
    EXPECT_DOUBLE_EQ(snaps[n].window_end - snaps[n].window_start, 7 * kDay);
    EXPECT_EQ(snaps[n].flow_count(), 7u * 24u);
  }
}

TEST(WindowFlows, WeeklyStepTiles) {
  std::vector<FlowRecord> records;
  for (int h = 0; h < 14 * 24; ++h) records.push_back(at(h * 3600.0));
  const auto snaps = window_flows(records, {7 * kDay, 7 * kDay, 0, std::nullopt});
  ASSERT_EQ(snaps.size(), 2u);
  EXPECT_EQ(snaps[0].flow_count() + snaps[1].flow_count(), records.size());
  EXPECT_DOUBLE_EQ(snaps[1].window_start, snaps[0].window_end);
}

TEST(WindowFlows, RecordAtDayThreeAndAHalf) {
  // Windows containing t = 3.5 d start at days 0..3 (enumerated by hand:
  // s <= 3.5 < s + 7 with s integral and s >= 0).
  std::vector<FlowRecord> records;
  for (int d = 0; d < 14; ++d) records.push_back(at(d * kDay + 1.0, "bg"));
  records.push_back(at(3.5 * kDay, "marked"));
  const auto snaps = window_flows(records, {7 * kDay, kDay, 0, 0.0});
  std::vector<std::size_t> containing;
  for (const auto& s : snaps) {
    if (s.caches.count("marked")) containing.push_back(s.index);
  }
  EXPECT_THAT(containing, ElementsAre(0u, 1u, 2u, 3u));
}

TEST(WindowFlows, WindowEndIsExclusive) {
  std::vector<FlowRecord> records = {at(0.0), at(kDay), at(2 * kDay + 5)};
  const auto snaps = window_flows(records, {kDay, kDay, 0, std::nullopt});
  ASSERT_EQ(snaps.size(), 3u);
  for (const auto& s : snaps) EXPECT_EQ(s.flow_count(), 1u);
}

TEST(WindowFlows, MidnightFollowsUtcOffset) {
  // 23:00 UTC is already the next day at +02:00.
  std::vector<FlowRecord> records = {at(23 * 3600.0)};
  const auto utc = window_flows(records, {kDay, kDay, 0, std::nullopt});
  const auto cest = window_flows(records, {kDay, kDay, 7200, std::nullopt});
  EXPECT_DOUBLE_EQ(utc.front().window_start, 0.0);
  EXPECT_DOUBLE_EQ(cest.front().window_start, kDay - 7200.0);
  EXPECT_DOUBLE_EQ(midnight_floor(-1.0, 0), -kDay);
}

TEST(WindowFlows, EmptyInputAndBadParameters) {
  EXPECT_TRUE(window_flows({}, {}).empty());
  std::vector<FlowRecord> one = {at(0.0)};
  EXPECT_THROW(window_flows(one, {0.0, kDay, 0, std::nullopt}),
               std::domain_error);
  EXPECT_THROW(window_flows(one, {kDay, -1.0, 0, std::nullopt}),
               std::domain_error);
  // Shorter coverage than one window still yields a single snapshot.
  EXPECT_EQ(window_flows(one, {}).size(), 1u);
}

TEST(WindowFlows, GroupsByServerIp) {
  std::vector<FlowRecord> records = {at(1, "a"), at(2, "b"), at(3, "a")};
  const auto snaps = window_flows(records, {kDay, kDay, 0, std::nullopt});
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(snaps[0].caches.at("a").size(), 2u);
  EXPECT_EQ(snaps[0].caches.at("b").size(), 1u);
}

// Membership and overlap-count properties over random record sets.
TEST(WindowFlows, MembershipAndOverlapProperties) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> t(0.0, 20 * kDay);
    std::vector<FlowRecord> records;
    for (int i = 0; i < 300; ++i) {
      records.push_back(at(t(rng), "c" + std::to_string(i % 9)));
    }
    const int k = 1 + trial % 4;
    const WindowOptions opts{k * kDay, kDay, 0, std::nullopt};
    const auto snaps = window_flows(records, opts);
    std::map<const FlowRecord*, int> hits;
    for (const auto& s : snaps) {
      for (const auto& [ip, flows] : s.caches) {
        for (const auto* f : flows) {
          EXPECT_EQ(f->server_ip, ip);
          EXPECT_LE(s.window_start, f->start_time);
          EXPECT_LT(f->start_time, s.window_end);
          ++hits[f];
        }
      }
    }
    const double first = snaps.front().window_start;
    const double last = snaps.back().window_end;
    for (const auto& r : records) {
      if (r.start_time >= first + opts.width && r.start_time < last - opts.width) {
        EXPECT_EQ(hits[&r], k);
      }
    }
  }
}

}  // namespace
}  // namespace edgewatch
