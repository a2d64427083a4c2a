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

// Flow log ingestion: the TSV record format, cache hostname decoding and
// slicing of records into sliding time-window snapshots.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgewatch/detail/text.hpp"

namespace edgewatch {

inline constexpr double kSecondsPerDay = 86400.0;

inline constexpr std::string_view kFlowLogHeader =
    "start_time\tclient_id\tserver_ip\thostname\tmin_rtt_ms\tttl\tbytes_up\t"
    "bytes_down\tavg_thr_kbps";

/// Metadata of one TCP flow between a client and a CDN cache.
struct FlowRecord {
  double start_time = 0.0;  // seconds since epoch
  std::string client_id;
  std::string server_ip;  // cache identity; compared as a plain string
  std::string hostname;
  double min_rtt = 0.0;  // ms
  int ttl = 0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  double avg_throughput = 0.0;  // kb/s

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

/// Raised for problems that make the whole log unusable (bad header, I/O).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LineError {
  std::size_t line = 0;  // 1-based, the header is line 1
  std::string reason;
};

/// Raised by the abort policy on the first malformed data line.
class MalformedLineError : public FormatError {
 public:
  explicit MalformedLineError(LineError e)
      : FormatError("line " + std::to_string(e.line) + ": " + e.reason),
        error_(std::move(e)) {}
  const LineError& error() const noexcept { return error_; }

 private:
  LineError error_;
};

enum class OnMalformed { skip, abort };

struct FlowLog {
  std::vector<FlowRecord> records;
  std::vector<LineError> errors;  // populated under OnMalformed::skip
};

/// Parses a single data line. Returns the reason on failure.
inline std::variant<FlowRecord, std::string> parse_flow_line(
    std::string_view line) {
  const auto fields = detail::split(line, '\t');
  if (fields.size() != 9) {
    return "expected 9 fields, got " + std::to_string(fields.size());
  }
  FlowRecord r;
  const auto start = detail::parse_number<double>(fields[0]);
  if (!start || !std::isfinite(*start)) return std::string("bad start_time");
  r.start_time = *start;
  r.client_id = std::string(fields[1]);
  r.server_ip = std::string(fields[2]);
  if (r.server_ip.empty()) return std::string("empty server_ip");
  r.hostname = std::string(fields[3]);

  const auto rtt = detail::parse_number<double>(fields[4]);
  if (!rtt || !std::isfinite(*rtt) || *rtt < 0.0) {
    return std::string("bad min_rtt_ms");
  }
  r.min_rtt = *rtt;
  const auto ttl = detail::parse_number<int>(fields[5]);
  if (!ttl || *ttl < 0 || *ttl > 255) return std::string("bad ttl");
  r.ttl = *ttl;
  const auto up = detail::parse_number<std::uint64_t>(fields[6]);
  if (!up) return std::string("bad bytes_up");
  r.bytes_up = *up;
  const auto down = detail::parse_number<std::uint64_t>(fields[7]);
  if (!down) return std::string("bad bytes_down");
  r.bytes_down = *down;
  const auto thr = detail::parse_number<double>(fields[8]);
  if (!thr || !std::isfinite(*thr) || *thr < 0.0) {
    return std::string("bad avg_thr_kbps");
  }
  r.avg_throughput = *thr;
  return r;
}

/// Reads a flow log. The first line must be exactly the header; blank lines
/// are ignored. Malformed data lines are either collected or rethrown
/// depending on `policy`.
inline FlowLog parse_flow_log(std::istream& in,
                              OnMalformed policy = OnMalformed::skip) {
  FlowLog log;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header line");
  if (line != kFlowLogHeader) throw FormatError("flow log header mismatch");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto parsed = parse_flow_line(line);
    if (auto* rec = std::get_if<FlowRecord>(&parsed)) {
      log.records.push_back(std::move(*rec));
      continue;
    }
    LineError err{line_no, std::get<std::string>(parsed)};
    if (policy == OnMalformed::abort) throw MalformedLineError(std::move(err));
    log.errors.push_back(std::move(err));
  }
  if (in.bad()) throw FormatError("read error");
  return log;
}

inline void write_flow_record(std::ostream& out, const FlowRecord& r) {
  out << detail::format_double(r.start_time) << '\t' << r.client_id << '\t'
      << r.server_ip << '\t' << r.hostname << '\t'
      << detail::format_double(r.min_rtt) << '\t' << r.ttl << '\t'
      << r.bytes_up << '\t' << r.bytes_down << '\t'
      << detail::format_double(r.avg_throughput) << '\n';
}

inline void write_flow_log(std::ostream& out,
                           std::span<const FlowRecord> records) {
  out << kFlowLogHeader << '\n';
  for (const auto& r : records) write_flow_record(out, r);
}

/// Decoded cache hostname. `iata` is set only for the plain naming form
/// `r<digits>---<iata><alnum>.<domain>`, e.g. r7---fra07t16.c.youtube.com.
struct CacheName {
  std::string raw;
  std::optional<std::string> iata;  // upper-cased, three letters
  std::string machine_suffix;       // "07t16" in the example above
  std::string domain;               // "c.youtube.com"
};

inline CacheName parse_cache_hostname(std::string_view hostname) {
  CacheName name{std::string(hostname), std::nullopt, {}, {}};
  const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  const auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  };

  std::string_view s = hostname;
  if (s.empty() || s.front() != 'r') return name;
  std::size_t i = 1;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == 1 || s.substr(i, 3) != "---") return name;
  i += 3;
  const auto dot = s.find('.', i);
  if (dot == std::string_view::npos || dot + 1 >= s.size()) return name;
  const auto machine = s.substr(i, dot - i);
  if (machine.size() < 3) return name;
  for (std::size_t j = 0; j < machine.size(); ++j) {
    const char c = machine[j];
    if (j < 3 ? !is_alpha(c) : !(is_alpha(c) || is_digit(c))) return name;
  }
  name.iata = detail::to_upper(machine.substr(0, 3));
  name.machine_suffix = std::string(machine.substr(3));
  name.domain = std::string(s.substr(dot + 1));
  return name;
}

/// Window layout for slicing. Durations are in seconds. Windows start at
/// midnight in the zone given by `utc_offset` unless `origin` pins them.
struct WindowOptions {
  double width = 7 * kSecondsPerDay;
  double step = kSecondsPerDay;
  int utc_offset = 0;  // seconds east of UTC
  std::optional<double> origin;
};

/// All flows in one half-open window [window_start, window_end), grouped by
/// cache. Records are borrowed from the span passed to window_flows(), which
/// must outlive the snapshot.
struct Snapshot {
  std::size_t index = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::map<std::string, std::vector<const FlowRecord*>> caches;

  std::size_t flow_count() const {
    std::size_t n = 0;
    for (const auto& [_, flows] : caches) n += flows.size();
    return n;
  }
};

/// Midnight (in the given UTC offset) at or before `t`.
inline double midnight_floor(double t, int utc_offset) {
  const double local = t + utc_offset;
  return std::floor(local / kSecondsPerDay) * kSecondsPerDay - utc_offset;
}

/// Slices records into windows [t0 + n*step, t0 + n*step + width). t0 is the
/// midnight at or before the earliest record; the coverage ends at the
/// midnight after the latest one. Only windows fully inside the coverage are
/// emitted, except that a coverage shorter than one window yields a single
/// (partial) window.
inline std::vector<Snapshot> window_flows(std::span<const FlowRecord> records,
                                          const WindowOptions& opts) {
  if (!(opts.width > 0.0) || !(opts.step > 0.0)) {
    throw std::domain_error("window width and step must be positive");
  }
  std::vector<Snapshot> out;
  if (records.empty()) return out;

  std::vector<const FlowRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FlowRecord* a, const FlowRecord* b) {
                     return a->start_time < b->start_time;
                   });

  const double t_min = sorted.front()->start_time;
  const double t_max = sorted.back()->start_time;
  const double t0 = opts.origin ? *opts.origin
                                : midnight_floor(t_min, opts.utc_offset);
  const double coverage_end =
      midnight_floor(t_max, opts.utc_offset) + kSecondsPerDay;
  const double span = coverage_end - t0;

  std::size_t count = 1;
  if (span > opts.width) {
    count = static_cast<std::size_t>(
                std::floor((span - opts.width) / opts.step + 1e-9)) +
            1;
  }

  const auto by_time = [](const FlowRecord* r, double t) {
    return r->start_time < t;
  };
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Snapshot snap;
    snap.index = n;
    snap.window_start = t0 + static_cast<double>(n) * opts.step;
    snap.window_end = snap.window_start + opts.width;
    auto first = std::lower_bound(sorted.begin(), sorted.end(),
                                  snap.window_start, by_time);
    auto last = std::lower_bound(first, sorted.end(), snap.window_end, by_time);
    for (auto it = first; it != last; ++it) {
      snap.caches[(*it)->server_ip].push_back(*it);
    }
    out.push_back(std::move(snap));
  }
  return out;
}

}  // namespace edgewatch
