// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/pon_frame.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "csv.hpp"
#include "ponvdba/errors.hpp"

namespace ponvdba {

FrameClock::FrameClock(std::uint64_t line_rate_bps, std::uint64_t frame_duration_ns)
    : line_rate_bps_(line_rate_bps), frame_duration_ns_(frame_duration_ns) {
  if (line_rate_bps == 0 || frame_duration_ns == 0) {
    throw Error("frame clock needs a positive line rate and frame duration");
  }
  // floor(rate * duration / 32 bits); 128-bit keeps multi-second frames exact.
  const auto bits = static_cast<unsigned __int128>(line_rate_bps) * frame_duration_ns;
  const auto words = bits / (static_cast<unsigned __int128>(1'000'000'000ULL) * 32U);
  if (words > 0xFFFF'FFFFULL) throw Error("frame capacity exceeds 32-bit word range");
  capacity_words_ = static_cast<Words>(words);
}

FrameClock FrameClock::with_capacity(Words words, std::uint64_t frame_duration_ns) {
  // ceil(words * 32 * 1e9 / duration) reproduces exactly `words` after flooring.
  const auto bits = static_cast<unsigned __int128>(words) * 32U * 1'000'000'000ULL;
  const auto rate = (bits + frame_duration_ns - 1) / frame_duration_ns;
  return FrameClock(static_cast<std::uint64_t>(rate), frame_duration_ns);
}

double FrameClock::word_time_ps() const {
  return 32.0 * 1e12 / static_cast<double>(line_rate_bps_);
}

Words PhysicalBandwidthMap::granted_words() const {
  std::uint64_t total = 0;
  for (const auto& g : grants) total += g.grant_words;
  return static_cast<Words>(total);
}

std::size_t PhysicalBandwidthMap::burst_count() const {
  std::size_t bursts = 0;
  for (std::size_t i = 0; i < grants.size(); ++i) {
    const bool continues = i > 0 && grants[i].onu_id == grants[i - 1].onu_id &&
                           grants[i].start_word == grants[i - 1].end_word();
    if (!continues) ++bursts;
  }
  return bursts;
}

std::string_view to_string(TrafficClassKind kind) {
  switch (kind) {
    case TrafficClassKind::kFixed: return "fixed";
    case TrafficClassKind::kAssured: return "assured";
    case TrafficClassKind::kBestEffort: return "best_effort";
  }
  return "?";
}

Words VirtualBandwidthMap::total_words() const {
  std::uint64_t total = 0;
  for (const auto& r : requests) total += r.grant_words;
  return static_cast<Words>(total);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kUnsorted: return "unsorted";
    case ViolationKind::kOverlap: return "overlap";
    case ViolationKind::kMissingGuard: return "missing_guard";
    case ViolationKind::kEmptyGrant: return "empty_grant";
    case ViolationKind::kOutOfFrame: return "out_of_frame";
    case ViolationKind::kCapacityOverflow: return "capacity_overflow";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(),
      [kind](const Violation& v) { return v.kind == kind; }));
}

std::ostream& operator<<(std::ostream& os, const Violation& v) {
  os << to_string(v.kind);
  if (v.first != kNoGrant) os << " grant#" << v.first;
  if (v.second != kNoGrant) os << " grant#" << v.second;
  return os;
}

ValidationReport validate_physical_map(const PhysicalBandwidthMap& map,
                                       const FrameClock& clock, Words guard_words) {
  ValidationReport report;
  auto& out = report.violations;
  const auto& grants = map.grants;
  const std::uint64_t capacity = clock.upstream_capacity();

  for (std::size_t i = 0; i < grants.size(); ++i) {
    const auto& g = grants[i];
    if (g.grant_words == 0) out.push_back({ViolationKind::kEmptyGrant, i});
    if (static_cast<std::uint64_t>(g.start_word) + g.grant_words > capacity) {
      out.push_back({ViolationKind::kOutOfFrame, i});
    }
    if (i > 0 && g.start_word < grants[i - 1].start_word) {
      out.push_back({ViolationKind::kUnsorted, i - 1, i});
    }
  }

  // Overlap and guard checks run on start-sorted order so an unsorted map
  // still gets a complete report.
  std::vector<std::size_t> order(grants.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grants[a].start_word < grants[b].start_word;
  });

  auto end_of = [&](std::size_t i) {
    return static_cast<std::uint64_t>(grants[i].start_word) + grants[i].grant_words;
  };

  std::uint64_t payload = 0;
  std::uint64_t onu_changes = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const std::size_t a = order[p];
    payload += grants[a].grant_words;
    for (std::size_t q = p + 1; q < order.size() && grants[order[q]].start_word < end_of(a);
         ++q) {
      const std::size_t b = order[q];
      if (grants[b].grant_words == 0) continue;
      out.push_back({ViolationKind::kOverlap, std::min(a, b), std::max(a, b)});
    }
    if (p + 1 < order.size()) {
      const std::size_t b = order[p + 1];
      if (grants[b].onu_id != grants[a].onu_id) {
        ++onu_changes;
        if (grants[b].start_word >= end_of(a) &&
            grants[b].start_word - end_of(a) < guard_words) {
          out.push_back({ViolationKind::kMissingGuard, std::min(a, b), std::max(a, b)});
        }
      }
    }
  }

  if (payload + onu_changes * guard_words > capacity) {
    out.push_back({ViolationKind::kCapacityOverflow});
  }
  return report;
}

Words usable_capacity(const FrameClock& clock, std::size_t onu_burst_count,
                      Words guard_words) {
  const std::uint64_t capacity = clock.upstream_capacity();
  const std::uint64_t guards =
      onu_burst_count > 1 ? static_cast<std::uint64_t>(onu_burst_count - 1) * guard_words : 0;
  return guards >= capacity ? 0 : static_cast<Words>(capacity - guards);
}

void write_bmap_trace_header(std::ostream& os) { os << kBmapTraceHeader << '\n'; }

void write_bmap_trace(std::ostream& os, const PhysicalBandwidthMap& map) {
  for (const auto& g : map.grants) {
    os << map.frame_index << ',' << g.alloc_id.value() << ',' << g.onu_id.value() << ','
       << g.start_word << ',' << g.grant_words << ',' << (g.dbru_requested ? 1 : 0) << '\n';
  }
}

std::vector<PhysicalBandwidthMap> read_bmap_trace(std::istream& is) {
  std::vector<PhysicalBandwidthMap> maps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (detail::skippable_line(line)) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 6) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 6 fields");
    }
    const auto frame = detail::parse_uint<FrameIndex>(fields[0], line_no);
    Grant g;
    g.alloc_id = AllocId(detail::parse_uint<std::uint32_t>(fields[1], line_no));
    g.onu_id = OnuId(detail::parse_uint<std::uint32_t>(fields[2], line_no));
    g.start_word = detail::parse_uint<Words>(fields[3], line_no);
    g.grant_words = detail::parse_uint<Words>(fields[4], line_no);
    g.dbru_requested = detail::parse_uint<unsigned>(fields[5], line_no) != 0;
    if (maps.empty() || maps.back().frame_index != frame) {
      if (!maps.empty() && frame < maps.back().frame_index) {
        throw ParseError("line " + std::to_string(line_no) + ": frames out of order");
      }
      maps.push_back({frame, {}});
    }
    maps.back().grants.push_back(g);
  }
  return maps;
}

}  // namespace ponvdba
