// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "ponvdba/ids.hpp"

namespace ponvdba {

inline constexpr std::uint64_t kXgsPonUpstreamRateBps = 9'953'280'000ULL;
inline constexpr std::uint64_t kXgsPonFrameNs = 125'000ULL;
inline constexpr Words kDefaultGuardWords = 8;

// Upstream TDMA timing. Capacity is derived once from line rate and frame
// length and never changes during a run.
class FrameClock {
 public:
  FrameClock() : FrameClock(kXgsPonUpstreamRateBps, kXgsPonFrameNs) {}
  FrameClock(std::uint64_t line_rate_bps, std::uint64_t frame_duration_ns);

  // Smallest clock whose frame holds exactly `words`; used by tests and
  // what-if studies that want a tiny frame.
  static FrameClock with_capacity(Words words,
                                  std::uint64_t frame_duration_ns = kXgsPonFrameNs);

  std::uint64_t line_rate_bps() const { return line_rate_bps_; }
  std::uint64_t frame_duration_ns() const { return frame_duration_ns_; }
  Words upstream_capacity() const { return capacity_words_; }
  // Duration of one allocation word on the wire, in picoseconds.
  double word_time_ps() const;

  std::uint64_t frame_start_ns(FrameIndex frame) const {
    return frame * frame_duration_ns_;
  }

 private:
  std::uint64_t line_rate_bps_;
  std::uint64_t frame_duration_ns_;
  Words capacity_words_;
};

struct Grant {
  AllocId alloc_id;
  OnuId onu_id;
  Words start_word = 0;
  Words grant_words = 0;
  bool dbru_requested = false;

  Words end_word() const { return start_word + grant_words; }

  friend bool operator==(const Grant&, const Grant&) = default;
};

struct PhysicalBandwidthMap {
  FrameIndex frame_index = 0;
  std::vector<Grant> grants;

  Words granted_words() const;
  // Number of distinct bursts: maximal runs of abutting grants to one ONU.
  std::size_t burst_count() const;

  friend bool operator==(const PhysicalBandwidthMap&,
                         const PhysicalBandwidthMap&) = default;
};

enum class TrafficClassKind : std::uint8_t { kFixed, kAssured, kBestEffort };

std::string_view to_string(TrafficClassKind kind);

struct VirtualRequest {
  AllocId alloc_id;
  Words grant_words = 0;
  bool dbru_requested = false;
  TrafficClassKind priority_class = TrafficClassKind::kBestEffort;

  friend bool operator==(const VirtualRequest&, const VirtualRequest&) = default;
};

struct VirtualBandwidthMap {
  FrameIndex frame_index = 0;
  SliceId slice_id;
  std::vector<VirtualRequest> requests;

  Words total_words() const;

  friend bool operator==(const VirtualBandwidthMap&,
                         const VirtualBandwidthMap&) = default;
};

enum class ViolationKind : std::uint8_t {
  kUnsorted,
  kOverlap,
  kMissingGuard,
  kEmptyGrant,
  kOutOfFrame,
  kCapacityOverflow,
};

std::string_view to_string(ViolationKind kind);

inline constexpr std::size_t kNoGrant = static_cast<std::size_t>(-1);

struct Violation {
  ViolationKind kind;
  std::size_t first = kNoGrant;
  std::size_t second = kNoGrant;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

std::ostream& operator<<(std::ostream& os, const Violation& v);

// Reports every physical-realizability problem in `map`. Violations are data;
// this never throws.
ValidationReport validate_physical_map(const PhysicalBandwidthMap& map,
                                       const FrameClock& clock,
                                       Words guard_words);

// Payload ceiling for a frame carrying `onu_burst_count` bursts.
Words usable_capacity(const FrameClock& clock, std::size_t onu_burst_count,
                      Words guard_words);

// Physical BMap trace: one CSV line per grant.
inline constexpr std::string_view kBmapTraceHeader =
    "frame_index,alloc_id,onu_id,start_word,grant_words,dbru_flag";

void write_bmap_trace_header(std::ostream& os);
void write_bmap_trace(std::ostream& os, const PhysicalBandwidthMap& map);

// Parses a trace written by write_bmap_trace back into per-frame maps.
// Frames without grants do not appear in a trace.
std::vector<PhysicalBandwidthMap> read_bmap_trace(std::istream& is);

}  // namespace ponvdba
