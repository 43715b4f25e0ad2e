// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ponvdba/pon_frame.hpp"
#include "ponvdba/slice.hpp"

namespace ponvdba {

enum class SurplusDistribution : std::uint8_t { kNone, kWeightedByShare, kRoundRobin };
enum class OverrunHandling : std::uint8_t { kClipTail, kRejectMap };

std::string_view to_string(SurplusDistribution s);
std::string_view to_string(OverrunHandling o);
std::optional<SurplusDistribution> parse_surplus_distribution(std::string_view s);
std::optional<OverrunHandling> parse_overrun_handling(std::string_view s);

struct MergePolicy {
  Words guard_words = kDefaultGuardWords;
  SurplusDistribution surplus_distribution = SurplusDistribution::kWeightedByShare;
  OverrunHandling overrun_handling = OverrunHandling::kClipTail;
};

// Composes the per-slice virtual maps of one frame into the physical map.
//
// Slices are packed back to back in layout order (ascending priority, then
// slice id), each slice's requests in the order its vDBA emitted them. A
// slice is entitled to min(virtual total, share); surplus-eligible slices may
// additionally receive words nobody else is entitled to, according to the
// surplus policy. Whatever a slice is not granted is cut from the tail of its
// virtual map. Grants to different ONUs are separated by guard words.
class MergingEngine {
 public:
  MergingEngine(const SliceRegistry& registry, const FrameClock& clock, MergePolicy policy);

  // Throws FrameMismatch, DuplicateSlice, UnknownSlice, and MapRejected
  // (reject_map policy only).
  PhysicalBandwidthMap merge(FrameIndex frame, std::span<const VirtualBandwidthMap> maps) const;

  const MergePolicy& policy() const { return policy_; }
  const FrameClock& clock() const { return clock_; }

 private:
  const SliceRegistry* registry_;
  FrameClock clock_;
  MergePolicy policy_;
};

// Frame index is taken from the maps; an empty list yields an empty map for
// frame 0.
PhysicalBandwidthMap merge(std::span<const VirtualBandwidthMap> maps,
                           const SliceRegistry& registry, const FrameClock& clock,
                           const MergePolicy& policy);

struct ProbedMerge {
  PhysicalBandwidthMap map;
  std::chrono::nanoseconds duration{0};
};

// Wall-clock cost of one merge call on the monotonic clock. Never reports a
// zero duration.
ProbedMerge merge_latency_probe(const MergingEngine& engine, FrameIndex frame,
                                std::span<const VirtualBandwidthMap> maps);

struct MergeEvent {
  FrameIndex frame_index = 0;
  std::size_t maps_received = 0;
  std::size_t maps_late = 0;
  std::uint64_t merge_duration_ns = 0;
};

inline constexpr std::string_view kMergeEventHeader =
    "frame_index,n_maps_received,n_maps_late,merge_duration_ns";

void write_merge_event_header(std::ostream& os);
void write_merge_event(std::ostream& os, const MergeEvent& e);

}  // namespace ponvdba
