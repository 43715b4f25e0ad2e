// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ponvdba/ids.hpp"
#include "ponvdba/slice.hpp"

namespace ponvdba {

inline constexpr FrameIndex kDefaultStalenessFrames = 4;

// Buffer-occupancy report for one AllocID, as sent by an ONU each frame.
struct DbruReport {
  FrameIndex frame_index = 0;
  OnuId onu_id;
  AllocId alloc_id;
  std::uint64_t occupancy_bytes = 0;

  friend bool operator==(const DbruReport&, const DbruReport&) = default;
};

struct DemandEntry {
  AllocId alloc_id;
  std::uint64_t occupancy_bytes = 0;
  bool stale = true;

  Words demand_words() const { return bytes_to_words(occupancy_bytes); }

  friend bool operator==(const DemandEntry&, const DemandEntry&) = default;
};

// Latest report per AllocID for the AllocIDs one pipeline is allowed to see.
class DemandState {
 public:
  struct Record {
    std::uint64_t occupancy_bytes = 0;
    FrameIndex frame_index = 0;

    friend bool operator==(const Record&, const Record&) = default;
  };

  DemandState() = default;
  DemandState(std::unordered_map<AllocId, OnuId> registered,
              FrameIndex staleness_frames = kDefaultStalenessFrames);

  // Registers exactly the slice's AllocIDs.
  static DemandState for_slice(const SliceDescriptor& slice,
                               FrameIndex staleness_frames = kDefaultStalenessFrames);

  // Throws UnknownAllocId for an AllocID that is not registered here, or that
  // is registered to a different ONU. Reports older than the stored one are
  // ignored.
  void ingest(const DbruReport& report);

  std::optional<Record> latest(AllocId id) const;
  std::size_t size() const { return latest_.size(); }
  FrameIndex staleness_frames() const { return staleness_frames_; }
  bool is_registered(AllocId id) const { return registered_.contains(id); }

  friend bool operator==(const DemandState&, const DemandState&) = default;

 private:
  std::unordered_map<AllocId, OnuId> registered_;
  std::unordered_map<AllocId, Record> latest_;
  FrameIndex staleness_frames_ = kDefaultStalenessFrames;
};

// Demand for exactly the slice's AllocIDs in ascending AllocID order. Never
// reported AllocIDs read as zero occupancy and stale; a report is stale when
// now - reported_frame exceeds the staleness threshold.
std::vector<DemandEntry> demand_snapshot(const DemandState& state,
                                         const SliceDescriptor& slice, FrameIndex now);

inline constexpr std::string_view kDbruTraceHeader =
    "frame_index,onu_id,alloc_id,occupancy_bytes";

void write_dbru_trace_header(std::ostream& os);
void write_dbru_trace(std::ostream& os, const DbruReport& report);
std::vector<DbruReport> read_dbru_trace(std::istream& is);

}  // namespace ponvdba
