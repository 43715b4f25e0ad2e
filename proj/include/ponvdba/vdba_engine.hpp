// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ponvdba/dbru_ingest.hpp"
#include "ponvdba/pon_frame.hpp"
#include "ponvdba/slice.hpp"

namespace ponvdba {

inline constexpr std::string_view kFixedLowLatency = "fixed_low_latency";
inline constexpr std::string_view kStatusReporting = "status_reporting";

// A DBA strategy run by one virtual instance. Implementations may keep private
// state across frames; one object is created per slice so instances never
// share it.
class DbaAlgorithm {
 public:
  virtual ~DbaAlgorithm() = default;

  // `demand` covers exactly the slice's AllocIDs, ascending.
  virtual VirtualBandwidthMap schedule(const SliceDescriptor& slice,
                                       std::span<const DemandEntry> demand,
                                       FrameIndex frame) = 0;
};

using DbaAlgorithmFactory = std::function<std::unique_ptr<DbaAlgorithm>()>;

class AlgorithmRegistry {
 public:
  // Registry pre-loaded with FixedLowLatency and StatusReporting.
  static AlgorithmRegistry with_builtins();

  // Throws DuplicateAlgorithmId.
  AlgorithmRegistry& register_algorithm(DbaAlgorithmId id, DbaAlgorithmFactory factory);

  bool contains(std::string_view id) const;
  // Throws UnknownAlgorithm.
  std::unique_ptr<DbaAlgorithm> create(std::string_view id) const;
  std::vector<DbaAlgorithmId> ids() const;

 private:
  std::map<DbaAlgorithmId, DbaAlgorithmFactory, std::less<>> factories_;
};

// Pre-allocates every fixed-class AllocID its fixed_words each frame without
// looking at reports. Other classes receive nothing.
class FixedLowLatency final : public DbaAlgorithm {
 public:
  VirtualBandwidthMap schedule(const SliceDescriptor& slice,
                               std::span<const DemandEntry> demand,
                               FrameIndex frame) override;
};

// Report-driven allocation within the slice share: fixed class first, then
// assured up to reported demand, then best effort, each contended tier split
// by weighted water-filling. A surplus-eligible slice appends its unmet
// demand after the in-share requests so the merger can clip it first.
class StatusReporting final : public DbaAlgorithm {
 public:
  VirtualBandwidthMap schedule(const SliceDescriptor& slice,
                               std::span<const DemandEntry> demand,
                               FrameIndex frame) override;
};

// One tenant's virtual DBA: a slice descriptor bound to its own algorithm
// object.
class VdbaInstance {
 public:
  VdbaInstance(SliceDescriptor slice, std::unique_ptr<DbaAlgorithm> algorithm);

  // Throws DemandMismatch when `demand` does not cover exactly this slice.
  VirtualBandwidthMap run_cycle(std::span<const DemandEntry> demand, FrameIndex frame);

  const SliceDescriptor& slice() const { return slice_; }
  std::uint64_t cycles() const { return cycles_; }

 private:
  SliceDescriptor slice_;
  std::unique_ptr<DbaAlgorithm> algorithm_;
  std::uint64_t cycles_ = 0;
};

// One-shot cycle on a fresh algorithm instance.
VirtualBandwidthMap run_dba_cycle(const AlgorithmRegistry& registry,
                                  const SliceDescriptor& slice,
                                  std::span<const DemandEntry> demand, FrameIndex frame);

// What the merger uses for a slice whose map missed the frame deadline.
VirtualBandwidthMap fixed_class_fallback(const SliceDescriptor& slice, FrameIndex frame);

}  // namespace ponvdba
