// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ponvdba/ids.hpp"
#include "ponvdba/pon_frame.hpp"

namespace ponvdba {

struct TrafficClass {
  TrafficClassKind kind = TrafficClassKind::kBestEffort;
  Words fixed_words = 0;     // kFixed only
  std::uint32_t weight = 1;  // kAssured / kBestEffort water-filling weight

  friend bool operator==(const TrafficClass&, const TrafficClass&) = default;
};

struct AllocBinding {
  AllocId alloc_id;
  OnuId onu_id;
  TrafficClass traffic_class;

  friend bool operator==(const AllocBinding&, const AllocBinding&) = default;
};

using DbaAlgorithmId = std::string;

// One tenant (VNO): its guaranteed words per frame, the AllocIDs it owns and
// the DBA algorithm its virtual instance runs.
struct SliceDescriptor {
  SliceId slice_id;
  Words share_words = 0;
  bool surplus_eligible = false;
  std::vector<AllocBinding> allocs;
  DbaAlgorithmId algorithm;
  int priority = 0;  // lower is laid out earlier in the frame

  Words fixed_words_total() const;
  const AllocBinding* find(AllocId id) const;
  bool owns(AllocId id) const { return find(id) != nullptr; }

  friend bool operator==(const SliceDescriptor&, const SliceDescriptor&) = default;
};

struct AllocOwner {
  SliceId slice_id;
  OnuId onu_id;
};

// The set of registered slices. Construction enforces the structural rules
// (unique slice ids, disjoint AllocID sets); check_capacity() enforces that
// the guaranteed shares fit the frame.
class SliceRegistry {
 public:
  SliceRegistry() = default;
  explicit SliceRegistry(std::vector<SliceDescriptor> slices);

  // Structural problems plus capacity problems, as human-readable strings.
  static std::vector<std::string> problems(const std::vector<SliceDescriptor>& slices,
                                           const FrameClock& clock, Words guard_words);

  // Throws RegistryError if shares cannot be honoured in the worst case, i.e.
  // when every registered AllocID becomes its own burst.
  void check_capacity(const FrameClock& clock, Words guard_words) const;

  const std::vector<SliceDescriptor>& slices() const { return slices_; }
  const SliceDescriptor* find(SliceId id) const;
  std::optional<AllocOwner> owner(AllocId id) const;
  std::size_t alloc_count() const { return owners_.size(); }

  // Slice ids in frame layout order: ascending priority, then ascending id.
  std::vector<SliceId> layout_order() const;

 private:
  std::vector<SliceDescriptor> slices_;
  std::unordered_map<SliceId, std::size_t> index_;
  std::unordered_map<AllocId, AllocOwner> owners_;
};

}  // namespace ponvdba
