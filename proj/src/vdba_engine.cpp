// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/vdba_engine.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "ponvdba/errors.hpp"
#include "ponvdba/water_fill.hpp"

namespace ponvdba {

AlgorithmRegistry AlgorithmRegistry::with_builtins() {
  AlgorithmRegistry reg;
  reg.register_algorithm(DbaAlgorithmId(kFixedLowLatency),
                         [] { return std::make_unique<FixedLowLatency>(); });
  reg.register_algorithm(DbaAlgorithmId(kStatusReporting),
                         [] { return std::make_unique<StatusReporting>(); });
  return reg;
}

AlgorithmRegistry& AlgorithmRegistry::register_algorithm(DbaAlgorithmId id,
                                                         DbaAlgorithmFactory factory) {
  if (factories_.contains(id)) {
    throw DuplicateAlgorithmId("DBA algorithm '" + id + "' already registered");
  }
  factories_.emplace(std::move(id), std::move(factory));
  return *this;
}

bool AlgorithmRegistry::contains(std::string_view id) const {
  return factories_.find(id) != factories_.end();
}

std::unique_ptr<DbaAlgorithm> AlgorithmRegistry::create(std::string_view id) const {
  const auto it = factories_.find(id);
  if (it == factories_.end()) {
    throw UnknownAlgorithm("unknown DBA algorithm '" + std::string(id) + "'");
  }
  return it->second();
}

std::vector<DbaAlgorithmId> AlgorithmRegistry::ids() const {
  std::vector<DbaAlgorithmId> out;
  for (const auto& [id, _] : factories_) out.push_back(id);
  return out;
}

namespace {

struct Pending {
  OnuId onu;
  AllocId alloc;
  Words words;
  TrafficClassKind kind;
};

// Requests are emitted grouped by ONU so that one ONU's AllocIDs form a
// single burst when the merger lays them out.
void emit_sorted(std::vector<Pending>& pending, bool dbru, VirtualBandwidthMap& map) {
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.onu, a.alloc) < std::tie(b.onu, b.alloc);
  });
  for (const auto& p : pending) {
    if (p.words == 0) continue;
    map.requests.push_back({p.alloc, p.words, dbru, p.kind});
  }
}

}  // namespace

VirtualBandwidthMap FixedLowLatency::schedule(const SliceDescriptor& slice,
                                              std::span<const DemandEntry> /*demand*/,
                                              FrameIndex frame) {
  VirtualBandwidthMap map{frame, slice.slice_id, {}};
  std::vector<Pending> pending;
  for (const auto& a : slice.allocs) {
    if (a.traffic_class.kind != TrafficClassKind::kFixed) continue;
    pending.push_back({a.onu_id, a.alloc_id, a.traffic_class.fixed_words, TrafficClassKind::kFixed});
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.onu, a.alloc) < std::tie(b.onu, b.alloc);
  });
  // A registered slice never trips this clamp; it keeps the share cap true
  // for unchecked descriptors too.
  Words remaining = slice.share_words;
  for (auto& p : pending) {
    p.words = std::min(p.words, remaining);
    remaining -= p.words;
  }
  emit_sorted(pending, false, map);
  return map;
}

VirtualBandwidthMap StatusReporting::schedule(const SliceDescriptor& slice,
                                              std::span<const DemandEntry> demand,
                                              FrameIndex frame) {
  VirtualBandwidthMap map{frame, slice.slice_id, {}};
  const std::size_t n = demand.size();
  std::vector<const AllocBinding*> binding(n);
  std::vector<std::uint64_t> grant(n, 0);
  for (std::size_t i = 0; i < n; ++i) binding[i] = slice.find(demand[i].alloc_id);

  std::uint64_t remaining = slice.share_words;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tc = binding[i]->traffic_class;
    if (tc.kind != TrafficClassKind::kFixed) continue;
    grant[i] = std::min<std::uint64_t>(tc.fixed_words, remaining);
    remaining -= grant[i];
  }

  for (const auto tier : {TrafficClassKind::kAssured, TrafficClassKind::kBestEffort}) {
    std::vector<std::size_t> members;
    std::vector<WaterFillClaim> claims;
    for (std::size_t i = 0; i < n; ++i) {
      if (binding[i]->traffic_class.kind != tier) continue;
      members.push_back(i);
      claims.push_back({demand[i].demand_words(), binding[i]->traffic_class.weight});
    }
    if (members.empty()) continue;
    const auto split = weighted_water_fill(claims, remaining, frame);
    for (std::size_t k = 0; k < members.size(); ++k) {
      grant[members[k]] = split[k];
      remaining -= split[k];
    }
  }

  std::vector<Pending> in_share;
  std::vector<Pending> unmet;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = *binding[i];
    in_share.push_back({b.onu_id, b.alloc_id, static_cast<Words>(grant[i]), b.traffic_class.kind});
    if (slice.surplus_eligible && b.traffic_class.kind != TrafficClassKind::kFixed) {
      const std::uint64_t want = demand[i].demand_words();
      if (want > grant[i]) {
        unmet.push_back(
            {b.onu_id, b.alloc_id, static_cast<Words>(want - grant[i]), b.traffic_class.kind});
      }
    }
  }
  emit_sorted(in_share, true, map);
  emit_sorted(unmet, false, map);
  return map;
}

VdbaInstance::VdbaInstance(SliceDescriptor slice, std::unique_ptr<DbaAlgorithm> algorithm)
    : slice_(std::move(slice)), algorithm_(std::move(algorithm)) {}

VirtualBandwidthMap VdbaInstance::run_cycle(std::span<const DemandEntry> demand,
                                            FrameIndex frame) {
  std::unordered_set<AllocId> seen;
  bool ok = demand.size() == slice_.allocs.size();
  for (const auto& d : demand) {
    if (!ok) break;
    ok = slice_.owns(d.alloc_id) && seen.insert(d.alloc_id).second;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "demand list does not cover exactly the AllocIDs of slice " << slice_.slice_id;
    throw DemandMismatch(msg.str());
  }
  ++cycles_;
  auto map = algorithm_->schedule(slice_, demand, frame);
  map.frame_index = frame;
  map.slice_id = slice_.slice_id;
  return map;
}

VirtualBandwidthMap run_dba_cycle(const AlgorithmRegistry& registry,
                                  const SliceDescriptor& slice,
                                  std::span<const DemandEntry> demand, FrameIndex frame) {
  VdbaInstance instance(slice, registry.create(slice.algorithm));
  return instance.run_cycle(demand, frame);
}

VirtualBandwidthMap fixed_class_fallback(const SliceDescriptor& slice, FrameIndex frame) {
  return FixedLowLatency{}.schedule(slice, {}, frame);
}

}  // namespace ponvdba
