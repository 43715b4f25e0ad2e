// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/merging_engine.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "ponvdba/errors.hpp"
#include "ponvdba/water_fill.hpp"

namespace ponvdba {

std::string_view to_string(SurplusDistribution s) {
  switch (s) {
    case SurplusDistribution::kNone: return "none";
    case SurplusDistribution::kWeightedByShare: return "weighted_by_share";
    case SurplusDistribution::kRoundRobin: return "round_robin";
  }
  return "?";
}

std::string_view to_string(OverrunHandling o) {
  switch (o) {
    case OverrunHandling::kClipTail: return "clip_tail";
    case OverrunHandling::kRejectMap: return "reject_map";
  }
  return "?";
}

std::optional<SurplusDistribution> parse_surplus_distribution(std::string_view s) {
  for (auto v : {SurplusDistribution::kNone, SurplusDistribution::kWeightedByShare,
                 SurplusDistribution::kRoundRobin}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<OverrunHandling> parse_overrun_handling(std::string_view s) {
  for (auto v : {OverrunHandling::kClipTail, OverrunHandling::kRejectMap}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

MergingEngine::MergingEngine(const SliceRegistry& registry, const FrameClock& clock,
                             MergePolicy policy)
    : registry_(&registry), clock_(clock), policy_(policy) {}

namespace {

struct Request {
  AllocId alloc;
  OnuId onu;
  Words words;
  bool dbru;
};

struct SliceWork {
  const SliceDescriptor* slice = nullptr;
  std::vector<Request> requests;
  std::uint64_t total = 0;
  std::uint64_t base = 0;
  std::uint64_t excess = 0;
  std::uint64_t keep = 0;
};

// Walks the grants that keeping `keep(w)` words of each slice would produce
// and counts adjacent pairs owned by different ONUs.
template <typename KeepFn>
std::uint64_t onu_changes(const std::vector<SliceWork>& work, KeepFn keep) {
  std::uint64_t changes = 0;
  std::optional<OnuId> prev;
  for (const auto& w : work) {
    std::uint64_t left = keep(w);
    for (const auto& r : w.requests) {
      if (left == 0) break;
      left -= std::min<std::uint64_t>(left, r.words);
      if (prev && *prev != r.onu) ++changes;
      prev = r.onu;
    }
  }
  return changes;
}

std::string slice_msg(const char* what, SliceId id, FrameIndex frame) {
  std::ostringstream msg;
  msg << what << " (slice " << id << ", frame " << frame << ")";
  return msg.str();
}

}  // namespace

PhysicalBandwidthMap MergingEngine::merge(FrameIndex frame,
                                          std::span<const VirtualBandwidthMap> maps) const {
  const bool reject = policy_.overrun_handling == OverrunHandling::kRejectMap;
  std::vector<SliceWork> work;
  std::unordered_set<SliceId> seen;
  for (const auto& vmap : maps) {
    if (vmap.frame_index != frame) {
      std::ostringstream msg;
      msg << "virtual map of slice " << vmap.slice_id << " is for frame " << vmap.frame_index
          << ", merging frame " << frame;
      throw FrameMismatch(msg.str());
    }
    if (!seen.insert(vmap.slice_id).second) {
      throw DuplicateSlice(slice_msg("two virtual maps for one slice", vmap.slice_id, frame));
    }
    const SliceDescriptor* slice = registry_->find(vmap.slice_id);
    if (slice == nullptr) {
      throw UnknownSlice(slice_msg("virtual map for unregistered slice", vmap.slice_id, frame));
    }

    SliceWork w;
    w.slice = slice;
    for (const auto& r : vmap.requests) {
      const AllocBinding* b = slice->find(r.alloc_id);
      if (b == nullptr) {
        if (reject) {
          throw MapRejected(slice_msg("request for an AllocID outside the slice", slice->slice_id, frame));
        }
        continue;
      }
      if (r.grant_words == 0) continue;
      w.requests.push_back({r.alloc_id, b->onu_id, r.grant_words, r.dbru_requested});
      w.total += r.grant_words;
    }
    w.base = std::min<std::uint64_t>(w.total, slice->share_words);
    if (w.total > w.base && !slice->surplus_eligible && reject) {
      throw MapRejected(slice_msg("virtual map exceeds share", slice->slice_id, frame));
    }
    if (slice->surplus_eligible && policy_.surplus_distribution != SurplusDistribution::kNone) {
      w.excess = w.total - w.base;
    }
    work.push_back(std::move(w));
  }

  std::sort(work.begin(), work.end(), [](const SliceWork& a, const SliceWork& b) {
    if (a.slice->priority != b.slice->priority) return a.slice->priority < b.slice->priority;
    return a.slice->slice_id < b.slice->slice_id;
  });

  const std::uint64_t capacity = clock_.upstream_capacity();
  const std::uint64_t guard = policy_.guard_words;

  // Surplus pool: capacity left after every entitlement, reserving guards as
  // if every surplus request were granted. Dropping grants never adds ONU
  // changes, so this reservation is an upper bound.
  std::uint64_t committed = 0;
  for (const auto& w : work) committed += w.base;
  committed += guard * onu_changes(work, [](const SliceWork& w) { return w.base + w.excess; });
  const std::uint64_t pool = committed >= capacity ? 0 : capacity - committed;

  std::vector<std::size_t> claimants;
  std::vector<WaterFillClaim> claims;
  for (std::size_t i = 0; i < work.size(); ++i) {
    work[i].keep = work[i].base;
    if (work[i].excess == 0) continue;
    claimants.push_back(i);
    const std::uint64_t weight =
        policy_.surplus_distribution == SurplusDistribution::kWeightedByShare
            ? std::max<std::uint64_t>(work[i].slice->share_words, 1)
            : 1;
    claims.push_back({work[i].excess, weight});
  }
  if (!claims.empty()) {
    const auto split = weighted_water_fill(claims, pool, frame);
    for (std::size_t k = 0; k < claimants.size(); ++k) work[claimants[k]].keep += split[k];
  }

  PhysicalBandwidthMap out{frame, {}};
  std::uint64_t cursor = 0;
  std::optional<OnuId> prev;
  for (const auto& w : work) {
    std::uint64_t left = w.keep;
    for (const auto& r : w.requests) {
      if (left == 0) break;
      const std::uint64_t words = std::min<std::uint64_t>(left, r.words);
      left -= words;
      const std::uint64_t start = cursor + ((prev && *prev != r.onu) ? guard : 0);
      std::uint64_t fit = words;
      if (start + words > capacity) {
        if (reject) {
          throw MapRejected(slice_msg("merged frame overflows capacity", w.slice->slice_id, frame));
        }
        fit = start >= capacity ? 0 : capacity - start;
      }
      if (fit == 0) return out;
      out.grants.push_back({r.alloc, r.onu, static_cast<Words>(start), static_cast<Words>(fit), r.dbru});
      cursor = start + fit;
      prev = r.onu;
      if (fit < words) return out;
    }
  }
  return out;
}

PhysicalBandwidthMap merge(std::span<const VirtualBandwidthMap> maps,
                           const SliceRegistry& registry, const FrameClock& clock,
                           const MergePolicy& policy) {
  const FrameIndex frame = maps.empty() ? 0 : maps.front().frame_index;
  return MergingEngine(registry, clock, policy).merge(frame, maps);
}

ProbedMerge merge_latency_probe(const MergingEngine& engine, FrameIndex frame,
                                std::span<const VirtualBandwidthMap> maps) {
  const auto t0 = std::chrono::steady_clock::now();
  ProbedMerge probe{engine.merge(frame, maps), {}};
  const auto t1 = std::chrono::steady_clock::now();
  probe.duration = std::max(std::chrono::nanoseconds{1},
                            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0));
  return probe;
}

void write_merge_event_header(std::ostream& os) { os << kMergeEventHeader << '\n'; }

void write_merge_event(std::ostream& os, const MergeEvent& e) {
  os << e.frame_index << ',' << e.maps_received << ',' << e.maps_late << ','
     << e.merge_duration_ns << '\n';
}

}  // namespace ponvdba
