// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/slice.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "ponvdba/errors.hpp"

namespace ponvdba {

Words SliceDescriptor::fixed_words_total() const {
  std::uint64_t total = 0;
  for (const auto& a : allocs) {
    if (a.traffic_class.kind == TrafficClassKind::kFixed) total += a.traffic_class.fixed_words;
  }
  return static_cast<Words>(total);
}

const AllocBinding* SliceDescriptor::find(AllocId id) const {
  const auto it = std::find_if(allocs.begin(), allocs.end(),
                               [id](const AllocBinding& a) { return a.alloc_id == id; });
  return it == allocs.end() ? nullptr : &*it;
}

namespace {

std::vector<std::string> structural_problems(const std::vector<SliceDescriptor>& slices) {
  std::vector<std::string> out;
  std::unordered_set<SliceId> seen_slices;
  std::unordered_map<AllocId, SliceId> alloc_slice;
  for (const auto& s : slices) {
    if (!seen_slices.insert(s.slice_id).second) {
      std::ostringstream msg;
      msg << "slice " << s.slice_id << " registered twice";
      out.push_back(msg.str());
    }
    for (const auto& a : s.allocs) {
      const auto [it, inserted] = alloc_slice.emplace(a.alloc_id, s.slice_id);
      if (!inserted) {
        std::ostringstream msg;
        msg << "alloc_id " << a.alloc_id << " owned by both slice " << it->second
            << " and slice " << s.slice_id;
        out.push_back(msg.str());
      }
      if (a.traffic_class.kind != TrafficClassKind::kFixed && a.traffic_class.weight == 0) {
        std::ostringstream msg;
        msg << "alloc_id " << a.alloc_id << " has zero weight";
        out.push_back(msg.str());
      }
    }
  }
  return out;
}

}  // namespace

SliceRegistry::SliceRegistry(std::vector<SliceDescriptor> slices) : slices_(std::move(slices)) {
  if (auto problems = structural_problems(slices_); !problems.empty()) {
    throw RegistryError(problems.front());
  }
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    index_.emplace(slices_[i].slice_id, i);
    for (const auto& a : slices_[i].allocs) {
      owners_.emplace(a.alloc_id, AllocOwner{slices_[i].slice_id, a.onu_id});
    }
  }
}

std::vector<std::string> SliceRegistry::problems(const std::vector<SliceDescriptor>& slices,
                                                 const FrameClock& clock, Words guard_words) {
  auto out = structural_problems(slices);
  std::uint64_t shares = 0;
  std::size_t allocs = 0;
  for (const auto& s : slices) {
    shares += s.share_words;
    allocs += s.allocs.size();
    if (s.fixed_words_total() > s.share_words) {
      std::ostringstream msg;
      msg << "slice " << s.slice_id << " fixed-class words " << s.fixed_words_total()
          << " exceed its share " << s.share_words;
      out.push_back(msg.str());
    }
  }
  const Words usable = usable_capacity(clock, allocs, guard_words);
  if (shares > usable) {
    std::ostringstream msg;
    msg << "sum of slice shares " << shares << " exceeds usable capacity " << usable
        << " words (" << allocs << " bursts, guard " << guard_words << ")";
    out.push_back(msg.str());
  }
  return out;
}

void SliceRegistry::check_capacity(const FrameClock& clock, Words guard_words) const {
  if (auto p = problems(slices_, clock, guard_words); !p.empty()) {
    throw RegistryError(p.front());
  }
}

const SliceDescriptor* SliceRegistry::find(SliceId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &slices_[it->second];
}

std::optional<AllocOwner> SliceRegistry::owner(AllocId id) const {
  const auto it = owners_.find(id);
  if (it == owners_.end()) return std::nullopt;
  return it->second;
}

std::vector<SliceId> SliceRegistry::layout_order() const {
  std::vector<const SliceDescriptor*> ptrs;
  for (const auto& s : slices_) ptrs.push_back(&s);
  std::sort(ptrs.begin(), ptrs.end(), [](const SliceDescriptor* a, const SliceDescriptor* b) {
    if (a->priority != b->priority) return a->priority < b->priority;
    return a->slice_id < b->slice_id;
  });
  std::vector<SliceId> ids;
  for (const auto* s : ptrs) ids.push_back(s->slice_id);
  return ids;
}

}  // namespace ponvdba
