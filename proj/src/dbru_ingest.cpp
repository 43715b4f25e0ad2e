// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/dbru_ingest.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "csv.hpp"
#include "ponvdba/errors.hpp"

namespace ponvdba {

DemandState::DemandState(std::unordered_map<AllocId, OnuId> registered,
                         FrameIndex staleness_frames)
    : registered_(std::move(registered)), staleness_frames_(staleness_frames) {}

DemandState DemandState::for_slice(const SliceDescriptor& slice,
                                   FrameIndex staleness_frames) {
  std::unordered_map<AllocId, OnuId> reg;
  for (const auto& a : slice.allocs) reg.emplace(a.alloc_id, a.onu_id);
  return DemandState(std::move(reg), staleness_frames);
}

void DemandState::ingest(const DbruReport& report) {
  const auto reg = registered_.find(report.alloc_id);
  if (reg == registered_.end() || reg->second != report.onu_id) {
    std::ostringstream msg;
    msg << "DBRU for alloc_id " << report.alloc_id << " from onu " << report.onu_id
        << " at frame " << report.frame_index << " does not match any registered AllocID";
    throw UnknownAllocId(msg.str());
  }
  auto [it, inserted] =
      latest_.try_emplace(report.alloc_id, Record{report.occupancy_bytes, report.frame_index});
  if (!inserted && report.frame_index >= it->second.frame_index) {
    it->second = Record{report.occupancy_bytes, report.frame_index};
  }
}

std::optional<DemandState::Record> DemandState::latest(AllocId id) const {
  const auto it = latest_.find(id);
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::vector<DemandEntry> demand_snapshot(const DemandState& state,
                                         const SliceDescriptor& slice, FrameIndex now) {
  std::vector<DemandEntry> out;
  out.reserve(slice.allocs.size());
  for (const auto& a : slice.allocs) {
    DemandEntry e{a.alloc_id, 0, true};
    if (const auto rec = state.latest(a.alloc_id)) {
      e.occupancy_bytes = rec->occupancy_bytes;
      e.stale = now > rec->frame_index && now - rec->frame_index > state.staleness_frames();
    }
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(),
            [](const DemandEntry& a, const DemandEntry& b) { return a.alloc_id < b.alloc_id; });
  return out;
}

void write_dbru_trace_header(std::ostream& os) { os << kDbruTraceHeader << '\n'; }

void write_dbru_trace(std::ostream& os, const DbruReport& r) {
  os << r.frame_index << ',' << r.onu_id.value() << ',' << r.alloc_id.value() << ','
     << r.occupancy_bytes << '\n';
}

std::vector<DbruReport> read_dbru_trace(std::istream& is) {
  std::vector<DbruReport> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (detail::skippable_line(line)) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields");
    }
    DbruReport r;
    r.frame_index = detail::parse_uint<FrameIndex>(f[0], line_no);
    r.onu_id = OnuId(detail::parse_uint<std::uint32_t>(f[1], line_no));
    r.alloc_id = AllocId(detail::parse_uint<std::uint32_t>(f[2], line_no));
    r.occupancy_bytes = detail::parse_uint<std::uint64_t>(f[3], line_no);
    out.push_back(r);
  }
  return out;
}

}  // namespace ponvdba
