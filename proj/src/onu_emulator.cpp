// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/onu_emulator.hpp"

#include <algorithm>
#include <cmath>

namespace ponvdba {

namespace {

constexpr std::uint64_t kBitNsPerByte = 8ULL * 1'000'000'000ULL;

std::mt19937_64 queue_rng(std::uint64_t seed, OnuId onu, AllocId alloc) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    onu.value(), alloc.value()};
  return std::mt19937_64(seq);
}

}  // namespace

double TransmissionRecord::latency_us(const FrameClock& clock) const {
  const double frame_us = static_cast<double>(clock.frame_duration_ns()) / 1e3;
  return static_cast<double>(latency_frames()) * frame_us +
         static_cast<double>(start_word) * clock.word_time_ps() / 1e6;
}

OnuState::OnuState(OnuId id, std::vector<QueueConfig> queues, const FrameClock& clock,
                   std::uint64_t rng_seed)
    : id_(id), frame_ns_(clock.frame_duration_ns()) {
  queues_.reserve(queues.size());
  for (auto& cfg : queues) {
    Queue q;
    q.rng = queue_rng(rng_seed, id, cfg.alloc_id);
    if (const auto* onoff = std::get_if<OnOffProfile>(&cfg.profile);
        onoff != nullptr && onoff->period_frames > 0) {
      q.phase = std::uniform_int_distribution<std::uint32_t>(0, onoff->period_frames - 1)(q.rng);
    }
    q.config = std::move(cfg);
    queues_.push_back(std::move(q));
  }
}

void OnuState::enqueue(Queue& q, FrameIndex frame, std::uint64_t size) {
  if (size == 0) return;
  q.offered += size;
  if (q.bytes + size > q.config.buffer_bytes) {
    q.dropped += size;
    dropped_ += size;
    return;
  }
  const auto s = static_cast<std::uint32_t>(size);
  q.packets.push_back({frame, s, s});
  q.bytes += size;
  enqueued_ += size;
}

void OnuState::cbr_bytes(Queue& q, FrameIndex frame, std::uint64_t rate_bps,
                         std::uint32_t packet_bytes) {
  q.carry += rate_bps * frame_ns_;
  const std::uint64_t bytes = q.carry / kBitNsPerByte;
  q.carry %= kBitNsPerByte;
  if (packet_bytes == 0) {
    enqueue(q, frame, bytes);
    return;
  }
  q.pending_bytes += bytes;
  while (q.pending_bytes >= packet_bytes) {
    enqueue(q, frame, packet_bytes);
    q.pending_bytes -= packet_bytes;
  }
}

void OnuState::arrive(Queue& q, FrameIndex frame) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CbrProfile>) {
          cbr_bytes(q, frame, p.rate_bps, p.packet_bytes);
        } else if constexpr (std::is_same_v<P, PoissonProfile>) {
          if (p.mean_rate_bps == 0 || p.mean_packet_bytes == 0) return;
          const double mean_packets = static_cast<double>(p.mean_rate_bps) *
                                      static_cast<double>(frame_ns_) /
                                      (static_cast<double>(kBitNsPerByte) * p.mean_packet_bytes);
          std::poisson_distribution<std::uint32_t> count(mean_packets);
          std::exponential_distribution<double> size(1.0 / p.mean_packet_bytes);
          const auto n = count(q.rng);
          for (std::uint32_t i = 0; i < n; ++i) {
            const double s = std::clamp(std::ceil(size(q.rng)), 1.0, 65535.0);
            enqueue(q, frame, static_cast<std::uint64_t>(s));
          }
        } else {
          if (p.period_frames == 0) return;
          const auto on_frames =
              static_cast<std::uint64_t>(std::llround(p.duty * p.period_frames));
          if ((frame + q.phase) % p.period_frames < on_frames) {
            cbr_bytes(q, frame, p.rate_bps, p.packet_bytes);
          }
        }
      },
      q.config.profile);
}

std::vector<DbruReport> OnuState::advance_frame(FrameIndex frame) {
  std::vector<DbruReport> reports;
  reports.reserve(queues_.size());
  for (auto& q : queues_) {
    arrive(q, frame);
    reports.push_back({frame, id_, q.config.alloc_id, q.bytes});
  }
  return reports;
}

GrantApplication OnuState::apply_grants(const PhysicalBandwidthMap& map) {
  GrantApplication out;
  for (const auto& g : map.grants) {
    if (g.onu_id != id_) continue;
    Queue* q = find(g.alloc_id);
    if (q == nullptr) continue;
    std::uint64_t budget = static_cast<std::uint64_t>(g.grant_words) * kBytesPerWord;
    std::uint64_t sent = 0;
    while (budget > 0 && !q->packets.empty()) {
      Packet& head = q->packets.front();
      const auto take = static_cast<std::uint32_t>(std::min<std::uint64_t>(budget, head.remaining_bytes));
      head.remaining_bytes -= take;
      budget -= take;
      sent += take;
      if (head.remaining_bytes == 0) {
        out.records.push_back({g.alloc_id, id_, head.arrival_frame, map.frame_index,
                               head.size_bytes, g.start_word});
        q->packets.pop_front();
      }
    }
    q->bytes -= sent;
    dequeued_ += sent;
    out.uses.push_back({g.alloc_id, g.grant_words, sent});
  }
  return out;
}

std::uint64_t OnuState::occupancy(AllocId alloc) const {
  const Queue* q = find(alloc);
  return q == nullptr ? 0 : q->bytes;
}

std::uint64_t OnuState::offered_bytes(AllocId alloc) const {
  const Queue* q = find(alloc);
  return q == nullptr ? 0 : q->offered;
}

std::uint64_t OnuState::dropped_bytes(AllocId alloc) const {
  const Queue* q = find(alloc);
  return q == nullptr ? 0 : q->dropped;
}

bool OnuState::conserves_bytes() const {
  std::uint64_t total = 0;
  for (const auto& q : queues_) {
    std::uint64_t sum = 0;
    for (const auto& p : q.packets) sum += p.remaining_bytes;
    if (sum != q.bytes) return false;
    total += q.bytes;
  }
  return enqueued_ >= dequeued_ && enqueued_ - dequeued_ == total;
}

OnuState::Queue* OnuState::find(AllocId alloc) {
  for (auto& q : queues_) {
    if (q.config.alloc_id == alloc) return &q;
  }
  return nullptr;
}

const OnuState::Queue* OnuState::find(AllocId alloc) const {
  for (const auto& q : queues_) {
    if (q.config.alloc_id == alloc) return &q;
  }
  return nullptr;
}

}  // namespace ponvdba
