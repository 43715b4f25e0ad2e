// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <variant>
#include <vector>

#include "ponvdba/dbru_ingest.hpp"
#include "ponvdba/pon_frame.hpp"

namespace ponvdba {

// Constant bit rate. packet_bytes == 0 enqueues each frame's bytes as a
// single packet; otherwise fixed-size packets with the remainder carried.
struct CbrProfile {
  std::uint64_t rate_bps = 0;
  std::uint32_t packet_bytes = 0;
};

// Poisson packet arrivals with exponentially distributed sizes.
struct PoissonProfile {
  std::uint64_t mean_rate_bps = 0;
  std::uint32_t mean_packet_bytes = 1500;
};

// CBR for the first round(duty * period) frames of every period, silent
// otherwise. The phase offset is drawn once from the queue's RNG.
struct OnOffProfile {
  std::uint64_t rate_bps = 0;
  double duty = 0.5;
  std::uint32_t period_frames = 8;
  std::uint32_t packet_bytes = 0;
};

using TrafficProfile = std::variant<CbrProfile, PoissonProfile, OnOffProfile>;

inline constexpr std::uint64_t kDefaultBufferBytes = 4ULL << 20;

struct QueueConfig {
  AllocId alloc_id;
  TrafficProfile profile = CbrProfile{};
  std::uint64_t buffer_bytes = kDefaultBufferBytes;  // tail drop above this
};

struct Packet {
  FrameIndex arrival_frame = 0;
  std::uint32_t size_bytes = 0;
  std::uint32_t remaining_bytes = 0;
};

// A packet whose last byte left in `transmit_frame`.
struct TransmissionRecord {
  AllocId alloc_id;
  OnuId onu_id;
  FrameIndex arrival_frame = 0;
  FrameIndex transmit_frame = 0;
  std::uint32_t bytes = 0;
  Words start_word = 0;  // start of the grant that finished the packet

  FrameIndex latency_frames() const { return transmit_frame - arrival_frame; }
  // Whole-frame latency refined by the grant's position inside the frame.
  double latency_us(const FrameClock& clock) const;

  friend bool operator==(const TransmissionRecord&, const TransmissionRecord&) = default;
};

// How one grant in a map was used by this ONU.
struct GrantUse {
  AllocId alloc_id;
  Words granted_words = 0;
  std::uint64_t sent_bytes = 0;
};

struct GrantApplication {
  std::vector<TransmissionRecord> records;
  std::vector<GrantUse> uses;
};

class OnuState {
 public:
  OnuState(OnuId id, std::vector<QueueConfig> queues, const FrameClock& clock,
           std::uint64_t rng_seed);

  // Enqueues one frame of arrivals on every queue and returns one report per
  // AllocID carrying the resulting occupancy.
  std::vector<DbruReport> advance_frame(FrameIndex frame);

  // Drains queues FIFO for every grant addressed to this ONU. Grants to other
  // ONUs are ignored.
  GrantApplication apply_grants(const PhysicalBandwidthMap& map);

  OnuId id() const { return id_; }
  std::size_t queue_count() const { return queues_.size(); }
  std::uint64_t occupancy(AllocId alloc) const;
  std::uint64_t enqueued_bytes() const { return enqueued_; }
  std::uint64_t dequeued_bytes() const { return dequeued_; }
  std::uint64_t dropped_bytes() const { return dropped_; }
  std::uint64_t offered_bytes(AllocId alloc) const;
  std::uint64_t dropped_bytes(AllocId alloc) const;

  // enqueued - dequeued == occupancy and every queue's byte count equals the
  // sum of its packets' remaining bytes.
  bool conserves_bytes() const;

 private:
  struct Queue {
    QueueConfig config;
    std::mt19937_64 rng;
    std::deque<Packet> packets;
    std::uint64_t bytes = 0;
    std::uint64_t offered = 0;
    std::uint64_t dropped = 0;
    // Bit-nanoseconds not yet turned into whole bytes.
    std::uint64_t carry = 0;
    std::uint64_t pending_bytes = 0;
    std::uint32_t phase = 0;
  };

  void arrive(Queue& q, FrameIndex frame);
  void enqueue(Queue& q, FrameIndex frame, std::uint64_t size);
  void cbr_bytes(Queue& q, FrameIndex frame, std::uint64_t rate_bps, std::uint32_t packet_bytes);
  Queue* find(AllocId alloc);
  const Queue* find(AllocId alloc) const;

  OnuId id_;
  std::uint64_t frame_ns_;
  std::vector<Queue> queues_;
  std::uint64_t enqueued_ = 0;
  std::uint64_t dequeued_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace ponvdba
