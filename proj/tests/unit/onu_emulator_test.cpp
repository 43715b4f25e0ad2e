// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "ponvdba/onu_emulator.hpp"

namespace ponvdba {
namespace {

// bytes per 125 us frame -> bit rate
constexpr std::uint64_t rate_for(std::uint64_t bytes_per_frame) {
  return bytes_per_frame * 8 * 8'000;
}

PhysicalBandwidthMap one_grant(FrameIndex frame, std::uint32_t alloc, std::uint32_t onu, Words words) {
  return {frame, {{AllocId{alloc}, OnuId{onu}, 0, words, true}}};
}

TEST(OnuState, CbrEightMegabitIs125BytesPerFrame) {
  static_assert(8'000'000ULL * 125 / 1'000'000 / 8 == 125);
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{8'000'000}}}, FrameClock{}, 0);
  for (FrameIndex f = 0; f < 10; ++f) {
    auto reports = onu.advance_frame(f);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].occupancy_bytes, 125 * (f + 1));
  }
  EXPECT_EQ(onu.enqueued_bytes(), 1250u);
}

TEST(OnuState, FractionalRatesCarryOver) {
  // 1 Mb/s is 15.625 bytes per frame: 125 bytes every 8 frames.
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{1'000'000}}}, FrameClock{}, 0);
  for (FrameIndex f = 0; f < 8; ++f) onu.advance_frame(f);
  EXPECT_EQ(onu.occupancy(AllocId{1}), 125u);
}

TEST(OnuState, ZeroRateStillReports) {
  OnuState onu(OnuId{4}, {{AllocId{9}, CbrProfile{0}}}, FrameClock{}, 0);
  auto reports = onu.advance_frame(3);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0], (DbruReport{3, OnuId{4}, AllocId{9}, 0}));
}

TEST(OnuState, ThirtyTwoOnusThirtyTwoReports) {
  std::vector<OnuState> onus;
  for (std::uint32_t i = 1; i <= 32; ++i) {
    onus.emplace_back(OnuId{i}, std::vector<QueueConfig>{{AllocId{100 + i}, PoissonProfile{50'000'000}}},
                      FrameClock{}, 42);
  }
  std::size_t reports = 0;
  for (auto& o : onus) reports += o.advance_frame(0).size();
  EXPECT_EQ(reports, 32u);
}

TEST(OnuState, GrantWithEmptyQueueSendsNothing) {
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{0}}}, FrameClock{}, 0);
  onu.advance_frame(0);
  auto app = onu.apply_grants(one_grant(0, 1, 1, 100));
  EXPECT_TRUE(app.records.empty());
  ASSERT_EQ(app.uses.size(), 1u);
  EXPECT_EQ(app.uses[0].sent_bytes, 0u);
}

TEST(OnuState, ExactFitTransmitsPacket) {
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{rate_for(400)}}}, FrameClock{}, 0);
  onu.advance_frame(2);
  ASSERT_EQ(onu.occupancy(AllocId{1}), 400u);
  auto app = onu.apply_grants(one_grant(5, 1, 1, 100));
  ASSERT_EQ(app.records.size(), 1u);
  EXPECT_EQ(app.records[0].bytes, 400u);
  EXPECT_EQ(app.records[0].latency_frames(), 3u);
  EXPECT_EQ(onu.occupancy(AllocId{1}), 0u);
}

TEST(OnuState, PacketStraddlesFrames) {
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{rate_for(500)}}}, FrameClock{}, 0);
  onu.advance_frame(0);
  auto app = onu.apply_grants(one_grant(0, 1, 1, 100));
  EXPECT_TRUE(app.records.empty());
  EXPECT_EQ(app.uses[0].sent_bytes, 400u);
  EXPECT_EQ(onu.occupancy(AllocId{1}), 100u);
  EXPECT_TRUE(onu.conserves_bytes());
  app = onu.apply_grants(one_grant(1, 1, 1, 25));
  ASSERT_EQ(app.records.size(), 1u);
  EXPECT_EQ(app.records[0].bytes, 500u);
  EXPECT_EQ(app.records[0].transmit_frame, 1u);
}

TEST(OnuState, IgnoresGrantsForOtherOnus) {
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{rate_for(400)}}}, FrameClock{}, 0);
  onu.advance_frame(0);
  EXPECT_TRUE(onu.apply_grants(one_grant(0, 1, 2, 100)).uses.empty());
  EXPECT_EQ(onu.occupancy(AllocId{1}), 400u);
}

TEST(OnuState, TailDropAboveBuffer) {
  OnuState onu(OnuId{1}, {{AllocId{1}, CbrProfile{rate_for(400)}, 1000}}, FrameClock{}, 0);
  for (FrameIndex f = 0; f < 4; ++f) onu.advance_frame(f);
  EXPECT_EQ(onu.occupancy(AllocId{1}), 800u);
  EXPECT_EQ(onu.dropped_bytes(AllocId{1}), 800u);
  EXPECT_EQ(onu.offered_bytes(AllocId{1}), 1600u);
}

TEST(OnuState, OnOffDutyCycle) {
  OnuState onu(OnuId{1}, {{AllocId{1}, OnOffProfile{rate_for(10), 0.25, 8, 0}}}, FrameClock{}, 3);
  for (FrameIndex f = 0; f < 80; ++f) onu.advance_frame(f);
  EXPECT_EQ(onu.enqueued_bytes(), 10u * 20u);
}

// Random profiles and random grants: occupancy always equals enqueued minus
// dequeued and only granted bytes leave the queues.
TEST(OnuState, ConservesBytesUnderRandomGrants) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<QueueConfig> queues{
        {AllocId{1}, CbrProfile{rng() % 400'000'000, static_cast<std::uint32_t>(rng() % 1500)}},
        {AllocId{2}, PoissonProfile{rng() % 400'000'000, 1 + static_cast<std::uint32_t>(rng() % 1500)}},
        {AllocId{3}, OnOffProfile{rng() % 400'000'000, 0.3, 10, 0}, 20'000},
    };
    OnuState onu(OnuId{7}, queues, FrameClock{}, rng());
    for (FrameIndex f = 0; f < 300; ++f) {
      onu.advance_frame(f);
      PhysicalBandwidthMap m{f, {}};
      Words cursor = 0;
      for (std::uint32_t a = 1; a <= 3; ++a) {
        Words w = static_cast<Words>(rng() % 2000);
        if (w == 0) continue;
        m.grants.push_back({AllocId{a}, OnuId{7}, cursor, w, true});
        cursor += w;
      }
      const auto before = onu.dequeued_bytes();
      auto app = onu.apply_grants(m);
      std::uint64_t sent = 0;
      for (std::size_t i = 0; i < app.uses.size(); ++i) {
        ASSERT_LE(app.uses[i].sent_bytes, std::uint64_t{app.uses[i].granted_words} * kBytesPerWord);
        sent += app.uses[i].sent_bytes;
      }
      ASSERT_EQ(onu.dequeued_bytes() - before, sent);
      ASSERT_TRUE(onu.conserves_bytes());
    }
  }
}

TEST(OnuState, SameSeedSameArrivals) {
  auto make = [](std::uint64_t seed) {
    return OnuState(OnuId{3},
                    {{AllocId{1}, PoissonProfile{200'000'000, 700}},
                     {AllocId{2}, OnOffProfile{100'000'000, 0.5, 6, 64}}},
                    FrameClock{}, seed);
  };
  auto a = make(99), b = make(99), c = make(100);
  bool differs = false;
  for (FrameIndex f = 0; f < 200; ++f) {
    auto ra = a.advance_frame(f);
    ASSERT_EQ(ra, b.advance_frame(f));
    differs |= ra != c.advance_frame(f);
  }
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace ponvdba
