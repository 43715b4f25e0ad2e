// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "builders.hpp"
#include "oracles.hpp"
#include "ponvdba/errors.hpp"
#include "ponvdba/vdba_engine.hpp"
#include "ponvdba/water_fill.hpp"

namespace ponvdba {
namespace {

using testing::assured;
using testing::best_effort;
using testing::fixed;
using testing::make_slice;

std::vector<DemandEntry> demand_words(const SliceDescriptor& slice, std::vector<std::uint64_t> words) {
  std::vector<AllocId> ids;
  for (const auto& a : slice.allocs) ids.push_back(a.alloc_id);
  std::sort(ids.begin(), ids.end());
  std::vector<DemandEntry> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], words[i] * kBytesPerWord, false});
  return out;
}

std::map<AllocId, std::uint64_t> words_by_alloc(const VirtualBandwidthMap& m, bool in_share_only) {
  std::map<AllocId, std::uint64_t> out;
  for (const auto& r : m.requests) {
    if (in_share_only && !r.dbru_requested && r.priority_class != TrafficClassKind::kFixed) continue;
    out[r.alloc_id] += r.grant_words;
  }
  return out;
}

std::uint64_t in_share_total(const VirtualBandwidthMap& m) {
  std::uint64_t t = 0;
  for (auto [_, w] : words_by_alloc(m, true)) t += w;
  return t;
}

TEST(WaterFill, FitsBudgetUntouched) {
  std::vector<WaterFillClaim> c{{3, 1}, {0, 2}, {7, 5}};
  EXPECT_EQ(weighted_water_fill(c, 10, 0), (std::vector<std::uint64_t>{3, 0, 7}));
}

TEST(WaterFill, EqualSplitAndRemainderRotation) {
  std::vector<WaterFillClaim> c{{800, 1}, {800, 1}};
  EXPECT_EQ(weighted_water_fill(c, 1000, 0), (std::vector<std::uint64_t>{500, 500}));
  EXPECT_EQ(weighted_water_fill(c, 1001, 0), (std::vector<std::uint64_t>{501, 500}));
  EXPECT_EQ(weighted_water_fill(c, 1001, 1), (std::vector<std::uint64_t>{500, 501}));
}

TEST(WaterFill, RejectsZeroWeight) {
  std::vector<WaterFillClaim> c{{5, 0}};
  EXPECT_THROW(weighted_water_fill(c, 1, 0), std::invalid_argument);
}

TEST(WaterFill, MatchesRationalOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20'000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    std::vector<WaterFillClaim> claims;
    std::vector<std::uint64_t> d, w;
    for (int i = 0; i < n; ++i) {
      d.push_back(std::uniform_int_distribution<std::uint64_t>(0, trial % 2 ? 50 : 40'000)(rng));
      w.push_back(std::uniform_int_distribution<std::uint64_t>(1, 9)(rng));
      claims.push_back({d.back(), w.back()});
    }
    const std::uint64_t budget = std::uniform_int_distribution<std::uint64_t>(0, trial % 2 ? 200 : 80'000)(rng);
    const std::uint64_t rot = rng() % 100;
    ASSERT_EQ(weighted_water_fill(claims, budget, rot), oracle::water_fill(d, w, budget, rot))
        << "trial " << trial;
  }
}

TEST(FixedLowLatency, GrantsFixedWordsWithoutReports) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto slice = make_slice(1, 500, {fixed(4, 1, 100)}, false, 0, kFixedLowLatency);
  auto m = run_dba_cycle(registry, slice, demand_words(slice, {0}), 9);
  ASSERT_EQ(m.requests.size(), 1u);
  EXPECT_EQ(m.requests[0].alloc_id, AllocId{4});
  EXPECT_EQ(m.requests[0].grant_words, 100u);
  EXPECT_EQ(m.frame_index, 9u);
  EXPECT_EQ(m.slice_id, SliceId{1});
}

TEST(StatusReporting, NoDemandNoGrant) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto slice = make_slice(1, 500, {best_effort(1, 1), assured(2, 2)});
  EXPECT_TRUE(run_dba_cycle(registry, slice, demand_words(slice, {0, 0}), 0).requests.empty());
}

TEST(StatusReporting, EqualWeightsSplitShare) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto slice = make_slice(1, 1000, {best_effort(1, 1), best_effort(2, 2)});
  auto m = run_dba_cycle(registry, slice, demand_words(slice, {800, 800}), 0);
  auto got = words_by_alloc(m, false);
  EXPECT_EQ(got[AllocId{1}], 500u);
  EXPECT_EQ(got[AllocId{2}], 500u);
}

TEST(StatusReporting, ServesFixedThenAssuredThenBestEffort) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto slice = make_slice(1, 1000, {fixed(1, 1, 200), assured(2, 1), best_effort(3, 2)});
  auto got = words_by_alloc(run_dba_cycle(registry, slice, demand_words(slice, {0, 600, 900}), 0), false);
  EXPECT_EQ(got[AllocId{1}], 200u);
  EXPECT_EQ(got[AllocId{2}], 600u);
  EXPECT_EQ(got[AllocId{3}], 200u);
}

TEST(StatusReporting, SurplusEligibleAppendsUnmetDemand) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto slice = make_slice(1, 100, {best_effort(1, 1), best_effort(2, 2)}, true);
  auto m = run_dba_cycle(registry, slice, demand_words(slice, {80, 30}), 0);
  ASSERT_EQ(m.requests.size(), 3u);
  EXPECT_EQ(m.requests[0], (VirtualRequest{AllocId{1}, 70, true, TrafficClassKind::kBestEffort}));
  EXPECT_EQ(m.requests[1], (VirtualRequest{AllocId{2}, 30, true, TrafficClassKind::kBestEffort}));
  EXPECT_EQ(m.requests[2], (VirtualRequest{AllocId{1}, 10, false, TrafficClassKind::kBestEffort}));
}

TEST(AlgorithmRegistry, DuplicateAndUnknown) {
  auto registry = AlgorithmRegistry::with_builtins();
  EXPECT_THROW(registry.register_algorithm(std::string(kStatusReporting), [] {
    return std::make_unique<StatusReporting>();
  }), DuplicateAlgorithmId);
  EXPECT_THROW(registry.create("nope"), UnknownAlgorithm);
  auto slice = make_slice(1, 10, {}, false, 0, "nope");
  EXPECT_THROW(run_dba_cycle(registry, slice, {}, 0), UnknownAlgorithm);
}

class CountingAlgorithm final : public DbaAlgorithm {
 public:
  explicit CountingAlgorithm(int* calls) : calls_(calls) {}
  VirtualBandwidthMap schedule(const SliceDescriptor& slice, std::span<const DemandEntry>,
                               FrameIndex frame) override {
    ++*calls_;
    return {frame, slice.slice_id, {}};
  }

 private:
  int* calls_;
};

TEST(AlgorithmRegistry, CustomAlgorithmRunsOncePerFramePerSlice) {
  int calls = 0;
  auto registry = AlgorithmRegistry::with_builtins();
  registry.register_algorithm("counting", [&] { return std::make_unique<CountingAlgorithm>(&calls); });
  EXPECT_EQ(registry.ids().size(), 3u);
  auto a = make_slice(1, 10, {best_effort(1, 1)}, false, 0, "counting");
  auto b = make_slice(2, 10, {best_effort(2, 1)}, false, 0, "counting");
  VdbaInstance ia(a, registry.create(a.algorithm));
  VdbaInstance ib(b, registry.create(b.algorithm));
  for (FrameIndex f = 0; f < 5; ++f) {
    ia.run_cycle(demand_words(a, {1}), f);
    ib.run_cycle(demand_words(b, {1}), f);
  }
  EXPECT_EQ(calls, 10);
  EXPECT_EQ(ia.cycles(), 5u);
}

TEST(AlgorithmRegistry, BuiltinsCoexist) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto a = make_slice(1, 100, {fixed(1, 1, 40)}, false, 0, kFixedLowLatency);
  auto b = make_slice(2, 100, {best_effort(2, 2)}, false, 1, kStatusReporting);
  EXPECT_EQ(run_dba_cycle(registry, a, demand_words(a, {0}), 0).total_words(), 40u);
  EXPECT_EQ(run_dba_cycle(registry, b, demand_words(b, {70}), 0).total_words(), 70u);
}

TEST(VdbaInstance, RejectsDemandForAnotherSlice) {
  auto registry = AlgorithmRegistry::with_builtins();
  auto slice = make_slice(1, 100, {best_effort(1, 1), best_effort(2, 1)});
  VdbaInstance inst(slice, registry.create(slice.algorithm));
  std::vector<DemandEntry> wrong{{AllocId{1}, 0, true}, {AllocId{3}, 0, true}};
  EXPECT_THROW(inst.run_cycle(wrong, 0), DemandMismatch);
  std::vector<DemandEntry> short_list{{AllocId{1}, 0, true}};
  EXPECT_THROW(inst.run_cycle(short_list, 0), DemandMismatch);
}

// Random slice with every traffic class, shares respected by construction.
struct RandomSlice {
  SliceDescriptor slice;
  std::vector<std::uint64_t> demand;  // words, ascending AllocID order
};

RandomSlice random_slice(std::mt19937_64& rng, bool surplus) {
  const int n = std::uniform_int_distribution<int>(1, 10)(rng);
  const Words share = std::uniform_int_distribution<Words>(0, 5'000)(rng);
  RandomSlice r{make_slice(1, share, {}, surplus), {}};
  Words fixed_left = share / 3;
  for (int i = 0; i < n; ++i) {
    const auto alloc = static_cast<std::uint32_t>(i + 1);
    const auto onu = std::uniform_int_distribution<std::uint32_t>(1, 4)(rng);
    switch (rng() % 3) {
      case 0: {
        const Words f = std::uniform_int_distribution<Words>(0, fixed_left)(rng);
        fixed_left -= f;
        r.slice.allocs.push_back(fixed(alloc, onu, f));
        break;
      }
      case 1:
        r.slice.allocs.push_back(assured(alloc, onu, std::uniform_int_distribution<std::uint32_t>(1, 5)(rng)));
        break;
      default:
        r.slice.allocs.push_back(best_effort(alloc, onu, std::uniform_int_distribution<std::uint32_t>(1, 5)(rng)));
    }
    r.demand.push_back(std::uniform_int_distribution<std::uint64_t>(0, 3'000)(rng));
  }
  return r;
}

TEST(StatusReporting, CapPropertyOverManyFrames) {
  std::mt19937_64 rng(21);
  StatusReporting algo;
  for (FrameIndex f = 0; f < 10'000; ++f) {
    auto r = random_slice(rng, false);
    auto m = algo.schedule(r.slice, demand_words(r.slice, r.demand), f);
    ASSERT_LE(m.total_words(), r.slice.share_words) << "frame " << f;
  }
}

TEST(StatusReporting, WorkConserving) {
  std::mt19937_64 rng(22);
  StatusReporting algo;
  int saturated = 0;
  for (FrameIndex f = 0; f < 5'000; ++f) {
    auto r = random_slice(rng, rng() % 2);
    std::uint64_t effective = 0;
    for (std::size_t i = 0; i < r.slice.allocs.size(); ++i) {
      const auto& tc = r.slice.allocs[i].traffic_class;
      effective += tc.kind == TrafficClassKind::kFixed ? tc.fixed_words : r.demand[i];
    }
    auto m = algo.schedule(r.slice, demand_words(r.slice, r.demand), f);
    if (effective >= r.slice.share_words) {
      ++saturated;
      ASSERT_EQ(in_share_total(m), r.slice.share_words) << "frame " << f;
    } else {
      ASSERT_EQ(in_share_total(m), effective) << "frame " << f;
    }
  }
  EXPECT_GT(saturated, 500);
}

TEST(StatusReporting, OwnGrantMonotoneInOwnDemand) {
  std::mt19937_64 rng(23);
  StatusReporting algo;
  for (int trial = 0; trial < 5'000; ++trial) {
    auto r = random_slice(rng, false);
    const std::size_t i = rng() % r.slice.allocs.size();
    const FrameIndex f = rng() % 64;
    const AllocId id = r.slice.allocs[i].alloc_id;
    auto before = words_by_alloc(algo.schedule(r.slice, demand_words(r.slice, r.demand), f), false)[id];
    r.demand[i] += std::uniform_int_distribution<std::uint64_t>(1, 2'000)(rng);
    auto after = words_by_alloc(algo.schedule(r.slice, demand_words(r.slice, r.demand), f), false)[id];
    ASSERT_GE(after, before) << "trial " << trial;
  }
}

TEST(DbaAlgorithms, Deterministic) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 2'000; ++trial) {
    auto r = random_slice(rng, rng() % 2);
    const FrameIndex f = rng();
    auto d = demand_words(r.slice, r.demand);
    StatusReporting a, b;
    EXPECT_EQ(a.schedule(r.slice, d, f), b.schedule(r.slice, d, f));
    FixedLowLatency c, e;
    EXPECT_EQ(c.schedule(r.slice, d, f), e.schedule(r.slice, d, f));
  }
}

TEST(FixedLowLatency, IgnoresDemand) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 1'000; ++trial) {
    auto r = random_slice(rng, false);
    FixedLowLatency algo;
    auto reference = algo.schedule(r.slice, demand_words(r.slice, r.demand), 7);
    for (auto& d : r.demand) d = rng() % 100'000;
    EXPECT_EQ(algo.schedule(r.slice, demand_words(r.slice, r.demand), 7), reference);
  }
}

TEST(FixedClassFallback, OnlyFixedAllocs) {
  auto slice = make_slice(1, 100, {fixed(1, 1, 30), best_effort(2, 1), fixed(3, 2, 5)});
  auto m = fixed_class_fallback(slice, 4);
  EXPECT_EQ(m.total_words(), 35u);
  EXPECT_EQ(m.frame_index, 4u);
}

}  // namespace
}  // namespace ponvdba
