// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ponvdba/errors.hpp"
#include "ponvdba/pipeline.hpp"
#include "scenario_builders.hpp"

namespace ponvdba {
namespace {

const std::filesystem::path kScenarios = PONVDBA_SCENARIO_DIR;

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ponvdba_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Run, ZeroFramesGivesHeaderOnlyTraces) {
  auto sc = load_scenario(kScenarios / "minimal.yaml", AlgorithmRegistry::with_builtins());
  sc.frames = 0;
  sc.output_dir = scratch("zero");
  auto report = run(sc, AlgorithmRegistry::with_builtins());
  ASSERT_EQ(report.exit_status, kExitClean) << report.error;
  EXPECT_EQ(report.frames_run, 0u);
  EXPECT_FALSE(report.interval_summary);
  EXPECT_EQ(slurp(report.outputs.at(kBmapTraceFile)), std::string(kBmapTraceHeader) + "\n");
  EXPECT_EQ(report.checksums.at(kBmapTraceFile), sha256_hex(std::string(kBmapTraceHeader) + "\n"));
}

TEST(Run, WritesFilesAtomically) {
  auto sc = load_scenario(kScenarios / "minimal.yaml", AlgorithmRegistry::with_builtins());
  sc.output_dir = scratch("atomic");
  auto report = run(sc, AlgorithmRegistry::with_builtins());
  ASSERT_EQ(report.exit_status, kExitClean) << report.error;
  for (const auto& [name, path] : report.outputs) {
    EXPECT_TRUE(std::filesystem::exists(path)) << name;
    EXPECT_EQ(sha256_hex(slurp(path)), report.checksums.at(name)) << name;
  }
  for (const auto& entry : std::filesystem::directory_iterator(sc.output_dir)) {
    EXPECT_NE(entry.path().extension(), ".tmp");
  }
  EXPECT_EQ(report.outputs.size(), 5u);
}

TEST(Run, InvalidScenarioExitsWithValidationStatus) {
  Scenario sc;
  sc.frames = 1;
  auto report = run(sc, AlgorithmRegistry::with_builtins());
  EXPECT_EQ(report.exit_status, kExitValidation);
  EXPECT_TRUE(report.checksums.empty());
}

TEST(Run, SameSeedSameChecksums) {
  auto sc = testing::random_scenario(3, 300);
  auto a = run(sc, AlgorithmRegistry::with_builtins());
  auto b = run(sc, AlgorithmRegistry::with_builtins());
  ASSERT_EQ(a.exit_status, kExitClean) << a.error;
  EXPECT_EQ(a.checksums, b.checksums);
  sc.seed += 1;
  EXPECT_NE(run(sc, AlgorithmRegistry::with_builtins()).checksums.at(kBmapTraceFile),
            a.checksums.at(kBmapTraceFile));
}

TEST(Run, ConcurrentMatchesSequential) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    auto sc = testing::random_scenario(seed, 200);
    auto seq = run(sc, AlgorithmRegistry::with_builtins());
    sc.execution = ExecutionMode::kConcurrent;
    auto par = run(sc, AlgorithmRegistry::with_builtins());
    ASSERT_EQ(seq.exit_status, kExitClean) << seq.error;
    EXPECT_EQ(seq.checksums, par.checksums) << "seed " << seed;
  }
}

TEST(Run, SimulatedIntervalsAreExact) {
  auto sc = load_scenario(kScenarios / "minimal.yaml", AlgorithmRegistry::with_builtins());
  auto report = run(sc, AlgorithmRegistry::with_builtins());
  ASSERT_TRUE(report.interval_summary);
  EXPECT_EQ(report.interval_summary->variance_us2, 0.0);
  EXPECT_EQ(report.interval_summary->mean_us, 125.0);
  EXPECT_EQ(report.intervals.size(), 99u);
}

// A report emitted in frame N drives the map of frame N + 1, never frame N.
TEST(FramePipeline, ReportsActOneFrameLater) {
  auto sc = load_scenario(kScenarios / "minimal.yaml", AlgorithmRegistry::with_builtins());
  FramePipeline p(sc, AlgorithmRegistry::with_builtins());
  auto f0 = p.step();
  ASSERT_EQ(f0.emitted.size(), 1u);
  EXPECT_EQ(f0.emitted[0].occupancy_bytes, 125u);
  EXPECT_TRUE(f0.physical.grants.empty());
  auto f1 = p.step();
  ASSERT_EQ(f1.physical.grants.size(), 1u);
  EXPECT_EQ(f1.physical.grants[0].grant_words, bytes_to_words(125));
  // The 125 bytes of frame 0 leave in frame 1 with one frame of latency.
  ASSERT_EQ(f1.records.size(), 1u);
  EXPECT_EQ(f1.records[0].latency_frames(), 1u);
}

TEST(Replay, RecordedReportsReproduceTheMaps) {
  auto sc = testing::random_scenario(9, 250);
  sc.export_dbru_trace = true;
  sc.output_dir = scratch("replay_src");
  auto live = run(sc, AlgorithmRegistry::with_builtins());
  ASSERT_EQ(live.exit_status, kExitClean) << live.error;
  std::ifstream in(live.outputs.at(kDbruTraceFile));
  auto trace = read_dbru_trace(in);
  sc.output_dir.clear();
  sc.export_dbru_trace = false;
  auto replayed = replay(sc, AlgorithmRegistry::with_builtins(), trace);
  ASSERT_EQ(replayed.exit_status, kExitClean) << replayed.error;
  EXPECT_EQ(replayed.checksums.at(kBmapTraceFile), live.checksums.at(kBmapTraceFile));
}

TEST(Replay, ForeignAllocIdIsValidationFailure) {
  auto sc = load_scenario(kScenarios / "minimal.yaml", AlgorithmRegistry::with_builtins());
  auto report = replay(sc, AlgorithmRegistry::with_builtins(), {{0, OnuId{1}, AllocId{77}, 10}});
  EXPECT_EQ(report.exit_status, kExitValidation);
}

TEST(Run, RejectedMapAbortsWithStatusTwo) {
  // Asks for twice the share on every AllocID, every frame.
  struct Greedy final : DbaAlgorithm {
    VirtualBandwidthMap schedule(const SliceDescriptor& s, std::span<const DemandEntry>,
                                 FrameIndex f) override {
      VirtualBandwidthMap m{f, s.slice_id, {}};
      for (const auto& a : s.allocs) m.requests.push_back({a.alloc_id, 2 * s.share_words, true});
      return m;
    }
  };
  auto algorithms = AlgorithmRegistry::with_builtins();
  algorithms.register_algorithm("greedy", [] { return std::make_unique<Greedy>(); });
  auto sc = load_scenario(kScenarios / "minimal.yaml", algorithms);
  sc.slices[0].algorithm = "greedy";
  sc.output_dir = scratch("rejected");

  // Clipped under the default policy.
  auto clipped = run(sc, algorithms);
  ASSERT_EQ(clipped.exit_status, kExitClean) << clipped.error;
  EXPECT_EQ(clipped.stats.slices[0].granted_words.back(), sc.slices[0].share_words);

  std::filesystem::remove_all(sc.output_dir);
  sc.merge_policy.overrun_handling = OverrunHandling::kRejectMap;
  auto rejected = run(sc, algorithms);
  EXPECT_EQ(rejected.exit_status, kExitInvariant);
  EXPECT_NE(rejected.error.find("frame 0"), std::string::npos) << rejected.error;
  EXPECT_TRUE(rejected.outputs.empty());
  EXPECT_TRUE(std::filesystem::is_empty(sc.output_dir));
}

TEST(Run, SharesBeyondCapacityAreValidationFailures) {
  auto sc = testing::saturation_scenario(2, 5);
  sc.merge_policy.guard_words = 2'000;
  EXPECT_EQ(run(sc, AlgorithmRegistry::with_builtins()).exit_status, kExitValidation);
}

TEST(Run, TwoVnoShortRunIsClean) {
  auto sc = load_scenario(kScenarios / "two_vno_32_onu.yaml", AlgorithmRegistry::with_builtins());
  sc.frames = 2'000;
  auto report = run(sc, AlgorithmRegistry::with_builtins());
  ASSERT_EQ(report.exit_status, kExitClean) << report.error;
  EXPECT_EQ(report.maps_validated, 2'000u);
  const auto* vno_a = report.stats.find(SliceId{1});
  ASSERT_NE(vno_a, nullptr);
  for (std::size_t f = 0; f < vno_a->granted_words.size(); ++f) {
    ASSERT_EQ(vno_a->granted_words[f], 16u * 1200u);
  }
  EXPECT_GT(report.transmitted_bytes, 0u);
}

}  // namespace
}  // namespace ponvdba
