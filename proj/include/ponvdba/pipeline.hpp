// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ponvdba/dbru_ingest.hpp"
#include "ponvdba/merging_engine.hpp"
#include "ponvdba/metrics.hpp"
#include "ponvdba/onu_emulator.hpp"
#include "ponvdba/scenario.hpp"
#include "ponvdba/vdba_engine.hpp"

namespace ponvdba {

// Everything one frame produced, for callers that step the loop themselves.
struct FrameOutcome {
  FrameIndex frame = 0;
  std::vector<DbruReport> emitted;  // reports leaving the ONUs this frame
  std::vector<VirtualBandwidthMap> virtual_maps;
  PhysicalBandwidthMap physical;
  std::vector<TransmissionRecord> records;
  std::size_t maps_late = 0;
  std::uint64_t merge_duration_ns = 0;       // wall-clock mode only
  std::uint64_t generation_cycle_ns = 0;     // wall-clock mode only
  std::uint64_t emitted_at_ns = 0;           // simulated or wall-clock timestamp
};

// The per-frame loop:
//   arrivals -> DBRU emission -> ingest -> snapshot -> vDBA cycles -> merge
//   -> validate -> grant application -> metrics.
// Reports emitted in frame N are ingested in frame N+1, so they shape the
// map of frame N+1. Every invariant is checked each frame; a failure throws
// RuntimeInvariantViolation.
class FramePipeline {
 public:
  // Emulated ONUs drive the loop.
  FramePipeline(const Scenario& scenario, const AlgorithmRegistry& algorithms);
  // Recorded DBRUs replace the emulator; no grants are applied.
  FramePipeline(const Scenario& scenario, const AlgorithmRegistry& algorithms,
                std::vector<DbruReport> replay_trace);
  ~FramePipeline();

  FramePipeline(const FramePipeline&) = delete;
  FramePipeline& operator=(const FramePipeline&) = delete;

  FrameOutcome step();

  FrameIndex next_frame() const;
  const SliceRegistry& registry() const;
  const FrameClock& clock() const;
  std::span<const OnuState> onus() const;
  // Offered and dropped bytes filled in from the ONUs at call time.
  RunStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr int kExitClean = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInvariant = 2;

struct RunReport {
  int exit_status = kExitClean;
  std::string error;
  FrameIndex frames_run = 0;
  // Output name -> path on disk (empty when the scenario has no output_dir).
  std::map<std::string, std::filesystem::path> outputs;
  // Output name -> SHA-256 hex of its content.
  std::map<std::string, std::string> checksums;
  RunStats stats;
  IntervalSeries intervals;
  std::optional<IntervalStats> interval_summary;
  std::uint64_t maps_validated = 0;
  std::uint64_t maps_late = 0;
  std::uint64_t transmitted_bytes = 0;
  double mean_generation_cycle_us = 0;  // wall-clock mode only
  double mean_merge_us = 0;             // wall-clock mode only
};

inline constexpr const char* kBmapTraceFile = "bmap_trace.csv";
inline constexpr const char* kDbruTraceFile = "dbru_trace.csv";
inline constexpr const char* kMergeEventsFile = "merge_events.csv";
inline constexpr const char* kIntervalsFile = "intervals.csv";
inline constexpr const char* kHistogramFile = "interval_histogram.csv";
inline constexpr const char* kSummaryFile = "summary.csv";

// Runs scenario.frames frames and writes the outputs. Files appear only
// when the run finishes cleanly (written to a temporary name, then renamed).
// Invariant violations are reported through exit_status, not thrown.
RunReport run(const Scenario& scenario, const AlgorithmRegistry& algorithms);

// Same, with a recorded DBRU trace replacing the ONU emulator.
RunReport replay(const Scenario& scenario, const AlgorithmRegistry& algorithms,
                 std::vector<DbruReport> trace);

// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(std::string_view data);

}  // namespace ponvdba
