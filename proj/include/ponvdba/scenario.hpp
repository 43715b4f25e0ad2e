// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ponvdba/merging_engine.hpp"
#include "ponvdba/onu_emulator.hpp"
#include "ponvdba/pon_frame.hpp"
#include "ponvdba/slice.hpp"
#include "ponvdba/vdba_engine.hpp"

namespace ponvdba {

inline constexpr int kScenarioSchemaVersion = 1;

enum class TimingMode : std::uint8_t { kSimulated, kWallClock };
enum class ExecutionMode : std::uint8_t { kSequential, kConcurrent };

std::string_view to_string(TimingMode m);
std::string_view to_string(ExecutionMode m);

struct OnuConfig {
  OnuId onu_id;
  std::vector<QueueConfig> queues;
};

struct Scenario {
  std::string name;
  FrameClock clock;
  MergePolicy merge_policy;
  FrameIndex staleness_frames = kDefaultStalenessFrames;
  // vDBA maps finishing later than this after frame start are dropped in
  // wall-clock mode; 0 means one frame duration.
  std::uint64_t deadline_ns = 0;
  std::vector<SliceDescriptor> slices;
  std::vector<OnuConfig> onus;
  FrameIndex frames = 0;
  std::uint64_t seed = 0;
  TimingMode timing_mode = TimingMode::kSimulated;
  ExecutionMode execution = ExecutionMode::kSequential;
  std::filesystem::path output_dir;
  bool export_dbru_trace = false;
  double histogram_bin_us = 0.5;

  Words guard_words() const { return merge_policy.guard_words; }
};

// Every problem with the scenario, each prefixed by its field path. Empty
// when the scenario is runnable.
std::vector<std::string> validate_scenario(const Scenario& scenario,
                                           const AlgorithmRegistry& algorithms);

// Parses YAML text. Throws ParseError for malformed YAML and ValidationError
// (carrying every problem found) for well-formed but invalid content.
Scenario parse_scenario(std::string_view yaml_text, const AlgorithmRegistry& algorithms);

Scenario load_scenario(const std::filesystem::path& path, const AlgorithmRegistry& algorithms);

}  // namespace ponvdba
