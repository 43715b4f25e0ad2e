// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

// vdba-sim: scenario-driven runner for the multi-tenant upstream scheduler.
//
//   vdba-sim run <scenario> [--frames N] [--seed S] [--timing simulated|wall_clock]
//                           [--out DIR] [--concurrent]
//   vdba-sim validate <scenario>
//   vdba-sim replay <dbru_trace> <scenario> [--frames N] [--out DIR]
//
// Exit codes: 0 clean, 1 validation failure, 2 runtime invariant violation.
// PONVDBA_OUT_DIR overrides the scenario's output_dir; --out overrides both.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "ponvdba/errors.hpp"
#include "ponvdba/pipeline.hpp"
#include "ponvdba/scenario.hpp"

namespace {

using namespace ponvdba;

struct Overrides {
  std::optional<FrameIndex> frames;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> timing;
  std::optional<std::string> out;
  bool concurrent = false;
};

void apply(Scenario& sc, const Overrides& o) {
  if (const char* env = std::getenv("PONVDBA_OUT_DIR"); env != nullptr && *env != '\0') {
    sc.output_dir = env;
  }
  if (o.out) sc.output_dir = *o.out;
  if (o.frames) sc.frames = *o.frames;
  if (o.seed) sc.seed = *o.seed;
  if (o.timing) {
    sc.timing_mode = *o.timing == "wall_clock" ? TimingMode::kWallClock : TimingMode::kSimulated;
  }
  if (o.concurrent) sc.execution = ExecutionMode::kConcurrent;
}

int print_report(const Scenario& sc, const RunReport& r) {
  if (r.exit_status != kExitClean) {
    std::cerr << "error: " << r.error << '\n';
    return r.exit_status;
  }
  std::cout << "scenario      " << (sc.name.empty() ? "(unnamed)" : sc.name) << '\n'
            << "timing        " << to_string(sc.timing_mode) << ", "
            << to_string(sc.execution) << '\n'
            << "frames        " << r.frames_run << " (all maps validated: "
            << r.maps_validated << ")\n"
            << "late maps     " << r.maps_late << '\n';
  if (r.interval_summary) {
    const auto& s = *r.interval_summary;
    std::cout << std::fixed << std::setprecision(4) << "bmap interval mean " << s.mean_us
              << " us, variance " << s.variance_us2 << " us^2, min " << s.min_us << ", max "
              << s.max_us << ", p99 " << s.p99_us << '\n';
  }
  if (sc.timing_mode == TimingMode::kWallClock) {
    std::cout << std::fixed << std::setprecision(3) << "mean generation cycle "
              << r.mean_generation_cycle_us << " us, mean merge " << r.mean_merge_us << " us\n";
  }
  for (const auto& s : r.stats.slices) {
    const double frames = s.granted_words.empty() ? 1.0 : static_cast<double>(s.granted_words.size());
    std::cout << "slice " << s.slice_id << ": " << std::setprecision(1)
              << static_cast<double>(s.granted_total()) / frames << " words/frame granted, "
              << s.transmitted_total() << " bytes sent, " << s.dropped_bytes << " dropped\n";
  }
  for (const auto& [name, sum] : r.checksums) {
    std::cout << "sha256 " << sum << "  " << name << '\n';
  }
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-tenant XGS-PON upstream scheduler with virtual DBA instances"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_path;
  Overrides ov;
  std::string timing;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("scenario", scenario_path, "Scenario YAML file")->required();
  run_cmd->add_option("--frames", ov.frames, "Override the number of frames");
  run_cmd->add_option("--seed", ov.seed, "Override the RNG seed");
  run_cmd->add_option("--timing", ov.timing, "simulated or wall_clock")
      ->check(CLI::IsMember({"simulated", "wall_clock"}));
  run_cmd->add_option("--out", ov.out, "Output directory");
  run_cmd->add_flag("--concurrent", ov.concurrent, "Run vDBA instances and ONUs in parallel");

  auto* validate_cmd = app.add_subcommand("validate", "Validate a scenario file");
  validate_cmd->add_option("scenario", scenario_path, "Scenario YAML file")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Drive the scheduler from a DBRU trace");
  replay_cmd->add_option("dbru_trace", trace_path, "DBRU trace CSV")->required();
  replay_cmd->add_option("scenario", scenario_path, "Scenario YAML file")->required();
  replay_cmd->add_option("--frames", ov.frames, "Override the number of frames");
  replay_cmd->add_option("--out", ov.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const auto algorithms = AlgorithmRegistry::with_builtins();
  Scenario sc;
  try {
    sc = load_scenario(scenario_path, algorithms);
  } catch (const ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  if (*validate_cmd) {
    std::cout << scenario_path << ": ok (" << sc.slices.size() << " slices, " << sc.onus.size()
              << " ONUs, " << sc.frames << " frames)\n";
    return kExitClean;
  }

  apply(sc, ov);
  if (*run_cmd) return print_report(sc, run(sc, algorithms));

  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "error: cannot open DBRU trace " << trace_path << '\n';
    return kExitValidation;
  }
  std::vector<DbruReport> trace;
  try {
    trace = read_dbru_trace(in);
  } catch (const ParseError& e) {
    std::cerr << "error: " << trace_path << ": " << e.what() << '\n';
    return kExitValidation;
  }
  return print_report(sc, replay(sc, algorithms, std::move(trace)));
}
