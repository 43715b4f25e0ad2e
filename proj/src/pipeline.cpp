// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/pipeline.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <chrono>
#include <sstream>
#include <unordered_map>

#include "ponvdba/errors.hpp"
#include "trace_sink.hpp"

namespace ponvdba {

namespace {

using SteadyClock = std::chrono::steady_clock;

std::uint64_t ns_between(SteadyClock::time_point a, SteadyClock::time_point b) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

// Runs body(i) for i in [0, n), in parallel when asked. Each index writes
// only its own slot, so results do not depend on the schedule.
template <typename Body>
void for_each_index(bool concurrent, std::size_t n, Body&& body) {
  if (concurrent && n > 1) {
    tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { body(i); });
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

std::string describe(const ValidationReport& report) {
  std::ostringstream msg;
  msg << "physical map failed validation:";
  std::size_t shown = 0;
  for (const auto& v : report.violations) {
    if (shown++ == 5) {
      msg << " ...";
      break;
    }
    msg << ' ' << v;
  }
  return msg.str();
}

}  // namespace

struct FramePipeline::Impl {
  Scenario scenario;
  SliceRegistry registry;
  MergingEngine merger;
  std::vector<VdbaInstance> instances;
  std::vector<DemandState> demand;
  std::unordered_map<AllocId, std::size_t> slice_of_alloc;
  std::vector<OnuState> onus;

  bool replaying = false;
  std::vector<DbruReport> trace;
  std::size_t trace_cursor = 0;

  std::vector<DbruReport> in_flight;
  FrameIndex frame = 0;
  std::vector<SliceStats> slice_stats;

  bool concurrent = false;
  bool wall_clock = false;
  std::uint64_t deadline_ns = 0;
  std::optional<SteadyClock::time_point> t0;

  Impl(const Scenario& sc, const AlgorithmRegistry& algorithms)
      : scenario(sc),
        registry(sc.slices),
        merger(registry, sc.clock, sc.merge_policy),
        concurrent(sc.execution == ExecutionMode::kConcurrent),
        wall_clock(sc.timing_mode == TimingMode::kWallClock),
        deadline_ns(sc.deadline_ns == 0 ? sc.clock.frame_duration_ns() : sc.deadline_ns) {
    for (std::size_t i = 0; i < registry.slices().size(); ++i) {
      const auto& s = registry.slices()[i];
      instances.emplace_back(s, algorithms.create(s.algorithm));
      demand.push_back(DemandState::for_slice(s, sc.staleness_frames));
      for (const auto& a : s.allocs) slice_of_alloc.emplace(a.alloc_id, i);
      slice_stats.push_back(SliceStats{s.slice_id, {}, {}, {}, 0, 0});
    }
  }

  void build_onus() {
    for (const auto& o : scenario.onus) {
      onus.emplace_back(o.onu_id, o.queues, scenario.clock, scenario.seed);
    }
  }

  std::size_t slice_index(AllocId alloc, const char* where) const {
    const auto it = slice_of_alloc.find(alloc);
    if (it == slice_of_alloc.end()) {
      std::ostringstream msg;
      msg << where << ": alloc_id " << alloc << " is not registered to any slice";
      throw UnknownAllocId(msg.str());
    }
    return it->second;
  }

  std::vector<DbruReport> emit_reports(FrameIndex n) {
    std::vector<DbruReport> emitted;
    if (replaying) {
      while (trace_cursor < trace.size() && trace[trace_cursor].frame_index <= n) {
        if (trace[trace_cursor].frame_index == n) emitted.push_back(trace[trace_cursor]);
        ++trace_cursor;
      }
      return emitted;
    }
    std::vector<std::vector<DbruReport>> per_onu(onus.size());
    for_each_index(concurrent, onus.size(),
                   [&](std::size_t i) { per_onu[i] = onus[i].advance_frame(n); });
    for (auto& r : per_onu) emitted.insert(emitted.end(), r.begin(), r.end());
    return emitted;
  }

  FrameOutcome step() {
    const FrameIndex n = frame;
    FrameOutcome out;
    out.frame = n;

    SteadyClock::time_point frame_start{};
    if (wall_clock) {
      if (!t0) t0 = SteadyClock::now();
      frame_start = *t0 + std::chrono::nanoseconds(scenario.clock.frame_start_ns(n));
      while (SteadyClock::now() < frame_start) {
      }
    }

    out.emitted = emit_reports(n);

    // Reports from the previous frame become visible now.
    for (const auto& r : in_flight) demand[slice_index(r.alloc_id, "DBRU")].ingest(r);
    in_flight = out.emitted;

    const auto gen_start = SteadyClock::now();
    const std::size_t n_slices = instances.size();
    out.virtual_maps.resize(n_slices);
    std::vector<char> late(n_slices, 0);
    for_each_index(concurrent, n_slices, [&](std::size_t i) {
      const auto snapshot = demand_snapshot(demand[i], instances[i].slice(), n);
      out.virtual_maps[i] = instances[i].run_cycle(snapshot, n);
      if (wall_clock && ns_between(frame_start, SteadyClock::now()) > deadline_ns) late[i] = 1;
    });
    for (std::size_t i = 0; i < n_slices; ++i) {
      if (late[i] == 0) continue;
      out.virtual_maps[i] = fixed_class_fallback(instances[i].slice(), n);
      ++out.maps_late;
    }

    if (wall_clock) {
      auto probe = merge_latency_probe(merger, n, out.virtual_maps);
      out.physical = std::move(probe.map);
      out.merge_duration_ns = static_cast<std::uint64_t>(probe.duration.count());
    } else {
      out.physical = merger.merge(n, out.virtual_maps);
    }

    const auto report =
        validate_physical_map(out.physical, scenario.clock, scenario.guard_words());
    if (!report.ok()) throw RuntimeInvariantViolation(n, describe(report));

    if (wall_clock) {
      const auto emitted = SteadyClock::now();
      out.emitted_at_ns = ns_between(*t0, emitted);
      out.generation_cycle_ns = ns_between(gen_start, emitted);
    } else {
      out.emitted_at_ns = scenario.clock.frame_start_ns(n);
    }

    std::vector<GrantApplication> applied(onus.size());
    for_each_index(concurrent, onus.size(),
                   [&](std::size_t i) { applied[i] = onus[i].apply_grants(out.physical); });

    account(out, applied);
    ++frame;
    return out;
  }

  void account(FrameOutcome& out, std::vector<GrantApplication>& applied) {
    const FrameIndex n = out.frame;
    std::vector<std::uint64_t> granted(slice_stats.size(), 0);
    std::vector<std::uint64_t> sent(slice_stats.size(), 0);
    for (const auto& g : out.physical.grants) granted[slice_index(g.alloc_id, "grant")] += g.grant_words;

    std::uint64_t sent_total = 0;
    for (auto& app : applied) {
      for (const auto& u : app.uses) {
        sent[slice_index(u.alloc_id, "grant")] += u.sent_bytes;
        sent_total += u.sent_bytes;
      }
      for (const auto& rec : app.records) {
        slice_stats[slice_index(rec.alloc_id, "record")].latency_frames.push_back(
            rec.latency_frames());
      }
      out.records.insert(out.records.end(), app.records.begin(), app.records.end());
    }

    for (std::size_t i = 0; i < slice_stats.size(); ++i) {
      if (sent[i] > granted[i] * kBytesPerWord) {
        std::ostringstream msg;
        msg << "slice " << slice_stats[i].slice_id << " transmitted " << sent[i]
            << " bytes on " << granted[i] << " granted words";
        throw RuntimeInvariantViolation(n, msg.str());
      }
      slice_stats[i].granted_words.push_back(static_cast<Words>(granted[i]));
      slice_stats[i].transmitted_bytes.push_back(sent[i]);
    }

    const std::uint64_t ceiling =
        static_cast<std::uint64_t>(usable_capacity(scenario.clock, out.physical.burst_count(),
                                                   scenario.guard_words())) *
        kBytesPerWord;
    if (sent_total > ceiling) {
      throw RuntimeInvariantViolation(n, "transmitted bytes exceed the frame's usable capacity");
    }
    for (const auto& onu : onus) {
      if (!onu.conserves_bytes()) {
        std::ostringstream msg;
        msg << "onu " << onu.id() << " violates byte conservation";
        throw RuntimeInvariantViolation(n, msg.str());
      }
    }
  }

  RunStats stats() const {
    RunStats rs{slice_stats};
    for (std::size_t i = 0; i < rs.slices.size(); ++i) {
      for (const auto& a : registry.slices()[i].allocs) {
        for (const auto& onu : onus) {
          rs.slices[i].offered_bytes += onu.offered_bytes(a.alloc_id);
          rs.slices[i].dropped_bytes += onu.dropped_bytes(a.alloc_id);
        }
      }
    }
    return rs;
  }
};

FramePipeline::FramePipeline(const Scenario& scenario, const AlgorithmRegistry& algorithms)
    : impl_(std::make_unique<Impl>(scenario, algorithms)) {
  impl_->build_onus();
}

FramePipeline::FramePipeline(const Scenario& scenario, const AlgorithmRegistry& algorithms,
                             std::vector<DbruReport> replay_trace)
    : impl_(std::make_unique<Impl>(scenario, algorithms)) {
  impl_->replaying = true;
  impl_->trace = std::move(replay_trace);
  std::stable_sort(impl_->trace.begin(), impl_->trace.end(),
                   [](const DbruReport& a, const DbruReport& b) {
                     return a.frame_index < b.frame_index;
                   });
}

FramePipeline::~FramePipeline() = default;

FrameOutcome FramePipeline::step() { return impl_->step(); }
FrameIndex FramePipeline::next_frame() const { return impl_->frame; }
const SliceRegistry& FramePipeline::registry() const { return impl_->registry; }
const FrameClock& FramePipeline::clock() const { return impl_->scenario.clock; }
std::span<const OnuState> FramePipeline::onus() const { return impl_->onus; }
RunStats FramePipeline::stats() const { return impl_->stats(); }

namespace {

RunReport run_impl(const Scenario& scenario, const AlgorithmRegistry& algorithms,
                   std::optional<std::vector<DbruReport>> trace) {
  RunReport report;
  report.intervals = IntervalSeries(scenario.timing_mode == TimingMode::kWallClock
                                        ? TimingSource::kWallClock
                                        : TimingSource::kSimulatedTime);
  if (auto problems = validate_scenario(scenario, algorithms); !problems.empty()) {
    report.exit_status = kExitValidation;
    report.error = ValidationError(std::move(problems)).what();
    return report;
  }

  const bool to_disk = !scenario.output_dir.empty();
  if (to_disk) std::filesystem::create_directories(scenario.output_dir);
  auto path_of = [&](const char* name) {
    return to_disk ? scenario.output_dir / name : std::filesystem::path{};
  };

  std::map<std::string, std::unique_ptr<detail::TraceSink>> sinks;
  auto open = [&](const char* name) -> std::ostream& {
    auto& sink = sinks[name];
    sink = std::make_unique<detail::TraceSink>(path_of(name));
    return sink->stream();
  };

  std::ostream& bmap = open(kBmapTraceFile);
  std::ostream& events = open(kMergeEventsFile);
  std::ostream* dbru = scenario.export_dbru_trace ? &open(kDbruTraceFile) : nullptr;
  write_bmap_trace_header(bmap);
  write_merge_event_header(events);
  if (dbru != nullptr) write_dbru_trace_header(*dbru);

  std::vector<std::uint64_t> emitted_at;
  emitted_at.reserve(scenario.frames);
  std::uint64_t gen_ns = 0;
  std::uint64_t merge_ns = 0;

  try {
    auto pipeline = trace ? std::make_unique<FramePipeline>(scenario, algorithms, std::move(*trace))
                          : std::make_unique<FramePipeline>(scenario, algorithms);
    for (FrameIndex f = 0; f < scenario.frames; ++f) {
      const auto out = pipeline->step();
      write_bmap_trace(bmap, out.physical);
      write_merge_event(events, {out.frame, out.virtual_maps.size() - out.maps_late,
                                 out.maps_late, out.merge_duration_ns});
      if (dbru != nullptr) {
        for (const auto& r : out.emitted) write_dbru_trace(*dbru, r);
      }
      emitted_at.push_back(out.emitted_at_ns);
      gen_ns += out.generation_cycle_ns;
      merge_ns += out.merge_duration_ns;
      report.maps_late += out.maps_late;
      ++report.maps_validated;
      ++report.frames_run;
    }
    report.stats = pipeline->stats();
  } catch (const UnknownAllocId& e) {
    report.exit_status = kExitValidation;
    report.error = e.what();
    return report;
  } catch (const RuntimeInvariantViolation& e) {
    report.exit_status = kExitInvariant;
    report.error = e.what();
    return report;
  } catch (const Error& e) {
    report.exit_status = kExitInvariant;
    report.error = "frame " + std::to_string(report.frames_run) + ": " + e.what();
    return report;
  }

  for (const auto& s : report.stats.slices) report.transmitted_bytes += s.transmitted_total();
  if (report.frames_run > 0 && scenario.timing_mode == TimingMode::kWallClock) {
    report.mean_generation_cycle_us = static_cast<double>(gen_ns) / report.frames_run / 1e3;
    report.mean_merge_us = static_cast<double>(merge_ns) / report.frames_run / 1e3;
  }
  report.intervals = IntervalSeries::from_timestamps(emitted_at, report.intervals.source());
  if (report.intervals.size() >= 2) report.interval_summary = interval_stats(report.intervals);

  write_interval_series(open(kIntervalsFile), report.intervals);
  const auto bins = interval_histogram(report.intervals, scenario.histogram_bin_us);
  write_histogram(open(kHistogramFile), bins);
  write_summary(open(kSummaryFile), report.stats);

  for (auto& [name, sink] : sinks) {
    report.checksums[name] = sink->commit();
    if (to_disk) report.outputs[name] = sink->target();
  }
  return report;
}

}  // namespace

RunReport run(const Scenario& scenario, const AlgorithmRegistry& algorithms) {
  return run_impl(scenario, algorithms, std::nullopt);
}

RunReport replay(const Scenario& scenario, const AlgorithmRegistry& algorithms,
                 std::vector<DbruReport> trace) {
  return run_impl(scenario, algorithms, std::move(trace));
}

}  // namespace ponvdba
