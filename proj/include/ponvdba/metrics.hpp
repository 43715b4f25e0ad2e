// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ponvdba/ids.hpp"

namespace ponvdba {

enum class TimingSource : std::uint8_t { kSimulatedTime, kWallClock };

std::string_view to_string(TimingSource s);

// Gaps between successive bandwidth-map emissions, in nanoseconds.
class IntervalSeries {
 public:
  explicit IntervalSeries(TimingSource source = TimingSource::kSimulatedTime)
      : source_(source) {}

  // Intervals between consecutive emission timestamps; timestamps must not
  // go backwards.
  static IntervalSeries from_timestamps(std::span<const std::uint64_t> emitted_ns,
                                        TimingSource source);

  void add(std::uint64_t interval_ns) { samples_.push_back(interval_ns); }

  TimingSource source() const { return source_; }
  std::span<const std::uint64_t> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

 private:
  TimingSource source_;
  std::vector<std::uint64_t> samples_;
};

struct IntervalStats {
  std::size_t count = 0;
  double mean_us = 0;
  double variance_us2 = 0;  // population variance
  double min_us = 0;
  double max_us = 0;
  double p99_us = 0;  // nearest-rank
};

// Throws InsufficientSamples for fewer than two samples.
IntervalStats interval_stats(const IntervalSeries& series);

struct HistogramBin {
  double bin_start_us = 0;
  std::uint64_t count = 0;
};

// Non-empty bins of width `bin_width_us`, ascending. Bin edges sit on
// multiples of the width.
std::vector<HistogramBin> interval_histogram(const IntervalSeries& series, double bin_width_us);

// (sum x)^2 / (n * sum x^2). Throws AllZero when every value is zero and
// std::invalid_argument for an empty or negative input.
double jains_fairness(std::span<const double> throughputs);

struct SliceStats {
  SliceId slice_id;
  std::vector<Words> granted_words;               // per frame
  std::vector<std::uint64_t> transmitted_bytes;  // per frame
  std::vector<std::uint64_t> latency_frames;     // per transmitted packet
  std::uint64_t offered_bytes = 0;
  std::uint64_t dropped_bytes = 0;

  std::uint64_t granted_total() const;
  std::uint64_t transmitted_total() const;
  // transmitted <= 4 * granted in every frame
  bool within_grants() const;
};

struct RunStats {
  std::vector<SliceStats> slices;

  const SliceStats* find(SliceId id) const;
};

// |granted_perturbed - granted_baseline| / granted_baseline for the victim,
// with granted words summed over all frames. Both baseline and perturbed
// totals of zero give 0. Throws ConfigMismatch when the two runs do not have
// the same slices and frame count.
double isolation_delta(const RunStats& baseline, const RunStats& perturbed, SliceId victim);

inline constexpr std::string_view kIntervalSeriesHeader = "frame_index,interval_ns";
inline constexpr std::string_view kHistogramHeader = "bin_start_us,count";
inline constexpr std::string_view kSummaryHeader =
    "slice_id,frames,granted_words_total,granted_words_per_frame,transmitted_bytes,"
    "offered_bytes,dropped_bytes,packets,latency_mean_frames,latency_p99_frames";

// The i-th sample is the gap ending at frame first_frame + i.
void write_interval_series(std::ostream& os, const IntervalSeries& series,
                           FrameIndex first_frame = 1);
void write_histogram(std::ostream& os, std::span<const HistogramBin> bins);
void write_summary(std::ostream& os, const RunStats& stats);

}  // namespace ponvdba
