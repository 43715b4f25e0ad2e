// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "ponvdba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ponvdba/errors.hpp"

namespace ponvdba {

std::string_view to_string(TimingSource s) {
  return s == TimingSource::kSimulatedTime ? "simulated" : "wall_clock";
}

IntervalSeries IntervalSeries::from_timestamps(std::span<const std::uint64_t> emitted_ns,
                                               TimingSource source) {
  IntervalSeries series(source);
  for (std::size_t i = 1; i < emitted_ns.size(); ++i) {
    if (emitted_ns[i] < emitted_ns[i - 1]) {
      throw std::invalid_argument("emission timestamps go backwards");
    }
    series.add(emitted_ns[i] - emitted_ns[i - 1]);
  }
  return series;
}

IntervalStats interval_stats(const IntervalSeries& series) {
  const auto s = series.samples();
  if (s.size() < 2) {
    throw InsufficientSamples("interval statistics need at least two samples, got " +
                              std::to_string(s.size()));
  }
  // Two-pass in long double: exact zero variance for constant series.
  long double sum = 0;
  for (auto v : s) sum += v;
  const long double mean = sum / s.size();
  long double sq = 0;
  for (auto v : s) {
    const long double d = static_cast<long double>(v) - mean;
    sq += d * d;
  }
  std::vector<std::uint64_t> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));

  IntervalStats st;
  st.count = s.size();
  st.mean_us = static_cast<double>(mean / 1e3L);
  st.variance_us2 = static_cast<double>(sq / s.size() / 1e6L);
  st.min_us = static_cast<double>(sorted.front()) / 1e3;
  st.max_us = static_cast<double>(sorted.back()) / 1e3;
  st.p99_us = static_cast<double>(sorted[std::max<std::size_t>(rank, 1) - 1]) / 1e3;
  return st;
}

std::vector<HistogramBin> interval_histogram(const IntervalSeries& series, double bin_width_us) {
  if (!(bin_width_us > 0)) throw std::invalid_argument("histogram bin width must be positive");
  std::map<std::int64_t, std::uint64_t> bins;
  for (auto v : series.samples()) {
    const double us = static_cast<double>(v) / 1e3;
    ++bins[static_cast<std::int64_t>(std::floor(us / bin_width_us))];
  }
  std::vector<HistogramBin> out;
  for (const auto& [k, n] : bins) out.push_back({static_cast<double>(k) * bin_width_us, n});
  return out;
}

double jains_fairness(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("fairness needs at least one entity");
  double sum = 0;
  double sq = 0;
  for (double v : x) {
    if (v < 0 || !std::isfinite(v)) throw std::invalid_argument("throughput must be non-negative");
    sum += v;
    sq += v * v;
  }
  if (sum == 0) throw AllZero("fairness of an all-zero allocation is undefined");
  return sum * sum / (static_cast<double>(x.size()) * sq);
}

std::uint64_t SliceStats::granted_total() const {
  std::uint64_t t = 0;
  for (auto w : granted_words) t += w;
  return t;
}

std::uint64_t SliceStats::transmitted_total() const {
  std::uint64_t t = 0;
  for (auto b : transmitted_bytes) t += b;
  return t;
}

bool SliceStats::within_grants() const {
  if (granted_words.size() != transmitted_bytes.size()) return false;
  for (std::size_t i = 0; i < granted_words.size(); ++i) {
    if (transmitted_bytes[i] > static_cast<std::uint64_t>(granted_words[i]) * kBytesPerWord) {
      return false;
    }
  }
  return true;
}

const SliceStats* RunStats::find(SliceId id) const {
  for (const auto& s : slices) {
    if (s.slice_id == id) return &s;
  }
  return nullptr;
}

double isolation_delta(const RunStats& baseline, const RunStats& perturbed, SliceId victim) {
  if (baseline.slices.size() != perturbed.slices.size()) {
    throw ConfigMismatch("runs have different slice sets");
  }
  for (const auto& b : baseline.slices) {
    const SliceStats* p = perturbed.find(b.slice_id);
    if (p == nullptr || p->granted_words.size() != b.granted_words.size()) {
      throw ConfigMismatch("runs differ in slices or frame count");
    }
  }
  const SliceStats* b = baseline.find(victim);
  if (b == nullptr) throw ConfigMismatch("victim slice not present in either run");
  const SliceStats* p = perturbed.find(victim);
  const auto base = static_cast<double>(b->granted_total());
  const auto pert = static_cast<double>(p->granted_total());
  if (base == 0) return pert == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(pert - base) / base;
}

void write_interval_series(std::ostream& os, const IntervalSeries& series,
                           FrameIndex first_frame) {
  os << kIntervalSeriesHeader << '\n';
  FrameIndex f = first_frame;
  for (auto v : series.samples()) os << f++ << ',' << v << '\n';
}

void write_histogram(std::ostream& os, std::span<const HistogramBin> bins) {
  os << kHistogramHeader << '\n';
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(3);
  for (const auto& b : bins) os << b.bin_start_us << ',' << b.count << '\n';
  os.flags(flags);
}

void write_summary(std::ostream& os, const RunStats& stats) {
  os << kSummaryHeader << '\n';
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(3);
  for (const auto& s : stats.slices) {
    const std::size_t frames = s.granted_words.size();
    const double per_frame =
        frames == 0 ? 0.0 : static_cast<double>(s.granted_total()) / static_cast<double>(frames);
    double lat_mean = 0;
    std::uint64_t lat_p99 = 0;
    if (!s.latency_frames.empty()) {
      long double sum = 0;
      for (auto l : s.latency_frames) sum += l;
      lat_mean = static_cast<double>(sum / s.latency_frames.size());
      std::vector<std::uint64_t> sorted = s.latency_frames;
      const auto rank = static_cast<std::size_t>(
          std::ceil(0.99 * static_cast<double>(sorted.size())));
      const auto idx = std::max<std::size_t>(rank, 1) - 1;
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(idx), sorted.end());
      lat_p99 = sorted[idx];
    }
    os << s.slice_id.value() << ',' << frames << ',' << s.granted_total() << ',' << per_frame
       << ',' << s.transmitted_total() << ',' << s.offered_bytes << ',' << s.dropped_bytes << ','
       << s.latency_frames.size() << ',' << lat_mean << ',' << lat_p99 << '\n';
  }
  os.flags(flags);
}

}  // namespace ponvdba
