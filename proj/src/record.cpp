#include "bcgsleep/record.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bcgsleep/error.hpp"

namespace bcgsleep {

std::string_view signal_name(Signal signal) noexcept {
  switch (signal) {
    case Signal::Hr: return "hr";
    case Signal::Rr: return "rr";
    case Signal::Sv: return "sv";
    case Signal::B2b: return "b2b";
    case Signal::Hrv: return "hrv";
  }
  return "hr";
}

double signal_value(const VitalsSample& sample, Signal signal) noexcept {
  switch (signal) {
    case Signal::Hr: return sample.hr;
    case Signal::Rr: return sample.rr;
    case Signal::Sv: return sample.sv;
    case Signal::B2b: return sample.b2b;
    case Signal::Hrv: return sample.hrv;
  }
  return 0.0;
}

void set_signal_value(VitalsSample& sample, Signal signal, double value) noexcept {
  switch (signal) {
    case Signal::Hr: sample.hr = value; break;
    case Signal::Rr: sample.rr = value; break;
    case Signal::Sv: sample.sv = value; break;
    case Signal::B2b: sample.b2b = value; break;
    case Signal::Hrv: sample.hrv = value; break;
  }
}

std::vector<Gap> compute_gaps(std::span<const VitalsSample> samples) {
  std::vector<Gap> gaps;
  Seconds expected = 0;
  for (const auto& s : samples) {
    if (s.t > expected) gaps.push_back({expected, s.t - expected});
    expected = s.t + 1;
  }
  return gaps;
}

std::vector<StageInterval> validate_intervals(std::vector<StageInterval> intervals) {
  std::vector<std::size_t> order(intervals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return intervals[a].start_t < intervals[b].start_t;
  });
  std::vector<StageInterval> sorted;
  sorted.reserve(intervals.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& cur = intervals[order[k]];
    if (cur.duration <= 0) {
      throw Error(ErrorKind::MalformedLabels,
                  "interval " + std::to_string(order[k]) + " has non-positive duration");
    }
    if (k > 0 && cur.start_t < intervals[order[k - 1]].end_t()) {
      const auto i = std::min(order[k - 1], order[k]);
      const auto j = std::max(order[k - 1], order[k]);
      throw Error(ErrorKind::OverlappingIntervals,
                  "intervals " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
    sorted.push_back(cur);
  }
  return sorted;
}

NightRecord NightRecord::make(NightMeta meta, std::vector<VitalsSample> samples,
                              std::optional<std::vector<StageInterval>> labels) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.t < 0 || (i > 0 && s.t <= samples[i - 1].t)) {
      throw Error(ErrorKind::NonMonotonicTimestamp, "t=" + std::to_string(s.t));
    }
    for (Signal sig : kAllSignals) {
      const double v = signal_value(s, sig);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::MalformedRow,
                    "non-finite " + std::string(signal_name(sig)) + " at t=" + std::to_string(s.t));
      }
      if (v < 0.0) {
        throw Error(ErrorKind::NegativeVital,
                    std::string(signal_name(sig)) + " at t=" + std::to_string(s.t));
      }
    }
  }
  NightRecord r;
  r.meta_ = std::move(meta);
  r.gaps_ = compute_gaps(samples);
  r.samples_ = std::move(samples);
  if (labels) r.labels_ = validate_intervals(std::move(*labels));
  return r;
}

Seconds NightRecord::total_gap_seconds() const noexcept {
  Seconds total = 0;
  for (const auto& g : gaps_) total += g.length;
  return total;
}

NightRecord NightRecord::with_labels(std::vector<StageInterval> labels) const {
  NightRecord r = *this;
  r.labels_ = validate_intervals(std::move(labels));
  return r;
}

}  // namespace bcgsleep
