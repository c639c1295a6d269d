#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcgsleep/stage.hpp"

namespace bcgsleep {

/// Seconds since night start. The sensor is 1 Hz, so integer seconds.
using Seconds = std::int64_t;

/// One second of post-processed sensor output.
struct VitalsSample {
  Seconds t = 0;
  double hr = 0.0;   // beats per minute
  double rr = 0.0;   // breaths per minute
  double sv = 0.0;   // relative stroke volume
  double hrv = 0.0;  // ms
  double b2b = 0.0;  // ms

  /// A zero heart rate marks a motion-corrupted second.
  bool motion_invalid() const noexcept { return hr == 0.0; }

  friend bool operator==(const VitalsSample&, const VitalsSample&) = default;
};

/// The five signals in feature order (signal-major layout of a feature row).
enum class Signal : int { Hr = 0, Rr = 1, Sv = 2, B2b = 3, Hrv = 4 };
inline constexpr int kSignalCount = 5;
inline constexpr std::array<Signal, kSignalCount> kAllSignals{Signal::Hr, Signal::Rr, Signal::Sv,
                                                             Signal::B2b, Signal::Hrv};

std::string_view signal_name(Signal signal) noexcept;
double signal_value(const VitalsSample& sample, Signal signal) noexcept;
void set_signal_value(VitalsSample& sample, Signal signal, double value) noexcept;

/// A run of seconds with no sample at all (connection loss).
struct Gap {
  Seconds start_t = 0;
  Seconds length = 0;

  friend bool operator==(const Gap&, const Gap&) = default;
};

struct StageInterval {
  Stage stage = Stage::Wake;
  Seconds start_t = 0;
  Seconds duration = 0;

  Seconds end_t() const noexcept { return start_t + duration; }

  friend bool operator==(const StageInterval&, const StageInterval&) = default;
};

struct NightMeta {
  std::string night_id;
  std::string subject_id;
  std::int64_t start_epoch = 0;  // unix seconds of t = 0

  friend bool operator==(const NightMeta&, const NightMeta&) = default;
};

/// A validated, immutable night: strictly increasing timestamps, finite
/// non-negative vitals, gaps derived from the sample timestamps over
/// [0, last t], and optional sorted non-overlapping labels.
class NightRecord {
 public:
  NightRecord() = default;

  /// Validates and computes gaps. Throws NonMonotonicTimestamp,
  /// NegativeVital, MalformedRow (non-finite) or OverlappingIntervals.
  static NightRecord make(NightMeta meta, std::vector<VitalsSample> samples,
                          std::optional<std::vector<StageInterval>> labels = std::nullopt);

  const NightMeta& meta() const noexcept { return meta_; }
  std::span<const VitalsSample> samples() const noexcept { return samples_; }
  std::span<const Gap> gaps() const noexcept { return gaps_; }
  const std::optional<std::vector<StageInterval>>& labels() const noexcept { return labels_; }

  bool empty() const noexcept { return samples_.empty(); }
  /// last t + 1, or 0 for an empty record.
  Seconds length() const noexcept { return samples_.empty() ? 0 : samples_.back().t + 1; }
  Seconds total_gap_seconds() const noexcept;

  NightRecord with_labels(std::vector<StageInterval> labels) const;

  friend bool operator==(const NightRecord&, const NightRecord&) = default;

 private:
  NightMeta meta_;
  std::vector<VitalsSample> samples_;
  std::vector<Gap> gaps_;
  std::optional<std::vector<StageInterval>> labels_;
};

/// Gaps over [0, last t] implied by strictly increasing timestamps.
std::vector<Gap> compute_gaps(std::span<const VitalsSample> samples);

/// Sorts by start and rejects overlaps / non-positive durations.
std::vector<StageInterval> validate_intervals(std::vector<StageInterval> intervals);

}  // namespace bcgsleep
