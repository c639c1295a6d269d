#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcgsleep/preprocess.hpp"
#include "bcgsleep/record.hpp"

namespace bcgsleep {

/// Parameters of the moving-threshold sleep/wake rule. The defaults are the
/// published ones; counts are thresholds that must be strictly exceeded.
struct ThresholdConfig {
  Seconds epoch_len = 30;
  Seconds lookback = 180;
  double scalar_early = -1.0;
  double scalar_late = 2.0;
  Seconds forced_awake_prefix = 180;
  int below_majority = 15;
  int zero_limit = 10;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

enum class WakeState { Awake, Asleep };

struct EpochVerdict {
  WakeState state = WakeState::Awake;
  int n_below = 0;
  int n_zero = 0;
  int n_present = 0;
};

struct SleepWakeEpoch {
  std::size_t index = 0;
  Seconds start_t = 0;
  WakeState state = WakeState::Awake;
  std::optional<double> threshold;  // absent in the forced-awake prefix or with no valid lookback
  int n_below = 0;
  int n_zero = 0;
  int n_present = 0;
};

/// mean + scalar * population std of the valid (present, non-zero) samples
/// in `lookback`; nullopt when there are none.
std::optional<double> moving_threshold(std::span<const MaybeValue> lookback, double scalar);

/// Counts zeros and strictly-below-threshold valid samples; holes count
/// toward neither. Asleep iff n_below > below_majority and
/// n_zero <= zero_limit. An undefined threshold yields Awake.
EpochVerdict classify_epoch(std::span<const MaybeValue> epoch, std::optional<double> threshold,
                            const ThresholdConfig& config = {});

/// Scalar in effect for an epoch starting at `start_t`: the early scalar
/// while the lookback still overlaps the forced-awake prefix.
double scalar_for_epoch(Seconds start_t, const ThresholdConfig& config = {});

/// Segments a night into whole epochs (a trailing partial epoch is
/// dropped). Throws RecordTooShort below the forced-awake prefix.
std::vector<SleepWakeEpoch> run_night(const NightRecord& record, const ThresholdConfig& config = {});

/// Same, over an already-extracted raw heart-rate series.
std::vector<SleepWakeEpoch> run_night(std::span<const MaybeValue> raw_hr,
                                      const ThresholdConfig& config = {});

/// Asleep epochs / all epochs. Throws NoEpochs.
double sleep_efficiency(std::span<const SleepWakeEpoch> epochs);

/// start_t of the first Asleep epoch; nullopt when the night never slept.
std::optional<Seconds> sleep_onset_latency(std::span<const SleepWakeEpoch> epochs);

/// Awake time after the first Asleep epoch; 0 if never asleep.
Seconds waso(std::span<const SleepWakeEpoch> epochs, Seconds epoch_len = 30);

/// CSV with header index,start_t,state,threshold,n_below,n_zero.
std::string format_epochs_csv(std::span<const SleepWakeEpoch> epochs);

}  // namespace bcgsleep
