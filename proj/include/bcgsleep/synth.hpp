#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bcgsleep/record.hpp"

namespace bcgsleep {

struct SignalDistribution {
  double mean = 0.0;
  double sd = 0.0;
};

/// Generator parameters for one synthetic sleeper. Vital distributions are
/// indexed [stage code][signal in feature order].
struct SubjectProfile {
  std::array<std::array<SignalDistribution, kSignalCount>, kStageCount> vitals{};

  // Motion while awake: zero-HR bursts separated by valid stretches.
  double motion_bursts_per_wake_hour = 150.0;
  Seconds burst_min = 12;
  Seconds burst_max = 20;

  // Connection loss: expected windows per night and their length range.
  double dropouts_per_night = 2.0;
  Seconds dropout_min = 5;
  Seconds dropout_max = 45;

  // Stage architecture.
  Seconds mean_cycle = 5400;
  Seconds rem_first = 600;
  Seconds rem_growth = 360;  // added to the REM bout mean each cycle
  double wake_fraction = 0.12;
  Seconds initial_wake_mean = 900;
  Seconds wake_return_mean = 240;

  /// hr(Deep) < hr(Light) < hr(Rem) < hr(Wake), REM hr sd strictly largest,
  /// non-negative sds and sane ranges. Throws InvalidProfile.
  void validate() const;

  const SignalDistribution& at(Stage stage, Signal signal) const {
    return vitals[static_cast<std::size_t>(stage_code(stage))][static_cast<std::size_t>(signal)];
  }
  SignalDistribution& at(Stage stage, Signal signal) {
    return vitals[static_cast<std::size_t>(stage_code(stage))][static_cast<std::size_t>(signal)];
  }

  static SubjectProfile default_profile();
};

struct SyntheticNight {
  NightRecord record;               // labels attached
  std::vector<StageInterval> truth;  // partitions [0, duration)
  std::vector<Gap> dropouts;         // scripted connection-loss windows
  double scripted_efficiency = 0.0;  // non-wake seconds / duration
};

/// Semi-Markov night: an initial wake bout, then Light -> Deep -> Light -> Rem
/// cycles with REM lengthening across the night, interleaved wake returns.
/// Throws DurationTooShort below 1800 s.
SyntheticNight generate_night(const SubjectProfile& profile, Seconds duration, std::uint64_t seed,
                              NightMeta meta = {});

/// Vitals, motion bursts and dropouts for a given stage script.
SyntheticNight render_night(const SubjectProfile& profile, std::vector<StageInterval> script,
                            std::uint64_t seed, NightMeta meta = {});

struct CohortSpec {
  std::size_t n_nights = 8;
  double efficiency_lo = 0.7;
  double efficiency_hi = 0.95;
  Seconds duration = 8 * 3600;
  double hr_jitter = 2.0;  // per-night offset applied to every stage's hr mean
  SubjectProfile profile = SubjectProfile::default_profile();
};

/// Nights whose scripted efficiencies are evenly spaced over
/// [efficiency_lo, efficiency_hi]. Per-night seeds derive from `seed`.
std::vector<SyntheticNight> generate_cohort(const CohortSpec& spec, std::uint64_t seed);

/// A night with a known sleep onset: restless wake (dense zero-HR bursts)
/// until `onset`, then steady light sleep at a lower heart rate.
struct StepNightSpec {
  Seconds duration = 3600;
  Seconds onset = 1200;
  double wake_hr = 74.0;
  double wake_sd = 5.0;
  double sleep_hr = 56.0;
  double sleep_sd = 2.5;
};

SyntheticNight generate_step_night(const StepNightSpec& spec, std::uint64_t seed);

}  // namespace bcgsleep
