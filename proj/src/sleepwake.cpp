#include "bcgsleep/sleepwake.hpp"

#include <algorithm>
#include <cmath>

#include "bcgsleep/error.hpp"
#include "bcgsleep/ingest.hpp"

namespace bcgsleep {

void ThresholdConfig::validate() const {
  if (epoch_len <= 0 || lookback <= 0 || forced_awake_prefix < 0 || below_majority < 0 ||
      zero_limit < 0) {
    throw Error(ErrorKind::InvalidArgument, "threshold config fields must be positive");
  }
  if (forced_awake_prefix % epoch_len != 0) {
    throw Error(ErrorKind::InvalidArgument, "epoch length must divide the forced-awake prefix");
  }
}

std::optional<double> moving_threshold(std::span<const MaybeValue> lookback, double scalar) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : lookback) {
    if (v && *v > 0.0) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& v : lookback) {
    if (v && *v > 0.0) ss += (*v - mean) * (*v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  return mean + scalar * sd;
}

EpochVerdict classify_epoch(std::span<const MaybeValue> epoch, std::optional<double> threshold,
                            const ThresholdConfig& config) {
  EpochVerdict v;
  for (const auto& hr : epoch) {
    if (!hr) continue;
    ++v.n_present;
    if (*hr == 0.0) {
      ++v.n_zero;
    } else if (threshold && *hr < *threshold) {
      ++v.n_below;
    }
  }
  const bool asleep = threshold && v.n_below > config.below_majority && v.n_zero <= config.zero_limit;
  v.state = asleep ? WakeState::Asleep : WakeState::Awake;
  return v;
}

double scalar_for_epoch(Seconds start_t, const ThresholdConfig& config) {
  return start_t < config.forced_awake_prefix + config.lookback ? config.scalar_early
                                                                 : config.scalar_late;
}

std::vector<SleepWakeEpoch> run_night(std::span<const MaybeValue> raw_hr,
                                      const ThresholdConfig& config) {
  config.validate();
  const auto length = static_cast<Seconds>(raw_hr.size());
  if (length < config.forced_awake_prefix || length < config.epoch_len) {
    throw Error(ErrorKind::RecordTooShort,
                "record spans " + std::to_string(length) + " s; need at least " +
                    std::to_string(std::max(config.forced_awake_prefix, config.epoch_len)));
  }
  const auto n_epochs = static_cast<std::size_t>(length / config.epoch_len);
  std::vector<SleepWakeEpoch> epochs;
  epochs.reserve(n_epochs);
  for (std::size_t i = 0; i < n_epochs; ++i) {
    SleepWakeEpoch e;
    e.index = i;
    e.start_t = static_cast<Seconds>(i) * config.epoch_len;
    const auto epoch = raw_hr.subspan(static_cast<std::size_t>(e.start_t),
                                      static_cast<std::size_t>(config.epoch_len));
    if (e.start_t < config.forced_awake_prefix) {
      const auto counts = classify_epoch(epoch, std::nullopt, config);
      e.n_zero = counts.n_zero;
      e.n_present = counts.n_present;
      epochs.push_back(e);
      continue;
    }
    const Seconds from = std::max<Seconds>(0, e.start_t - config.lookback);
    const auto window = raw_hr.subspan(static_cast<std::size_t>(from),
                                       static_cast<std::size_t>(e.start_t - from));
    e.threshold = moving_threshold(window, scalar_for_epoch(e.start_t, config));
    const auto verdict = classify_epoch(epoch, e.threshold, config);
    e.state = verdict.state;
    e.n_below = verdict.n_below;
    e.n_zero = verdict.n_zero;
    e.n_present = verdict.n_present;
    epochs.push_back(e);
  }
  return epochs;
}

std::vector<SleepWakeEpoch> run_night(const NightRecord& record, const ThresholdConfig& config) {
  const auto raw = raw_hr_series(record);
  return run_night(std::span<const MaybeValue>(raw), config);
}

double sleep_efficiency(std::span<const SleepWakeEpoch> epochs) {
  if (epochs.empty()) throw Error(ErrorKind::NoEpochs, "no epochs to score");
  const auto asleep = std::count_if(epochs.begin(), epochs.end(), [](const SleepWakeEpoch& e) {
    return e.state == WakeState::Asleep;
  });
  return static_cast<double>(asleep) / static_cast<double>(epochs.size());
}

std::optional<Seconds> sleep_onset_latency(std::span<const SleepWakeEpoch> epochs) {
  for (const auto& e : epochs) {
    if (e.state == WakeState::Asleep) return e.start_t;
  }
  return std::nullopt;
}

Seconds waso(std::span<const SleepWakeEpoch> epochs, Seconds epoch_len) {
  const auto onset = std::find_if(epochs.begin(), epochs.end(), [](const SleepWakeEpoch& e) {
    return e.state == WakeState::Asleep;
  });
  if (onset == epochs.end()) return 0;
  const auto awake = std::count_if(onset, epochs.end(), [](const SleepWakeEpoch& e) {
    return e.state == WakeState::Awake;
  });
  return static_cast<Seconds>(awake) * epoch_len;
}

std::string format_epochs_csv(std::span<const SleepWakeEpoch> epochs) {
  std::string out = "index,start_t,state,threshold,n_below,n_zero\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.index) + ',' + std::to_string(e.start_t) + ',' +
           (e.state == WakeState::Asleep ? "asleep" : "awake") + ',' +
           (e.threshold ? format_real(*e.threshold) : std::string()) + ',' +
           std::to_string(e.n_below) + ',' + std::to_string(e.n_zero) + '\n';
  }
  return out;
}

}  // namespace bcgsleep
