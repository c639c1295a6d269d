#include "bcgsleep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bcgsleep/error.hpp"
#include "bcgsleep/rng.hpp"

namespace bcgsleep {

namespace {

constexpr Seconds kMinDuration = 1800;
constexpr Seconds kMinBout = 60;

double truncated_normal(Rng& rng, const SignalDistribution& d) {
  if (d.sd <= 0.0) return d.mean;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double v = rng.normal(d.mean, d.sd);
    if (v > 0.0) return v;
  }
  return d.mean;
}

Seconds draw_bout(Rng& rng, double mean) {
  const auto len = static_cast<Seconds>(std::llround(rng.normal(mean, 0.2 * mean)));
  return std::max(len, kMinBout);
}

int poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

void push_merged(std::vector<StageInterval>& out, Stage stage, Seconds start, Seconds length) {
  if (length <= 0) return;
  if (!out.empty() && out.back().stage == stage && out.back().end_t() == start) {
    out.back().duration += length;
  } else {
    out.push_back({stage, start, length});
  }
}

// Sleep bouts totalling exactly `sleep_total` seconds.
std::vector<std::pair<Stage, Seconds>> sleep_bouts(const SubjectProfile& p, Seconds sleep_total, Rng& rng) {
  std::vector<std::pair<Stage, Seconds>> bouts;
  Seconds used = 0;
  for (int cycle = 0; used < sleep_total; ++cycle) {
    const double rem_mean = static_cast<double>(p.rem_first + cycle * p.rem_growth);
    const double nrem = std::max(static_cast<double>(p.mean_cycle) - rem_mean, 1200.0);
    const std::array<std::pair<Stage, double>, 4> plan{{{Stage::Light, 0.40 * nrem},
                                                        {Stage::Deep, 0.35 * nrem},
                                                        {Stage::Light, 0.25 * nrem},
                                                        {Stage::Rem, rem_mean}}};
    for (const auto& [stage, mean] : plan) {
      if (used >= sleep_total) break;
      const Seconds len = std::min(draw_bout(rng, mean), sleep_total - used);
      bouts.emplace_back(stage, len);
      used += len;
    }
  }
  return bouts;
}

}  // namespace

SubjectProfile SubjectProfile::default_profile() {
  SubjectProfile p;
  auto set = [&](Stage s, std::array<SignalDistribution, kSignalCount> v) {
    p.vitals[static_cast<std::size_t>(stage_code(s))] = v;
  };
  //                 hr          rr            sv          b2b            hrv
  set(Stage::Wake, {{{72, 6}, {16.0, 2.0}, {55, 6}, {833, 60}, {40, 8}}});
  set(Stage::Rem, {{{66, 7}, {17.0, 2.5}, {50, 6}, {909, 80}, {38, 10}}});
  set(Stage::Light, {{{58, 3}, {14.0, 1.2}, {46, 4}, {1034, 45}, {52, 7}}});
  set(Stage::Deep, {{{52, 2}, {12.5, 1.0}, {42, 3}, {1154, 40}, {65, 7}}});
  return p;
}

void SubjectProfile::validate() const {
  const auto hr = [&](Stage s) { return at(s, Signal::Hr); };
  if (!(hr(Stage::Deep).mean < hr(Stage::Light).mean && hr(Stage::Light).mean < hr(Stage::Rem).mean &&
        hr(Stage::Rem).mean < hr(Stage::Wake).mean)) {
    throw Error(ErrorKind::InvalidProfile, "heart-rate means must satisfy deep < light < rem < wake");
  }
  for (Stage s : kAllStages) {
    if (s != Stage::Rem && !(hr(s).sd < hr(Stage::Rem).sd)) {
      throw Error(ErrorKind::InvalidProfile, "REM heart-rate sd must be strictly the largest");
    }
    for (Signal sig : kAllSignals) {
      const auto& d = at(s, sig);
      if (!(d.sd >= 0.0) || !(d.mean > 0.0)) {
        throw Error(ErrorKind::InvalidProfile, "signal means must be positive and sds non-negative");
      }
    }
  }
  if (motion_bursts_per_wake_hour < 0.0 || burst_min < 1 || burst_max < burst_min ||
      dropouts_per_night < 0.0 || dropout_min < 1 || dropout_max < dropout_min || mean_cycle <= 0 ||
      rem_first <= 0 || rem_growth < 0 || !(wake_fraction >= 0.0 && wake_fraction < 1.0) ||
      initial_wake_mean <= 0 || wake_return_mean <= 0) {
    throw Error(ErrorKind::InvalidProfile, "profile field out of range");
  }
  if (motion_bursts_per_wake_hour > 0.0 &&
      3600.0 / motion_bursts_per_wake_hour < static_cast<double>(burst_min + burst_max) / 2.0) {
    throw Error(ErrorKind::InvalidProfile, "motion bursts cannot fit the requested rate");
  }
}

SyntheticNight render_night(const SubjectProfile& profile, std::vector<StageInterval> script,
                            std::uint64_t seed, NightMeta meta) {
  profile.validate();
  Rng rng(seed);
  Seconds duration = 0;
  for (const auto& iv : script) duration = std::max(duration, iv.end_t());
  std::vector<Stage> stage_at(static_cast<std::size_t>(duration), Stage::Wake);
  for (const auto& iv : script) {
    for (Seconds s = iv.start_t; s < iv.end_t(); ++s) stage_at[static_cast<std::size_t>(s)] = iv.stage;
  }

  std::vector<VitalsSample> samples(static_cast<std::size_t>(duration));
  for (Seconds t = 0; t < duration; ++t) {
    auto& s = samples[static_cast<std::size_t>(t)];
    s.t = t;
    for (Signal sig : kAllSignals) {
      set_signal_value(s, sig, truncated_normal(rng, profile.at(stage_at[static_cast<std::size_t>(t)], sig)));
    }
  }

  // Motion: alternate zero-HR bursts and valid stretches through wake time.
  if (profile.motion_bursts_per_wake_hour > 0.0) {
    const double burst_mean = static_cast<double>(profile.burst_min + profile.burst_max) / 2.0;
    const double gap_mean = 3600.0 / profile.motion_bursts_per_wake_hour - burst_mean;
    Seconds next_burst = static_cast<Seconds>(std::llround(rng.uniform(0.0, gap_mean)));
    for (Seconds t = 0; t < duration;) {
      if (stage_at[static_cast<std::size_t>(t)] != Stage::Wake || t < next_burst) {
        ++t;
        continue;
      }
      const auto len = profile.burst_min +
                       static_cast<Seconds>(rng.below(static_cast<std::uint64_t>(profile.burst_max - profile.burst_min + 1)));
      Seconds end = std::min(t + len, duration);
      for (; t < end && stage_at[static_cast<std::size_t>(t)] == Stage::Wake; ++t) {
        samples[static_cast<std::size_t>(t)].hr = 0.0;
      }
      next_burst = t + static_cast<Seconds>(std::llround(rng.uniform(0.5, 1.5) * gap_mean));
    }
  }

  // Connection loss: delete whole seconds, never the first or last one.
  std::vector<Gap> dropouts;
  const int n_drop = poisson(rng, profile.dropouts_per_night);
  std::vector<char> dropped(static_cast<std::size_t>(duration), 0);
  for (int i = 0; i < n_drop; ++i) {
    const auto len = profile.dropout_min +
                     static_cast<Seconds>(rng.below(static_cast<std::uint64_t>(profile.dropout_max - profile.dropout_min + 1)));
    if (duration < len + 2) break;
    const auto start = 1 + static_cast<Seconds>(rng.below(static_cast<std::uint64_t>(duration - len - 1)));
    for (Seconds s = start; s < start + len; ++s) dropped[static_cast<std::size_t>(s)] = 1;
  }
  std::vector<VitalsSample> kept;
  kept.reserve(samples.size());
  for (const auto& s : samples) {
    if (!dropped[static_cast<std::size_t>(s.t)]) kept.push_back(s);
  }

  Seconds non_wake = 0;
  for (const auto& iv : script) {
    if (iv.stage != Stage::Wake) non_wake += iv.duration;
  }

  SyntheticNight night;
  night.record = NightRecord::make(std::move(meta), std::move(kept), script);
  night.dropouts.assign(night.record.gaps().begin(), night.record.gaps().end());
  night.truth = *night.record.labels();
  night.scripted_efficiency = duration > 0 ? static_cast<double>(non_wake) / static_cast<double>(duration) : 0.0;
  return night;
}

SyntheticNight generate_night(const SubjectProfile& profile, Seconds duration, std::uint64_t seed,
                              NightMeta meta) {
  if (duration < kMinDuration) {
    throw Error(ErrorKind::DurationTooShort,
                std::to_string(duration) + " s; need at least " + std::to_string(kMinDuration));
  }
  profile.validate();
  Rng rng(mix_seed(seed, 0));

  const auto wake_total = static_cast<Seconds>(std::llround(profile.wake_fraction * static_cast<double>(duration)));
  const double initial_mean = static_cast<double>(profile.initial_wake_mean);
  const Seconds initial = std::clamp<Seconds>(
      static_cast<Seconds>(std::llround(rng.normal(initial_mean, 0.25 * initial_mean))), std::min<Seconds>(300, wake_total),
      wake_total);
  const Seconds returns_total = wake_total - initial;
  const Seconds sleep_total = duration - wake_total;

  const auto bouts = sleep_bouts(profile, sleep_total, rng);

  // Wake returns: lengths share the remaining wake budget; each is placed at
  // a uniform offset into sleep time.
  std::vector<std::pair<Seconds, Seconds>> returns;  // (sleep offset, length)
  if (returns_total > 0) {
    const auto k = std::max<Seconds>(1, std::llround(static_cast<double>(returns_total) /
                                                     static_cast<double>(profile.wake_return_mean)));
    std::vector<double> weights(static_cast<std::size_t>(k));
    double wsum = 0.0;
    for (auto& w : weights) wsum += (w = rng.uniform(0.5, 1.5));
    Seconds assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      Seconds len = i + 1 == weights.size()
                        ? returns_total - assigned
                        : static_cast<Seconds>(std::floor(weights[i] / wsum * static_cast<double>(returns_total)));
      const auto offset = 1 + static_cast<Seconds>(rng.below(static_cast<std::uint64_t>(std::max<Seconds>(sleep_total - 1, 1))));
      returns.emplace_back(offset, len);
      assigned += len;
    }
    std::sort(returns.begin(), returns.end());
  }

  std::vector<StageInterval> script;
  push_merged(script, Stage::Wake, 0, initial);
  Seconds clock = initial;
  Seconds sleep_clock = 0;
  std::size_t next_return = 0;
  for (const auto& [stage, len] : bouts) {
    Seconds remaining = len;
    while (remaining > 0) {
      Seconds chunk = remaining;
      if (next_return < returns.size()) {
        chunk = std::min(chunk, returns[next_return].first - sleep_clock);
      }
      if (chunk > 0) {
        push_merged(script, stage, clock, chunk);
        clock += chunk;
        sleep_clock += chunk;
        remaining -= chunk;
      }
      while (next_return < returns.size() && returns[next_return].first <= sleep_clock) {
        push_merged(script, Stage::Wake, clock, returns[next_return].second);
        clock += returns[next_return].second;
        ++next_return;
      }
    }
  }
  for (; next_return < returns.size(); ++next_return) {
    push_merged(script, Stage::Wake, clock, returns[next_return].second);
    clock += returns[next_return].second;
  }
  return render_night(profile, std::move(script), mix_seed(seed, 1), std::move(meta));
}

std::vector<SyntheticNight> generate_cohort(const CohortSpec& spec, std::uint64_t seed) {
  std::vector<SyntheticNight> out;
  out.reserve(spec.n_nights);
  for (std::size_t i = 0; i < spec.n_nights; ++i) {
    const double frac = spec.n_nights > 1 ? static_cast<double>(i) / static_cast<double>(spec.n_nights - 1) : 0.5;
    const double efficiency = spec.efficiency_lo + frac * (spec.efficiency_hi - spec.efficiency_lo);
    const std::uint64_t night_seed = mix_seed(seed, i);
    Rng jitter(mix_seed(night_seed, 99));
    SubjectProfile p = spec.profile;
    p.wake_fraction = 1.0 - efficiency;
    const double shift = jitter.uniform(-spec.hr_jitter, spec.hr_jitter);
    for (Stage s : kAllStages) p.at(s, Signal::Hr).mean += shift;

    char id[32];
    std::snprintf(id, sizeof id, "night_%02zu", i);
    NightMeta meta{id, i % 2 == 0 ? "subject_a" : "subject_b", 1700000000 + static_cast<std::int64_t>(i) * 86400};
    out.push_back(generate_night(p, spec.duration, night_seed, std::move(meta)));
  }
  return out;
}

SyntheticNight generate_step_night(const StepNightSpec& spec, std::uint64_t seed) {
  if (spec.onset <= 0 || spec.onset >= spec.duration) {
    throw Error(ErrorKind::InvalidArgument, "onset must fall inside the night");
  }
  SubjectProfile p = SubjectProfile::default_profile();
  p.at(Stage::Wake, Signal::Hr) = {spec.wake_hr, spec.wake_sd};
  p.at(Stage::Light, Signal::Hr) = {spec.sleep_hr, spec.sleep_sd};
  p.at(Stage::Rem, Signal::Hr).sd = std::max({spec.wake_sd, spec.sleep_sd, p.at(Stage::Rem, Signal::Hr).sd}) + 1.0;
  p.dropouts_per_night = 0.0;
  std::vector<StageInterval> script{{Stage::Wake, 0, spec.onset}, {Stage::Light, spec.onset, spec.duration - spec.onset}};
  NightMeta meta{"step_" + std::to_string(seed), "scripted", 0};
  return render_night(p, std::move(script), seed, std::move(meta));
}

}  // namespace bcgsleep
