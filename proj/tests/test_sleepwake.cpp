#include <cmath>

#include "bcgsleep/preprocess.hpp"
#include "bcgsleep/sleepwake.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bcgsleep;

namespace {

std::vector<MaybeValue> repeat(double v, int n) { return std::vector<MaybeValue>(static_cast<std::size_t>(n), v); }

std::vector<SleepWakeEpoch> states(std::initializer_list<char> s) {
  std::vector<SleepWakeEpoch> out;
  for (char c : s) {
    SleepWakeEpoch e;
    e.index = out.size();
    e.start_t = static_cast<Seconds>(out.size()) * 30;
    e.state = c == 'S' ? WakeState::Asleep : WakeState::Awake;
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("moving threshold") {
  CHECK(moving_threshold(repeat(60, 180), 2.0) == 60.0);

  std::vector<MaybeValue> alt;
  for (int i = 0; i < 90; ++i) {
    alt.push_back(55.0);
    alt.push_back(65.0);
  }
  CHECK(*moving_threshold(alt, 2.0) == doctest::Approx(70.0).epsilon(1e-12));

  std::vector<MaybeValue> zeros;
  for (int i = 0; i < 180; ++i) zeros.push_back(i % 3 == 0 ? 0.0 : 60.0);
  CHECK(moving_threshold(zeros, -1.0) == 60.0);

  CHECK_FALSE(moving_threshold(repeat(0, 180), 2.0).has_value());
  CHECK_FALSE(moving_threshold(std::vector<MaybeValue>(180), 2.0).has_value());
}

TEST_CASE("epoch classification") {
  const auto a = classify_epoch(repeat(55, 30), 70.0);
  CHECK(a.state == WakeState::Asleep);
  CHECK(a.n_below == 30);
  CHECK(a.n_zero == 0);

  auto mixed = repeat(55, 19);
  for (int i = 0; i < 11; ++i) mixed.push_back(0.0);
  const auto b = classify_epoch(mixed, 70.0);
  CHECK(b.state == WakeState::Awake);
  CHECK(b.n_zero == 11);

  auto half = repeat(55, 15);
  for (int i = 0; i < 15; ++i) half.push_back(80.0);
  CHECK(classify_epoch(half, 70.0).state == WakeState::Awake);

  CHECK(classify_epoch(repeat(55, 30), std::nullopt).state == WakeState::Awake);
  // equal to the threshold is not below it
  CHECK(classify_epoch(repeat(70, 30), 70.0).n_below == 0);
}

TEST_CASE("exhaustive epoch boundaries against the rule oracle") {
  // every split of 30 seconds into below / above / zero / hole
  for (int below = 0; below <= 30; ++below) {
    for (int zero = 0; below + zero <= 30; ++zero) {
      for (int hole = 0; below + zero + hole <= 30; hole += 3) {
        std::vector<MaybeValue> e;
        for (int i = 0; i < below; ++i) e.push_back(50.0);
        for (int i = 0; i < zero; ++i) e.push_back(0.0);
        for (int i = 0; i < hole; ++i) e.push_back(std::nullopt);
        while (e.size() < 30) e.push_back(90.0);
        const auto v = classify_epoch(e, 60.0);
        CHECK(v.n_below == below);
        CHECK(v.n_zero == zero);
        CHECK((v.state == WakeState::Asleep) == oracle::asleep(e, 60.0));
      }
    }
  }
}

TEST_CASE("scalar follows the lookback overlap with the forced prefix") {
  CHECK(scalar_for_epoch(180) == -1.0);
  CHECK(scalar_for_epoch(330) == -1.0);
  CHECK(scalar_for_epoch(360) == 2.0);
  CHECK(scalar_for_epoch(3600) == 2.0);
}

TEST_CASE("constant night stays awake") {
  const auto epochs = run_night(testutil::hr_record(std::vector<double>(1800, 70.0)));
  CHECK(epochs.size() == 60);
  for (const auto& e : epochs) {
    CHECK(e.state == WakeState::Awake);
    if (e.threshold) {
      CHECK(*e.threshold == 70.0);
      CHECK(e.n_below == 0);
    }
  }
}

TEST_CASE("step night falls asleep exactly at the step") {
  std::vector<double> hr(1800, 70.0);
  for (std::size_t t = 600; t < hr.size(); ++t) hr[t] = 55.0;
  const auto epochs = run_night(testutil::hr_record(hr));
  const auto onset = sleep_onset_latency(epochs);
  REQUIRE(onset.has_value());
  CHECK(*onset == 600);
  CHECK(*epochs[20].threshold == 70.0);
}

TEST_CASE("short nights") {
  const auto epochs = run_night(testutil::hr_record(std::vector<double>(185, 60.0)));
  CHECK(epochs.size() == 6);
  for (const auto& e : epochs) {
    CHECK(e.state == WakeState::Awake);
    CHECK_FALSE(e.threshold.has_value());
  }
  CHECK_THROWS_KIND(run_night(testutil::hr_record(std::vector<double>(179, 60.0))), RecordTooShort);
}

TEST_CASE("efficiency, onset latency and wake after onset") {
  std::vector<SleepWakeEpoch> night(960);
  for (std::size_t i = 0; i < 864; ++i) night[i].state = WakeState::Asleep;
  CHECK(sleep_efficiency(night) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(sleep_efficiency(states({'W', 'W'})) == 0.0);
  CHECK(sleep_efficiency(states({'S', 'S'})) == 1.0);
  CHECK_THROWS_KIND(sleep_efficiency(std::vector<SleepWakeEpoch>{}), NoEpochs);

  std::vector<SleepWakeEpoch> late(30);
  for (std::size_t i = 0; i < late.size(); ++i) {
    late[i].index = i;
    late[i].start_t = static_cast<Seconds>(i) * 30;
    if (i >= 20) late[i].state = WakeState::Asleep;
  }
  CHECK(sleep_onset_latency(late) == 600);
  CHECK_FALSE(sleep_onset_latency(states({'W', 'W', 'W'})).has_value());

  CHECK(waso(states({'W', 'W', 'W', 'W', 'W', 'W', 'S', 'W', 'S'})) == 30);
  CHECK(waso(states({'W', 'S', 'S'})) == 0);
  CHECK(waso(states({'W', 'W'})) == 0);
}

TEST_CASE("property: onset is never inside the forced prefix") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> hr(1200);
    for (auto& v : hr) v = rng.uniform() < 0.1 ? 0.0 : rng.normal(60, 8);
    for (auto& v : hr) v = std::max(v, 0.0);
    const auto epochs = run_night(testutil::hr_record(hr));
    for (std::size_t i = 0; i < 6; ++i) CHECK(epochs[i].state == WakeState::Awake);
    if (const auto sol = sleep_onset_latency(epochs)) CHECK(*sol >= 180);
  }
}

TEST_CASE("property: shifting heart rate shifts thresholds and keeps states") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> hr(1500);
    for (auto& v : hr) v = rng.uniform() < 0.2 ? 0.0 : std::round(rng.normal(60, 6));
    std::vector<double> shifted = hr;
    for (auto& v : shifted) {
      if (v != 0.0) v += 8.0;
    }
    const auto a = run_night(testutil::hr_record(hr));
    const auto b = run_night(testutil::hr_record(shifted));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].state == b[i].state);
      CHECK(a[i].n_below == b[i].n_below);
      CHECK(a[i].threshold.has_value() == b[i].threshold.has_value());
      if (a[i].threshold) CHECK(*b[i].threshold == doctest::Approx(*a[i].threshold + 8.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: epochs depend only on the past") {
  Rng rng(47);
  std::vector<double> hr(2400);
  for (auto& v : hr) v = rng.uniform() < 0.15 ? 0.0 : rng.normal(62, 7);
  for (auto& v : hr) v = std::max(v, 0.0);
  const auto full = run_night(testutil::hr_record(hr));
  for (std::size_t cut : {600u, 1290u, 1800u}) {
    const auto part = run_night(testutil::hr_record(std::vector<double>(hr.begin(), hr.begin() + cut)));
    for (std::size_t i = 0; i < part.size(); ++i) {
      CHECK(part[i].state == full[i].state);
      CHECK(part[i].threshold == full[i].threshold);
    }
  }
}

TEST_CASE("property: run_night agrees with a direct re-evaluation of the rule") {
  Rng rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<MaybeValue> raw(1500);
    for (auto& v : raw) {
      const double u = rng.uniform();
      if (u < 0.05) continue;
      v = u < 0.2 ? 0.0 : std::max(0.0, rng.normal(60, 6));
    }
    const auto epochs = run_night(raw);
    for (const auto& e : epochs) {
      std::optional<double> thr;
      if (e.start_t >= 180) {
        std::vector<double> valid;
        for (Seconds t = e.start_t - 180; t < e.start_t; ++t) {
          const auto& v = raw[static_cast<std::size_t>(t)];
          if (v && *v > 0.0) valid.push_back(*v);
        }
        if (!valid.empty()) {
          double m = 0, ss = 0;
          for (double x : valid) m += x;
          m /= static_cast<double>(valid.size());
          for (double x : valid) ss += (x - m) * (x - m);
          thr = m + (e.start_t < 360 ? -1.0 : 2.0) * std::sqrt(ss / static_cast<double>(valid.size()));
        }
      }
      REQUIRE(e.threshold.has_value() == thr.has_value());
      if (thr) CHECK(*e.threshold == doctest::Approx(*thr).epsilon(1e-12));
      const std::vector<MaybeValue> window(raw.begin() + e.start_t, raw.begin() + e.start_t + 30);
      CHECK((e.state == WakeState::Asleep) == oracle::asleep(window, e.threshold));
    }
  }
}

TEST_CASE("flipping one epoch to asleep adds 1/N") {
  auto night = states({'W', 'S', 'W', 'W', 'S', 'W', 'W', 'W'});
  const double before = sleep_efficiency(night);
  night[2].state = WakeState::Asleep;
  CHECK(sleep_efficiency(night) == doctest::Approx(before + 1.0 / 8.0));
}

TEST_CASE("epoch csv") {
  const auto epochs = run_night(testutil::hr_record(std::vector<double>(240, 60.0)));
  const std::string csv = format_epochs_csv(epochs);
  CHECK(csv.rfind("index,start_t,state,threshold,n_below,n_zero\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("config validation") {
  ThresholdConfig c;
  CHECK_NOTHROW(c.validate());
  c.epoch_len = 0;
  CHECK_THROWS_KIND(c.validate(), InvalidArgument);
}
