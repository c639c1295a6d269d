#include "bcgsleep/preprocess.hpp"

#include <algorithm>

#include "bcgsleep/error.hpp"

namespace bcgsleep {

std::vector<double> impute_missing(std::span<const MaybeValue> series) {
  const auto first = std::find_if(series.begin(), series.end(),
                                  [](const MaybeValue& v) { return v.has_value(); });
  if (first == series.end()) throw Error(ErrorKind::AllMissing, "series has no present value");
  std::vector<double> out;
  out.reserve(series.size());
  double last = **first;
  for (const auto& v : series) {
    if (v) last = *v;
    out.push_back(last);
  }
  return out;
}

std::vector<MaybeValue> raw_hr_series(const NightRecord& record) {
  std::vector<MaybeValue> hr(static_cast<std::size_t>(record.length()));
  for (const auto& s : record.samples()) hr[static_cast<std::size_t>(s.t)] = s.hr;
  return hr;
}

NightRecord clean_for_features(const NightRecord& record) {
  const auto length = static_cast<std::size_t>(record.length());
  if (length == 0) throw Error(ErrorKind::AllMissing, "record has no samples");

  std::vector<VitalsSample> out(length);
  for (std::size_t t = 0; t < length; ++t) out[t].t = static_cast<Seconds>(t);

  std::vector<MaybeValue> column(length);
  for (Signal sig : kAllSignals) {
    std::fill(column.begin(), column.end(), std::nullopt);
    for (const auto& s : record.samples()) {
      const double v = signal_value(s, sig);
      if (!s.motion_invalid() && v != 0.0) column[static_cast<std::size_t>(s.t)] = v;
    }
    std::vector<double> filled;
    try {
      filled = impute_missing(column);
    } catch (const Error&) {
      throw Error(ErrorKind::AllMissing,
                  "no valid " + std::string(signal_name(sig)) + " sample in night '" +
                      record.meta().night_id + "'");
    }
    for (std::size_t t = 0; t < length; ++t) set_signal_value(out[t], sig, filled[t]);
  }
  return NightRecord::make(record.meta(), std::move(out), record.labels());
}

}  // namespace bcgsleep
