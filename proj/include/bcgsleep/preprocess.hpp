#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bcgsleep/record.hpp"

namespace bcgsleep {

/// A per-second value, or nullopt for a hole (no sample that second).
using MaybeValue = std::optional<double>;

/// Fills each hole with the nearest previous present value; holes before
/// the first present value take the first present value. Present values
/// are never changed. Throws AllMissing when nothing is present.
std::vector<double> impute_missing(std::span<const MaybeValue> series);

/// Heart rate per second over [0, last t]. Gap seconds are holes; zero
/// readings stay exactly zero.
std::vector<MaybeValue> raw_hr_series(const NightRecord& record);

/// One sample per second over [0, last t] with every hole imputed.
/// A zero heart rate makes the whole second a hole; a zero in any other
/// signal makes only that signal a hole. Labels and metadata carry over.
NightRecord clean_for_features(const NightRecord& record);

}  // namespace bcgsleep
