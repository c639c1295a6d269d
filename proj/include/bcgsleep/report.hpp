#pragma once

#include <span>
#include <string>

#include "bcgsleep/eval.hpp"
#include "bcgsleep/preprocess.hpp"
#include "bcgsleep/sleepwake.hpp"

namespace bcgsleep {

// Static SVG renderings. Output depends only on the inputs, so identical
// inputs give byte-identical files.

/// Reference hypnogram above, predicted hypnogram below.
std::string render_hypnogram_pair_svg(std::span<const SecondLabel> reference, std::span<const Stage> predicted,
                                      const std::string& title);

/// Heat map, rows = predicted, columns = reference.
std::string render_confusion_svg(const ConfusionMatrix& cm, const std::string& title);

/// Side-by-side box plots of per-night efficiency (BCG vs reference).
std::string render_efficiency_box_svg(const EfficiencySummary& summary);

/// Raw heart rate against the per-epoch threshold over [from_t, to_t).
std::string render_threshold_trace_svg(std::span<const MaybeValue> raw_hr, std::span<const SleepWakeEpoch> epochs,
                                       Seconds from_t, Seconds to_t);

}  // namespace bcgsleep
