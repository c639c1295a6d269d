#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace bcgsleep {

/// The four-stage sleep vocabulary, in hypnogram order (shallowest first).
enum class Stage : int { Wake = 0, Rem = 1, Light = 2, Deep = 3 };

inline constexpr int kStageCount = 4;
inline constexpr std::array<Stage, kStageCount> kAllStages{Stage::Wake, Stage::Rem, Stage::Light,
                                                          Stage::Deep};

constexpr int stage_code(Stage stage) noexcept { return static_cast<int>(stage); }

/// Throws Error(InvalidStageCode) outside 0..3.
Stage stage_from_code(int code);

/// Lower-case name: "wake", "rem", "light", "deep".
std::string_view stage_name(Stage stage) noexcept;

/// Case-insensitive inverse of stage_name; nullopt for anything else.
std::optional<Stage> stage_from_name(std::string_view name) noexcept;

/// Per-second label: a stage, or nullopt where no reference interval applies.
using SecondLabel = std::optional<Stage>;

}  // namespace bcgsleep
