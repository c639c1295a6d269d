#include "bcgsleep/stage.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "bcgsleep/error.hpp"

namespace bcgsleep {

Stage stage_from_code(int code) {
  if (code < 0 || code >= kStageCount) {
    throw Error(ErrorKind::InvalidStageCode, "stage code " + std::to_string(code) + " is outside 0..3");
  }
  return static_cast<Stage>(code);
}

std::string_view stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::Wake: return "wake";
    case Stage::Rem: return "rem";
    case Stage::Light: return "light";
    case Stage::Deep: return "deep";
  }
  return "wake";
}

std::optional<Stage> stage_from_name(std::string_view name) noexcept {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Stage s : kAllStages) {
    if (stage_name(s) == lowered) return s;
  }
  return std::nullopt;
}

}  // namespace bcgsleep
