#pragma once

// Built-in reward models for the two shipped experiment settings.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pagame/core.hpp"

namespace pagame {

struct Preset {
  std::string name;
  RewardModel model;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"table1_n5", {{14, -24, -4, 19, 29}, {29, 1, 14, 26, 15}}},
      {"table1_n10",
       {{-4, 8, 22, -12, -2, 46, -8, 16, 38, 14}, {0, 44, 51, 65, 9, 35, 69, 91, 51, 44}}},
  };
  return table;
}

inline std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  return std::nullopt;
}

/// Preset whose arm count matches n, if there is one.
inline std::optional<Preset> preset_for_arms(std::size_t n) {
  for (const auto& p : presets())
    if (p.model.r0.size() == n) return p;
  return std::nullopt;
}

}  // namespace pagame
