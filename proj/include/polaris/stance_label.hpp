#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace polaris {

// Discrete stance of a single submission.
enum class Stance : std::uint8_t { Pro = 0, Anti = 1, Neutral = 2 };

inline constexpr int kNumStances = 3;

// Accepts pro / anti / neither / neutral, case-insensitively.
inline std::optional<Stance> parse_stance(std::string_view token) {
  auto eq = [token](std::string_view word) {
    if (token.size() != word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      char c = token[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != word[i]) return false;
    }
    return true;
  };
  if (eq("pro")) return Stance::Pro;
  if (eq("anti")) return Stance::Anti;
  if (eq("neither") || eq("neutral")) return Stance::Neutral;
  return std::nullopt;
}

inline std::string_view stance_name(Stance s) {
  switch (s) {
    case Stance::Pro: return "pro";
    case Stance::Anti: return "anti";
    case Stance::Neutral: return "neutral";
  }
  return "neutral";
}

}  // namespace polaris
