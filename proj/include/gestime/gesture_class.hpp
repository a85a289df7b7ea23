#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gestime/error.hpp"

namespace gestime {

// Frame-level gesture timing class. The numeric order doubles as the
// argmax tie-break order.
enum class GestureClass : std::uint8_t {
  NoGesture = 0,
  Beat = 1,
  IdeationalOther = 2,
  IdeationalStroke = 3,
  Suffix = 4,
};

inline constexpr std::size_t kNumClasses = 5;
// The four classes that carry meaning; Suffix only pads.
inline constexpr std::size_t kNumRealClasses = 4;

inline constexpr std::array<GestureClass, kNumClasses> kAllClasses = {
    GestureClass::NoGesture, GestureClass::Beat, GestureClass::IdeationalOther,
    GestureClass::IdeationalStroke, GestureClass::Suffix};

inline constexpr std::size_t index_of(GestureClass c) {
  return static_cast<std::size_t>(c);
}

inline constexpr GestureClass class_at(std::size_t i) {
  return kAllClasses.at(i);
}

inline constexpr std::string_view class_name(GestureClass c) {
  constexpr std::array<std::string_view, kNumClasses> names = {
      "NoGesture", "Beat", "IdeationalOther", "IdeationalStroke", "Suffix"};
  return names[index_of(c)];
}

inline std::optional<GestureClass> parse_class(std::string_view s) {
  for (GestureClass c : kAllClasses) {
    if (class_name(c) == s) return c;
  }
  return std::nullopt;
}

using LabelSequence = std::vector<GestureClass>;

using ClassCounts = std::array<std::int64_t, kNumClasses>;

}  // namespace gestime
