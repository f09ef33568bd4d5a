#pragma once

#include <array>
#include <string_view>

namespace rset {

enum class Emotion { Neutral, Angry, Happy, Sad, Surprise };

inline constexpr std::array<Emotion, 5> kAllEmotions = {
    Emotion::Neutral, Emotion::Angry, Emotion::Happy, Emotion::Sad, Emotion::Surprise};

/// Lower-case canonical label ("neutral", "angry", ...).
std::string_view to_string(Emotion e) noexcept;

/// Case-insensitive. Throws Error(Parse) on an unknown label.
Emotion parse_emotion(std::string_view label);

constexpr bool is_neutral(Emotion e) noexcept { return e == Emotion::Neutral; }

}  // namespace rset
