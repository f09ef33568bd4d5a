#include "rset/dataset/emotion.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "rset/common/error.hpp"

namespace rset {

std::string_view to_string(Emotion e) noexcept {
  switch (e) {
    case Emotion::Neutral: return "neutral";
    case Emotion::Angry: return "angry";
    case Emotion::Happy: return "happy";
    case Emotion::Sad: return "sad";
    case Emotion::Surprise: return "surprise";
  }
  return "neutral";
}

Emotion parse_emotion(std::string_view label) {
  std::string lower(label);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const Emotion e : kAllEmotions)
    if (to_string(e) == lower) return e;
  fail(ErrorKind::Parse, "unknown emotion label '" + std::string(label) + "'");
}

}  // namespace rset
