#pragma once

#include <cstdint>
#include <random>

#include "rset/dataset/embeddings.hpp"

namespace rset {

struct BetaShape {
  double a = 1.0;
  double b = 1.0;
};

/// Seeded stream of Beta(a, b) draws (ratio of two gamma variates).
class BetaSampler {
 public:
  /// Throws Error(InvalidArgument) unless a, b > 0.
  BetaSampler(BetaShape shape, std::uint64_t seed);

  double next();

 private:
  std::mt19937_64 rng_;
  std::gamma_distribution<double> ga_, gb_;
};

/// First draw of BetaSampler(shape, seed); lies in [0, 1].
double sample_lambda(BetaShape shape, std::uint64_t seed);

/// lambda * first + (1 - lambda) * second.
EmotionEmbedding mix_emotions(const EmotionEmbedding& first, const EmotionEmbedding& second,
                              double lambda);

}  // namespace rset
