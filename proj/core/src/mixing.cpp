#include "rset/controller/mixing.hpp"

#include <cmath>

#include "rset/common/error.hpp"

namespace rset {

BetaSampler::BetaSampler(BetaShape shape, std::uint64_t seed)
    : rng_(seed),
      ga_((shape.a > 0.0 && std::isfinite(shape.a)) ? shape.a : 1.0, 1.0),
      gb_((shape.b > 0.0 && std::isfinite(shape.b)) ? shape.b : 1.0, 1.0) {
  require(shape.a > 0.0 && shape.b > 0.0 && std::isfinite(shape.a) && std::isfinite(shape.b),
          ErrorKind::InvalidArgument, "beta shape parameters must be positive");
}

double BetaSampler::next() {
  while (true) {
    const double x = ga_(rng_);
    const double y = gb_(rng_);
    if (x + y > 0.0) return x / (x + y);
  }
}

double sample_lambda(BetaShape shape, std::uint64_t seed) { return BetaSampler(shape, seed).next(); }

EmotionEmbedding mix_emotions(const EmotionEmbedding& first, const EmotionEmbedding& second,
                              double lambda) {
  require(first.values.size() == second.values.size(), ErrorKind::Shape,
          "mix_emotions: embedding dimensions differ");
  require(lambda >= 0.0 && lambda <= 1.0, ErrorKind::InvalidArgument,
          "mix_emotions: lambda must lie in [0, 1]");
  return {lambda * first.values + (1.0 - lambda) * second.values};
}

}  // namespace rset
