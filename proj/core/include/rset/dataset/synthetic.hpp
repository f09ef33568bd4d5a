#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rset/dataset/corpus.hpp"

namespace rset {

/// Synthetic corpus recipe. Features are `direction * latent + noise`.
///
/// Neutral latents are uniform on [-spread/2, spread/2]; class k latents are
/// uniform on [spread/2 + margin + offset_k, that + spread], so every
/// (non-neutral, neutral) latent gap is at least `margin`.
struct SyntheticSpec {
  std::vector<Emotion> classes = {Emotion::Angry, Emotion::Happy, Emotion::Sad,
                                  Emotion::Surprise};
  std::size_t per_class = 50;
  std::size_t neutral_count = 50;
  std::size_t feature_dim = 16;
  std::size_t num_speakers = 10;
  double margin = 1.0;
  double intra_spread = 0.01;
  /// Extra offset per class (cycled when shorter than `classes`).
  std::vector<double> class_offsets = {0.0, 0.5, 1.0, 1.5};
  double noise = 0.0;
  /// Unit-normalized when drawn; used verbatim when supplied.
  std::optional<Eigen::VectorXd> direction;
  /// Overrides the drawn latents (and count) of the given classes.
  std::map<Emotion, std::vector<double>> fixed_latents;
};

/// Deterministic per (spec, seed). Throws Error(InvalidArgument) on zero
/// counts or dimension.
Corpus synth_corpus(const SyntheticSpec& spec, std::uint64_t seed);

/// The direction synth_corpus uses for (spec, seed).
Eigen::VectorXd synthetic_direction(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace rset
