#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rset/dataset/corpus.hpp"

namespace rset {

struct IndexPair {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// O: (non-neutral, neutral) ordered pairs. M: same-label pairs, neutral
/// pairs included.
struct PairSet {
  std::vector<IndexPair> ordered;
  std::vector<IndexPair> similar;

  bool empty() const noexcept { return ordered.empty() && similar.empty(); }
  friend bool operator==(const PairSet&, const PairSet&) = default;
};

enum class PairMode {
  Auto,        // exhaustive up to exhaustive_limit utterances, sampled above
  Exhaustive,
  Sampled,
};

struct PairSamplingConfig {
  PairMode mode = PairMode::Auto;
  std::size_t exhaustive_limit = 2000;
  std::size_t max_pairs_per_set = 100000;
  std::uint64_t seed = 0;
  /// Restrict O to focus-vs-neutral and M to focus and neutral pairs.
  std::optional<Emotion> focus;
};

/// Throws Error(InvalidArgument) when the corpus lacks neutral or
/// non-neutral samples (after applying `focus`).
PairSet build_pair_sets(const Corpus& corpus, const PairSamplingConfig& config);

}  // namespace rset
