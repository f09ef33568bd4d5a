#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rset/common/serialize.hpp"
#include "rset/dataset/embeddings.hpp"
#include "rset/dataset/emotion.hpp"
#include "rset/remap/remap.hpp"

namespace rset {

inline constexpr double kIntensityFloor = 1e-3;
inline constexpr std::size_t kDefaultTopK = 8;

struct PoolEntry {
  double intensity = 0.5;
  EmotionEmbedding embedding;
  std::string utterance_id;
};

/// Per-class candidate lists, each sorted ascending by intensity.
class CandidatePool {
 public:
  CandidatePool() = default;
  /// Sorts each list (stable) and validates intensities and dimensions.
  explicit CandidatePool(std::map<Emotion, std::vector<PoolEntry>> classes);

  const std::map<Emotion, std::vector<PoolEntry>>& classes() const noexcept { return classes_; }
  /// Throws Error(InvalidArgument) for a class absent from the pool.
  const std::vector<PoolEntry>& entries(Emotion e) const;
  std::size_t embedding_dim() const noexcept { return dim_; }
  std::size_t size() const noexcept;

  /// {"<class>": [{"intensity", "embedding", "utterance_id"}, ...]}
  json to_json() const;
  static CandidatePool from_json(const json& j);

 private:
  std::map<Emotion, std::vector<PoolEntry>> classes_;
  std::size_t dim_ = 0;
};

struct EmbeddingRecord {
  std::string utterance_id;
  Emotion emotion = Emotion::Angry;
  EmotionEmbedding embedding;
};

/// Attach remapped intensities to embeddings. Throws Error(InvalidArgument)
/// when an embedding has no remapped row or its class disagrees.
CandidatePool build_pool(std::span<const EmbeddingRecord> embeddings, const IntensityTable& table);

/// clamp(alpha * y_pred, eps, 1 - eps) with eps = kIntensityFloor.
double adjust_intensity(double y_pred, double alpha);

struct CandidateSelection {
  std::vector<EmotionEmbedding> keys;
  std::vector<EmotionEmbedding> values;
  std::vector<double> intensities;
  std::vector<std::string> utterance_ids;
};

/// The top_k entries nearest `target` (ties toward lower intensity),
/// ordered by increasing distance. top_k is capped at the class size.
CandidateSelection select_candidates(const CandidatePool& pool, Emotion emotion, double target,
                                     std::size_t top_k = kDefaultTopK);

}  // namespace rset
