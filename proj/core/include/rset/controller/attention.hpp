#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"
#include "rset/dataset/embeddings.hpp"
#include "rset/decouple/grad_check.hpp"

namespace rset {

/// Affine map from speaker space (s) into key space (e).
struct QueryProjection {
  Eigen::MatrixXd weight;  // e x s
  Eigen::VectorXd bias;    // e

  static QueryProjection identity(std::size_t dim);
  static QueryProjection random(std::size_t speaker_dim, std::size_t key_dim, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weight.cols()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(weight.rows()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& speaker) const;

  Eigen::VectorXd parameters() const;  // column-major weight, then bias
  void set_parameters(const Eigen::VectorXd& flat);

  json to_json() const;
  static QueryProjection from_json(const json& j);
};

struct FusionResult {
  EmotionEmbedding embedding;
  Eigen::VectorXd weights;  // attention weights, sum to 1
};

/// Scaled dot-product attention: softmax(q'k_i / sqrt(e)) over keys, then
/// the weighted sum of values. Throws Error(InvalidArgument) on empty keys
/// and Error(Shape) on mismatched lengths or dimensions.
FusionResult fuse(const SpeakerEmbedding& query, std::span<const EmotionEmbedding> keys,
                  std::span<const EmotionEmbedding> values, const QueryProjection& projection);

/// Identity projection; requires the query to already have the key dimension.
FusionResult fuse(const SpeakerEmbedding& query, std::span<const EmotionEmbedding> keys,
                  std::span<const EmotionEmbedding> values);

struct FusionSample {
  SpeakerEmbedding query;
  std::vector<EmotionEmbedding> keys;
  std::vector<EmotionEmbedding> values;
  EmotionEmbedding target;
};

/// Mean squared distance between fused output and target, with the gradient
/// with respect to the projection parameters.
LossWithGradient fusion_loss(const QueryProjection& projection, std::span<const FusionSample> samples);

struct ProjectionTrainOptions {
  int epochs = 100;
  double learning_rate = 1e-2;
};

/// Full-batch Adam on fusion_loss. Returns the fitted projection.
QueryProjection train_query_projection(QueryProjection init, std::span<const FusionSample> samples,
                                       const ProjectionTrainOptions& opts = {});

}  // namespace rset
