#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"
#include "rset/dataset/embeddings.hpp"
#include "rset/decouple/dense_net.hpp"
#include "rset/decouple/grad_check.hpp"

namespace rset {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

/// Paired speaker / emotion embeddings, one sample per row.
struct PairBatch {
  Eigen::MatrixXd speakers;  // N x s
  Eigen::MatrixXd emotions;  // N x e

  std::size_t size() const noexcept { return static_cast<std::size_t>(speakers.rows()); }
};

struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_var;  // clamped to [kLogVarMin, kLogVarMax]
};

/// Diagonal Gaussian q(e | s) whose mean and log-variance come from a
/// DenseNet s -> 2e (first e outputs: mean, last e: log-variance).
class VClubModel {
 public:
  VClubModel() = default;
  /// Throws Error(Shape) unless net.output_dim() == 2 * emotion_dim.
  VClubModel(DenseNet net, std::size_t emotion_dim);

  /// One tanh hidden layer of width `hidden`.
  static VClubModel create(std::size_t speaker_dim, std::size_t emotion_dim, std::size_t hidden,
                           std::uint64_t seed);

  std::size_t speaker_dim() const noexcept { return net_.input_dim(); }
  std::size_t emotion_dim() const noexcept { return emotion_dim_; }
  const DenseNet& net() const noexcept { return net_; }
  DenseNet& net() noexcept { return net_; }

  GaussianParams conditional(const Eigen::VectorXd& speaker) const;

  json to_json() const;
  static VClubModel from_json(const json& j);

 private:
  DenseNet net_;
  std::size_t emotion_dim_ = 0;
};

/// log q(i_e | i_s). Throws Error(Shape) on a dimension mismatch.
double qtheta_logprob(const VClubModel& model, const SpeakerEmbedding& i_s,
                      const EmotionEmbedding& i_e);

/// Mean log-likelihood of matched pairs and its gradient w.r.t. the net
/// parameters (ascent direction).
LossWithGradient mean_logprob_with_gradient(const VClubModel& model, const PairBatch& batch);

struct VClubTrainOptions {
  int epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 5e-3;
  std::uint64_t seed = 0;
};

struct VClubTrainResult {
  VClubModel model;
  /// Mean log-likelihood over the full data after each epoch.
  std::vector<double> epoch_logprob;
};

/// Maximum likelihood fit of q by minibatch Adam. Throws Error(Numerical)
/// on a non-finite objective.
VClubTrainResult train_variational(const VClubModel& init, const PairBatch& data,
                                   const VClubTrainOptions& opts = {});

/// Sample vCLUB estimate over N >= 2 pairs:
///   (1/N^2) sum_n sum_k [log q(e_n | s_n) - log q(e_k | s_n)].
double mi_loss(const VClubModel& model, const PairBatch& batch);

}  // namespace rset
