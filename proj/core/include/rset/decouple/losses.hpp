#pragma once

#include <span>

#include <Eigen/Core>

#include "rset/dataset/embeddings.hpp"

namespace rset {

struct LossWeights {
  double alpha1 = 0.1;  // mutual information
  double alpha2 = 0.1;  // speaker consistency
};

/// Mean squared L2 distance between matched speaker representations.
double speaker_consistency_loss(std::span<const SpeakerEmbedding> predicted,
                                std::span<const SpeakerEmbedding> reference);

/// Mean absolute elementwise difference.
double recon_loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target);

/// recon + alpha1 * mi + alpha2 * spcon. Rejects non-finite inputs and
/// negative weights.
double total_loss(double l_recon, double l_mi, double l_spcon, const LossWeights& weights = {});

}  // namespace rset
