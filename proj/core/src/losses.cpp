#include "rset/decouple/losses.hpp"

#include <cmath>

#include "rset/common/error.hpp"

namespace rset {

double speaker_consistency_loss(std::span<const SpeakerEmbedding> predicted,
                                std::span<const SpeakerEmbedding> reference) {
  require(predicted.size() == reference.size(), ErrorKind::Shape,
          "speaker_consistency_loss: list lengths differ");
  require(!predicted.empty(), ErrorKind::InvalidArgument, "speaker_consistency_loss: empty lists");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    require(predicted[i].values.size() == reference[i].values.size(), ErrorKind::Shape,
            "speaker_consistency_loss: dimension mismatch at index " + std::to_string(i));
    acc += (predicted[i].values - reference[i].values).squaredNorm();
  }
  return acc / static_cast<double>(predicted.size());
}

double recon_loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target) {
  require(predicted.rows() == target.rows() && predicted.cols() == target.cols(), ErrorKind::Shape,
          "recon_loss: shape mismatch");
  require(predicted.size() > 0, ErrorKind::InvalidArgument, "recon_loss: empty matrices");
  return (predicted - target).cwiseAbs().mean();
}

double total_loss(double l_recon, double l_mi, double l_spcon, const LossWeights& weights) {
  require(std::isfinite(l_recon) && std::isfinite(l_mi) && std::isfinite(l_spcon), ErrorKind::Numerical,
          "total_loss: non-finite component");
  require(weights.alpha1 >= 0.0 && weights.alpha2 >= 0.0 && std::isfinite(weights.alpha1) &&
              std::isfinite(weights.alpha2),
          ErrorKind::InvalidArgument, "total_loss: weights must be finite and non-negative");
  return l_recon + weights.alpha1 * l_mi + weights.alpha2 * l_spcon;
}

}  // namespace rset
