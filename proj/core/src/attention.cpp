#include "rset/controller/attention.hpp"

#include <cmath>
#include <random>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/common/optim.hpp"

namespace rset {
namespace {

void check_candidates(std::span<const EmotionEmbedding> keys, std::span<const EmotionEmbedding> values,
                      Eigen::Index query_dim) {
  require(!keys.empty(), ErrorKind::InvalidArgument, "fuse: no keys");
  require(keys.size() == values.size(), ErrorKind::Shape, "fuse: keys and values differ in length");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    require(keys[i].values.size() == query_dim, ErrorKind::Shape,
            "fuse: key " + std::to_string(i) + " has dimension " + std::to_string(keys[i].values.size()) +
                ", query has " + std::to_string(query_dim));
    require(values[i].values.size() == values[0].values.size(), ErrorKind::Shape,
            "fuse: values differ in dimension");
  }
}

FusionResult attend(const Eigen::VectorXd& q, std::span<const EmotionEmbedding> keys,
                    std::span<const EmotionEmbedding> values) {
  check_candidates(keys, values, q.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.size()));
  Eigen::VectorXd scores(static_cast<Eigen::Index>(keys.size()));
  for (std::size_t i = 0; i < keys.size(); ++i)
    scores[static_cast<Eigen::Index>(i)] = q.dot(keys[i].values) * scale;
  FusionResult out{{Eigen::VectorXd::Zero(values[0].values.size())}, softmax(scores)};
  for (std::size_t i = 0; i < values.size(); ++i)
    out.embedding.values += out.weights[static_cast<Eigen::Index>(i)] * values[i].values;
  return out;
}

}  // namespace

QueryProjection QueryProjection::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
}

QueryProjection QueryProjection::random(std::size_t speaker_dim, std::size_t key_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(speaker_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  QueryProjection p{Eigen::MatrixXd(static_cast<Eigen::Index>(key_dim), static_cast<Eigen::Index>(speaker_dim)),
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(key_dim))};
  for (Eigen::Index c = 0; c < p.weight.cols(); ++c)
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r) p.weight(r, c) = dist(rng);
  return p;
}

Eigen::VectorXd QueryProjection::apply(const Eigen::VectorXd& speaker) const {
  require(speaker.size() == weight.cols(), ErrorKind::Shape,
          "query projection expects dimension " + std::to_string(weight.cols()) + ", got " +
              std::to_string(speaker.size()));
  return weight * speaker + bias;
}

Eigen::VectorXd QueryProjection::parameters() const {
  Eigen::VectorXd flat(weight.size() + bias.size());
  flat << Eigen::Map<const Eigen::VectorXd>(weight.data(), weight.size()), bias;
  return flat;
}

void QueryProjection::set_parameters(const Eigen::VectorXd& flat) {
  require(flat.size() == weight.size() + bias.size(), ErrorKind::Shape,
          "QueryProjection::set_parameters: wrong length");
  Eigen::Map<Eigen::VectorXd>(weight.data(), weight.size()) = flat.head(weight.size());
  bias = flat.tail(bias.size());
}

json QueryProjection::to_json() const {
  return json{{"weight", matrix_to_json(weight)}, {"bias", vector_to_json(bias)}};
}

QueryProjection QueryProjection::from_json(const json& j) {
  QueryProjection p{matrix_from_json(j.at("weight"), "projection weight"),
                    vector_from_json(j.at("bias"), "projection bias")};
  require(p.bias.size() == p.weight.rows(), ErrorKind::Parse, "projection: bias length mismatch");
  return p;
}

FusionResult fuse(const SpeakerEmbedding& query, std::span<const EmotionEmbedding> keys,
                  std::span<const EmotionEmbedding> values, const QueryProjection& projection) {
  return attend(projection.apply(query.values), keys, values);
}

FusionResult fuse(const SpeakerEmbedding& query, std::span<const EmotionEmbedding> keys,
                  std::span<const EmotionEmbedding> values) {
  return attend(query.values, keys, values);
}

LossWithGradient fusion_loss(const QueryProjection& projection, std::span<const FusionSample> samples) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "fusion_loss: no samples");
  const double n = static_cast<double>(samples.size());
  const auto e = projection.weight.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(e));
  LossWithGradient out{0.0, Eigen::VectorXd::Zero(projection.weight.size() + e)};
  Eigen::Map<Eigen::MatrixXd> grad_w(out.gradient.data(), e, projection.weight.cols());
  for (const auto& s : samples) {
    const Eigen::VectorXd q = projection.apply(s.query.values);
    const auto fused = attend(q, s.keys, s.values);
    const Eigen::VectorXd diff = fused.embedding.values - s.target.values;
    out.value += diff.squaredNorm();

    const Eigen::VectorXd grad_out = 2.0 * diff / n;
    const auto m = static_cast<Eigen::Index>(s.keys.size());
    Eigen::VectorXd grad_weights(m);
    for (Eigen::Index i = 0; i < m; ++i) grad_weights[i] = grad_out.dot(s.values[static_cast<std::size_t>(i)].values);
    const Eigen::VectorXd grad_scores =
        fused.weights.cwiseProduct(grad_weights -
                                   Eigen::VectorXd::Constant(m, fused.weights.dot(grad_weights)));
    Eigen::VectorXd grad_q = Eigen::VectorXd::Zero(e);
    for (Eigen::Index i = 0; i < m; ++i) grad_q += grad_scores[i] * scale * s.keys[static_cast<std::size_t>(i)].values;
    grad_w.noalias() += grad_q * s.query.values.transpose();
    out.gradient.tail(e) += grad_q;
  }
  out.value /= n;
  return out;
}

QueryProjection train_query_projection(QueryProjection init, std::span<const FusionSample> samples,
                                       const ProjectionTrainOptions& opts) {
  require(opts.epochs >= 0 && opts.learning_rate > 0.0, ErrorKind::InvalidArgument,
          "train_query_projection: invalid options");
  Eigen::VectorXd params = init.parameters();
  Adam adam(static_cast<std::size_t>(params.size()), opts.learning_rate);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const auto lg = fusion_loss(init, samples);
    require(std::isfinite(lg.value), ErrorKind::Numerical,
            "train_query_projection: non-finite loss at epoch " + std::to_string(epoch));
    adam.step(params, lg.gradient);
    init.set_parameters(params);
  }
  return init;
}

}  // namespace rset
