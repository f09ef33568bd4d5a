#include "rset/decouple/vclub.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/common/optim.hpp"

namespace rset {
namespace {

/// Scalar loop so that equal inputs give bitwise equal results regardless
/// of where the operands live.
double gaussian_logpdf(const double* x, const double* mean, const double* log_var, Eigen::Index dim) {
  double acc = 0.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double diff = x[d] - mean[d];
    acc += kLog2Pi + log_var[d] + diff * diff * std::exp(-log_var[d]);
  }
  return -0.5 * acc;
}

void check_batch(const VClubModel& model, const PairBatch& batch) {
  require(batch.speakers.rows() == batch.emotions.rows(), ErrorKind::Shape,
          "pair batch: speaker and emotion row counts differ");
  require(static_cast<std::size_t>(batch.speakers.cols()) == model.speaker_dim() &&
              static_cast<std::size_t>(batch.emotions.cols()) == model.emotion_dim(),
          ErrorKind::Shape, "pair batch dimensions do not match the vCLUB model");
}

/// Rows: means (N x e) and clamped log-variances (N x e).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_output(const Eigen::MatrixXd& out, Eigen::Index e) {
  Eigen::MatrixXd mean = out.leftCols(e);
  Eigen::MatrixXd log_var = out.rightCols(e).cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
  return {std::move(mean), std::move(log_var)};
}

}  // namespace

VClubModel::VClubModel(DenseNet net, std::size_t emotion_dim)
    : net_(std::move(net)), emotion_dim_(emotion_dim) {
  require(emotion_dim_ > 0 && net_.output_dim() == 2 * emotion_dim_, ErrorKind::Shape,
          "vCLUB net must output 2 * emotion_dim values");
}

VClubModel VClubModel::create(std::size_t speaker_dim, std::size_t emotion_dim, std::size_t hidden,
                              std::uint64_t seed) {
  const std::size_t dims[] = {speaker_dim, hidden, 2 * emotion_dim};
  return VClubModel(DenseNet::random(dims, Activation::Tanh, Activation::Identity, seed), emotion_dim);
}

GaussianParams VClubModel::conditional(const Eigen::VectorXd& speaker) const {
  require(static_cast<std::size_t>(speaker.size()) == speaker_dim(), ErrorKind::Shape,
          "speaker embedding has dimension " + std::to_string(speaker.size()) + ", expected " +
              std::to_string(speaker_dim()));
  const auto [mean, log_var] =
      split_output(net_.forward(speaker.transpose()), static_cast<Eigen::Index>(emotion_dim_));
  return {mean.row(0).transpose(), log_var.row(0).transpose()};
}

json VClubModel::to_json() const {
  return json{{"emotion_dim", emotion_dim_}, {"speaker_dim", speaker_dim()}, {"net", net_.to_json()}};
}

VClubModel VClubModel::from_json(const json& j) {
  require(j.is_object() && j.contains("emotion_dim") && j.contains("net"), ErrorKind::Parse,
          "vCLUB model: expected {emotion_dim, net}");
  return VClubModel(DenseNet::from_json(j.at("net")), j.at("emotion_dim").get<std::size_t>());
}

double qtheta_logprob(const VClubModel& model, const SpeakerEmbedding& i_s, const EmotionEmbedding& i_e) {
  require(static_cast<std::size_t>(i_e.values.size()) == model.emotion_dim(), ErrorKind::Shape,
          "emotion embedding has dimension " + std::to_string(i_e.values.size()) + ", expected " +
              std::to_string(model.emotion_dim()));
  const auto p = model.conditional(i_s.values);
  return gaussian_logpdf(i_e.values.data(), p.mean.data(), p.log_var.data(), p.mean.size());
}

LossWithGradient mean_logprob_with_gradient(const VClubModel& model, const PairBatch& batch) {
  check_batch(model, batch);
  require(batch.size() > 0, ErrorKind::InvalidArgument, "empty pair batch");
  const auto e = static_cast<Eigen::Index>(model.emotion_dim());
  const double n = static_cast<double>(batch.size());

  DenseNet::Tape tape;
  const Eigen::MatrixXd out = model.net().forward(batch.speakers, tape);
  const auto [mean, log_var] = split_output(out, e);
  const Eigen::ArrayXXd inv_var = (-log_var.array()).exp();
  const Eigen::ArrayXXd diff = batch.emotions.array() - mean.array();

  LossWithGradient result;
  result.value = (-0.5 * (kLog2Pi + log_var.array() + diff.square() * inv_var)).sum() / n;

  Eigen::MatrixXd grad_out(out.rows(), out.cols());
  grad_out.leftCols(e) = (diff * inv_var / n).matrix();
  const Eigen::ArrayXXd raw_lv = out.rightCols(e).array();
  const Eigen::ArrayXXd inside = ((raw_lv >= kLogVarMin) && (raw_lv <= kLogVarMax)).cast<double>();
  grad_out.rightCols(e) = ((-0.5 + 0.5 * diff.square() * inv_var) * inside / n).matrix();

  result.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.net().parameter_count()));
  model.net().backward(tape, grad_out, result.gradient);
  return result;
}

VClubTrainResult train_variational(const VClubModel& init, const PairBatch& data,
                                   const VClubTrainOptions& opts) {
  check_batch(init, data);
  require(data.size() > 0, ErrorKind::InvalidArgument, "train_variational: no training pairs");
  require(opts.epochs >= 1 && opts.batch_size >= 1 && opts.learning_rate > 0.0,
          ErrorKind::InvalidArgument, "train_variational: invalid options");

  VClubTrainResult result{init, {}};
  auto& model = result.model;
  Eigen::VectorXd params = model.net().parameters();
  Adam adam(static_cast<std::size_t>(params.size()), opts.learning_rate);
  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::Index> order(data.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const std::size_t stop = std::min(order.size(), start + opts.batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      const PairBatch mini{data.speakers(idx, Eigen::all), data.emotions(idx, Eigen::all)};
      const auto lg = mean_logprob_with_gradient(model, mini);
      require(std::isfinite(lg.value), ErrorKind::Numerical,
              "train_variational: non-finite log-likelihood at epoch " + std::to_string(epoch));
      adam.step(params, -lg.gradient);
      model.net().set_parameters(params);
    }
    const double full = mean_logprob_with_gradient(model, data).value;
    require(std::isfinite(full), ErrorKind::Numerical,
            "train_variational: non-finite log-likelihood at epoch " + std::to_string(epoch));
    result.epoch_logprob.push_back(full);
  }
  return result;
}

double mi_loss(const VClubModel& model, const PairBatch& batch) {
  check_batch(model, batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  require(n >= 2, ErrorKind::InvalidArgument, "mi_loss needs a batch of at least 2 pairs");
  const auto e = static_cast<Eigen::Index>(model.emotion_dim());

  const auto [mean, log_var] = split_output(model.net().forward(batch.speakers), e);
  // Row-major copies so each sample's parameters are contiguous.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor mu = mean, lv = log_var, x = batch.emotions;

  // q(k | n): log-density of emotion k under the conditional of speaker n.
  RowMajor q(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index k = 0; k < n; ++k) q(s, k) = gaussian_logpdf(&x(k, 0), &mu(s, 0), &lv(s, 0), e);

  // Summing (n, k) together with (k, n) makes the estimate exactly zero
  // whenever q does not depend on the speaker.
  double total = 0.0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      total += (q(a, a) - q(a, b)) + (q(b, b) - q(b, a));
  return total / static_cast<double>(n * n);
}

}  // namespace rset
