#include "rset/controller/nlinear.hpp"

#include <cmath>
#include <random>

#include "rset/common/error.hpp"

namespace rset {

NLinear::NLinear(Eigen::MatrixXd weight, Eigen::VectorXd bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
  require(weight_.rows() > 0 && weight_.cols() > 0 && bias_.size() == weight_.rows(),
          ErrorKind::Shape, "NLinear: weight must be H x L with an H-vector bias");
}

NLinear NLinear::zeros(std::size_t window, std::size_t horizon) {
  return NLinear(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(window)),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(horizon)));
}

NLinear NLinear::identity(std::size_t window) {
  const auto l = static_cast<Eigen::Index>(window);
  return NLinear(Eigen::MatrixXd::Identity(l, l), Eigen::VectorXd::Zero(l));
}

NLinear NLinear::random(std::size_t window, std::size_t horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(window));
  std::uniform_real_distribution<double> dist(-bound, bound);
  NLinear layer = zeros(window, horizon);
  for (Eigen::Index c = 0; c < layer.weight_.cols(); ++c)
    for (Eigen::Index r = 0; r < layer.weight_.rows(); ++r) layer.weight_(r, c) = dist(rng);
  return layer;
}

std::size_t NLinear::parameter_count() const noexcept {
  return static_cast<std::size_t>(weight_.size() + bias_.size());
}

Eigen::VectorXd NLinear::parameters() const {
  Eigen::VectorXd flat(weight_.size() + bias_.size());
  flat.head(weight_.size()) = Eigen::Map<const Eigen::VectorXd>(weight_.data(), weight_.size());
  flat.tail(bias_.size()) = bias_;
  return flat;
}

void NLinear::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  require(static_cast<std::size_t>(flat.size()) == parameter_count(), ErrorKind::Shape,
          "NLinear::set_parameters: wrong length");
  Eigen::Map<Eigen::VectorXd>(weight_.data(), weight_.size()) = flat.head(weight_.size());
  bias_ = flat.tail(bias_.size());
}

Eigen::MatrixXd NLinear::forward(const Eigen::MatrixXd& sequence) const {
  require(sequence.rows() == weight_.cols(), ErrorKind::Shape,
          "NLinear expects a window of " + std::to_string(weight_.cols()) + " steps, got " +
              std::to_string(sequence.rows()));
  const Eigen::RowVectorXd last = sequence.row(sequence.rows() - 1);
  Eigen::MatrixXd out = weight_ * (sequence.rowwise() - last);
  out.colwise() += bias_;
  out.rowwise() += last;
  return out;
}

void NLinear::backward(const Eigen::MatrixXd& sequence, const Eigen::MatrixXd& grad_output,
                       Eigen::Ref<Eigen::VectorXd> param_grad) const {
  require(sequence.rows() == weight_.cols() && grad_output.rows() == weight_.rows() &&
              grad_output.cols() == sequence.cols(),
          ErrorKind::Shape, "NLinear::backward: shape mismatch");
  require(static_cast<std::size_t>(param_grad.size()) == parameter_count(), ErrorKind::Shape,
          "NLinear::backward: gradient buffer has the wrong size");
  const Eigen::RowVectorXd last = sequence.row(sequence.rows() - 1);
  Eigen::Map<Eigen::MatrixXd> dw(param_grad.data(), weight_.rows(), weight_.cols());
  dw.noalias() += grad_output * (sequence.rowwise() - last).transpose();
  param_grad.tail(bias_.size()) += grad_output.rowwise().sum();
}

json NLinear::to_json() const {
  return json{{"weight", matrix_to_json(weight_)}, {"bias", vector_to_json(bias_)}};
}

NLinear NLinear::from_json(const json& j) {
  require(j.is_object() && j.contains("weight") && j.contains("bias"), ErrorKind::Parse,
          "NLinear: expected {weight, bias}");
  return NLinear(matrix_from_json(j.at("weight"), "nlinear weight"),
                 vector_from_json(j.at("bias"), "nlinear bias"));
}

}  // namespace rset
