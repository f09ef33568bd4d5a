#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"

namespace rset {

enum class Activation { Identity, Relu, Tanh };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::Identity;
};

/// Feed-forward stack of affine layers. Inputs are batched row-wise
/// (one sample per row). The flat parameter layout is, per layer, the
/// column-major weight followed by the bias.
class DenseNet {
 public:
  /// Activations recorded by forward() for use in backward().
  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;       // input to each layer
    std::vector<Eigen::MatrixXd> activations;  // output of each layer
  };

  DenseNet() = default;
  /// Throws Error(Shape) when layer dimensions do not chain.
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// dims = {in, h1, ..., out}; `hidden` applies to all but the last layer.
  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  static DenseNet random(std::span<const std::size_t> dims, Activation hidden, Activation output,
                         std::uint64_t seed);

  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  std::size_t parameter_count() const noexcept;
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape& tape) const;

  /// Adds dL/dparams into `param_grad` and returns dL/dinput.
  Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& grad_output,
                           Eigen::Ref<Eigen::VectorXd> param_grad) const;

  json to_json() const;
  static DenseNet from_json(const json& j);

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace rset
