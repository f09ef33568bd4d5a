#include "rset/decouple/dense_net.hpp"

#include <cmath>
#include <random>

#include "rset/common/error.hpp"

namespace rset {
namespace {

Eigen::MatrixXd activate(Eigen::MatrixXd z, Activation a) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
  }
  return z;
}

/// Elementwise derivative expressed through the layer output.
Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& out, Activation a) {
  switch (a) {
    case Activation::Identity: return Eigen::MatrixXd::Ones(out.rows(), out.cols());
    case Activation::Relu: return (out.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh: return (1.0 - out.array().square()).matrix();
  }
  return Eigen::MatrixXd::Ones(out.rows(), out.cols());
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  fail(ErrorKind::Parse, "unknown activation '" + name + "'");
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), ErrorKind::Shape, "DenseNet needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    require(layer.weight.rows() == layer.bias.size() && layer.weight.rows() > 0 &&
                layer.weight.cols() > 0,
            ErrorKind::Shape, "DenseNet layer " + std::to_string(l) + ": weight/bias mismatch");
    if (l > 0)
      require(layer.weight.cols() == layers_[l - 1].weight.rows(), ErrorKind::Shape,
              "DenseNet layer " + std::to_string(l) + " does not chain with its predecessor");
  }
}

DenseNet DenseNet::random(std::span<const std::size_t> dims, Activation hidden, Activation output,
                          std::uint64_t seed) {
  require(dims.size() >= 2, ErrorKind::Shape, "DenseNet::random needs at least {in, out}");
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out),
                     l + 2 == dims.size() ? output : hidden};
    for (Eigen::Index c = 0; c < in; ++c)
      for (Eigen::Index r = 0; r < out; ++r) layer.weight(r, c) = dist(rng);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

std::size_t DenseNet::input_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t DenseNet::output_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

std::size_t DenseNet::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd DenseNet::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : layers_) {
    flat.segment(k, l.weight.size()) = Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
    k += l.weight.size();
    flat.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return flat;
}

void DenseNet::set_parameters(const Eigen::VectorXd& flat) {
  require(static_cast<std::size_t>(flat.size()) == parameter_count(), ErrorKind::Shape,
          "DenseNet::set_parameters: expected " + std::to_string(parameter_count()) + " values");
  Eigen::Index k = 0;
  for (auto& l : layers_) {
    Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) = flat.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = flat.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& input) const {
  Tape tape;
  return forward(input, tape);
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& input, Tape& tape) const {
  require(static_cast<std::size_t>(input.cols()) == input_dim(), ErrorKind::Shape,
          "DenseNet expects " + std::to_string(input_dim()) + " input columns, got " +
              std::to_string(input.cols()));
  tape.inputs.clear();
  tape.activations.clear();
  Eigen::MatrixXd x = input;
  for (const auto& l : layers_) {
    tape.inputs.push_back(x);
    Eigen::MatrixXd z = x * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    x = activate(std::move(z), l.activation);
    tape.activations.push_back(x);
  }
  return x;
}

Eigen::MatrixXd DenseNet::backward(const Tape& tape, const Eigen::MatrixXd& grad_output,
                                   Eigen::Ref<Eigen::VectorXd> param_grad) const {
  require(tape.inputs.size() == layers_.size(), ErrorKind::InvalidArgument,
          "DenseNet::backward: tape does not match the network");
  require(static_cast<std::size_t>(param_grad.size()) == parameter_count(), ErrorKind::Shape,
          "DenseNet::backward: gradient buffer has the wrong size");
  std::vector<Eigen::Index> offsets(layers_.size());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = k;
    k += layers_[l].weight.size() + layers_[l].bias.size();
  }
  Eigen::MatrixXd g = grad_output;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    const Eigen::MatrixXd dz = g.cwiseProduct(activation_slope(tape.activations[li], l.activation));
    Eigen::Map<Eigen::MatrixXd> dw(param_grad.data() + offsets[li], l.weight.rows(), l.weight.cols());
    dw.noalias() += dz.transpose() * tape.inputs[li];
    param_grad.segment(offsets[li] + l.weight.size(), l.bias.size()) += dz.colwise().sum().transpose();
    g = dz * l.weight;
  }
  return g;
}

json DenseNet::to_json() const {
  json arr = json::array();
  for (const auto& l : layers_)
    arr.push_back(json{{"weight", matrix_to_json(l.weight)},
                       {"bias", vector_to_json(l.bias)},
                       {"activation", std::string(activation_name(l.activation))}});
  return json{{"layers", std::move(arr)}};
}

DenseNet DenseNet::from_json(const json& j) {
  require(j.is_object() && j.contains("layers") && j.at("layers").is_array(), ErrorKind::Parse,
          "DenseNet: expected {layers: [...]}");
  std::vector<DenseLayer> layers;
  for (const auto& l : j.at("layers"))
    layers.push_back({matrix_from_json(l.at("weight"), "layer weight"),
                      vector_from_json(l.at("bias"), "layer bias"),
                      parse_activation(l.at("activation").get<std::string>())});
  return DenseNet(std::move(layers));
}

}  // namespace rset
