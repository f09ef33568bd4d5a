#include "rset/controller/extractor.hpp"

#include <algorithm>
#include <cmath>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/common/optim.hpp"

namespace rset {
namespace {

void check_sequence(const Eigen::MatrixXd& sequence, std::size_t window, std::size_t channels,
                    std::string_view who) {
  require(static_cast<std::size_t>(sequence.rows()) == window &&
              static_cast<std::size_t>(sequence.cols()) == channels,
          ErrorKind::Shape,
          std::string(who) + ": expected a " + std::to_string(window) + " x " +
              std::to_string(channels) + " sequence, got " + std::to_string(sequence.rows()) +
              " x " + std::to_string(sequence.cols()));
}

}  // namespace

// ---------------------------------------------------------------------------
// ExtractorModel

ExtractorModel::ExtractorModel(NLinear nlinear, DenseNet dense, DenseNet head)
    : nlinear_(std::move(nlinear)), dense_(std::move(dense)), head_(std::move(head)) {
  require(dense_.layers().size() == 2, ErrorKind::Shape, "extractor needs exactly two dense layers");
  require(head_.input_dim() == dense_.output_dim() && head_.output_dim() == 1, ErrorKind::Shape,
          "extractor head must map the dense width to a scalar");
}

ExtractorModel ExtractorModel::create(std::size_t window, std::size_t channels, std::size_t hidden,
                                      std::uint64_t seed) {
  const std::size_t dense_dims[] = {channels, hidden, hidden};
  const std::size_t head_dims[] = {hidden, 1};
  return ExtractorModel(
      NLinear::random(window, window, derive_seed(seed, "nlinear")),
      DenseNet::random(dense_dims, Activation::Relu, Activation::Relu, derive_seed(seed, "dense")),
      DenseNet::random(head_dims, Activation::Identity, Activation::Identity, derive_seed(seed, "head")));
}

std::size_t ExtractorModel::parameter_count() const noexcept {
  return nlinear_.parameter_count() + dense_.parameter_count() + head_.parameter_count();
}

Eigen::VectorXd ExtractorModel::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  flat << nlinear_.parameters(), dense_.parameters(), head_.parameters();
  return flat;
}

void ExtractorModel::set_parameters(const Eigen::VectorXd& flat) {
  require(static_cast<std::size_t>(flat.size()) == parameter_count(), ErrorKind::Shape,
          "ExtractorModel::set_parameters: wrong length");
  const auto a = static_cast<Eigen::Index>(nlinear_.parameter_count());
  const auto b = static_cast<Eigen::Index>(dense_.parameter_count());
  nlinear_.set_parameters(flat.head(a));
  dense_.set_parameters(flat.segment(a, b));
  head_.set_parameters(flat.tail(flat.size() - a - b));
}

double ExtractorModel::predict(const Eigen::MatrixXd& sequence) const {
  check_sequence(sequence, window(), channels(), "extract_intensity");
  const Eigen::MatrixXd hidden = dense_.forward(nlinear_.forward(sequence));
  return sigmoid(head_.forward(hidden.colwise().mean())(0, 0));
}

double ExtractorModel::backward(const Eigen::MatrixXd& sequence,
                                const std::function<double(double)>& upstream,
                                Eigen::Ref<Eigen::VectorXd> param_grad) const {
  check_sequence(sequence, window(), channels(), "extractor backward");
  require(static_cast<std::size_t>(param_grad.size()) == parameter_count(), ErrorKind::Shape,
          "extractor backward: gradient buffer has the wrong size");
  const auto a = static_cast<Eigen::Index>(nlinear_.parameter_count());
  const auto b = static_cast<Eigen::Index>(dense_.parameter_count());
  const auto c = static_cast<Eigen::Index>(head_.parameter_count());

  const Eigen::MatrixXd latent = nlinear_.forward(sequence);
  DenseNet::Tape dense_tape, head_tape;
  const Eigen::MatrixXd hidden = dense_.forward(latent, dense_tape);
  const Eigen::MatrixXd pooled = hidden.colwise().mean();
  const double y = sigmoid(head_.forward(pooled, head_tape)(0, 0));

  const Eigen::MatrixXd grad_score = Eigen::MatrixXd::Constant(1, 1, upstream(y) * y * (1.0 - y));
  const Eigen::MatrixXd grad_pooled = head_.backward(head_tape, grad_score, param_grad.segment(a + b, c));
  const Eigen::MatrixXd grad_hidden =
      Eigen::MatrixXd::Ones(hidden.rows(), 1) * grad_pooled / static_cast<double>(hidden.rows());
  const Eigen::MatrixXd grad_latent = dense_.backward(dense_tape, grad_hidden, param_grad.segment(a, b));
  nlinear_.backward(sequence, grad_latent, param_grad.head(a));
  return y;
}

json ExtractorModel::to_json() const {
  return json{{"kind", "intensity_extractor"},
              {"window", window()},
              {"channels", channels()},
              {"nlinear", nlinear_.to_json()},
              {"dense", dense_.to_json()},
              {"head", head_.to_json()}};
}

ExtractorModel ExtractorModel::from_json(const json& j) {
  require(j.is_object() && j.contains("nlinear") && j.contains("dense") && j.contains("head"),
          ErrorKind::Parse, "extractor: expected {nlinear, dense, head}");
  return ExtractorModel(NLinear::from_json(j.at("nlinear")), DenseNet::from_json(j.at("dense")),
                        DenseNet::from_json(j.at("head")));
}

// ---------------------------------------------------------------------------
// ClassifierModel

ClassifierModel::ClassifierModel(NLinear nlinear, DenseNet affine)
    : nlinear_(std::move(nlinear)), affine_(std::move(affine)) {
  require(affine_.layers().size() == 1 && affine_.layers()[0].activation == Activation::Identity,
          ErrorKind::Shape, "classifier head must be a single affine layer");
}

ClassifierModel ClassifierModel::create(std::size_t window, std::size_t channels,
                                        std::size_t num_classes, std::uint64_t seed) {
  require(num_classes >= 1, ErrorKind::InvalidArgument, "classifier needs at least one class");
  const std::size_t dims[] = {channels, num_classes};
  return ClassifierModel(
      NLinear::random(window, window, derive_seed(seed, "nlinear")),
      DenseNet::random(dims, Activation::Identity, Activation::Identity, derive_seed(seed, "affine")));
}

std::size_t ClassifierModel::parameter_count() const noexcept {
  return nlinear_.parameter_count() + affine_.parameter_count();
}

Eigen::VectorXd ClassifierModel::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  flat << nlinear_.parameters(), affine_.parameters();
  return flat;
}

void ClassifierModel::set_parameters(const Eigen::VectorXd& flat) {
  require(static_cast<std::size_t>(flat.size()) == parameter_count(), ErrorKind::Shape,
          "ClassifierModel::set_parameters: wrong length");
  const auto a = static_cast<Eigen::Index>(nlinear_.parameter_count());
  nlinear_.set_parameters(flat.head(a));
  affine_.set_parameters(flat.tail(flat.size() - a));
}

Eigen::VectorXd ClassifierModel::logits(const Eigen::MatrixXd& sequence) const {
  check_sequence(sequence, window(), affine_.input_dim(), "classify_emotion");
  const Eigen::MatrixXd pooled = nlinear_.forward(sequence).colwise().mean();
  return affine_.forward(pooled).row(0).transpose();
}

Eigen::VectorXd ClassifierModel::probabilities(const Eigen::MatrixXd& sequence) const {
  return softmax(logits(sequence));
}

double ClassifierModel::backward(const Eigen::MatrixXd& sequence, std::size_t label,
                                 Eigen::Ref<Eigen::VectorXd> param_grad) const {
  check_sequence(sequence, window(), affine_.input_dim(), "classifier backward");
  require(label < num_classes(), ErrorKind::InvalidArgument, "class label out of range");
  require(static_cast<std::size_t>(param_grad.size()) == parameter_count(), ErrorKind::Shape,
          "classifier backward: gradient buffer has the wrong size");
  const auto a = static_cast<Eigen::Index>(nlinear_.parameter_count());
  const auto b = static_cast<Eigen::Index>(affine_.parameter_count());

  const Eigen::MatrixXd latent = nlinear_.forward(sequence);
  DenseNet::Tape tape;
  const Eigen::VectorXd z = affine_.forward(latent.colwise().mean(), tape).row(0).transpose();
  const auto lbl = static_cast<Eigen::Index>(label);
  const double loss = log_sum_exp(z) - z[lbl];

  Eigen::VectorXd grad_z = softmax(z);
  grad_z[lbl] -= 1.0;
  const Eigen::MatrixXd grad_pooled = affine_.backward(tape, grad_z.transpose(), param_grad.segment(a, b));
  const Eigen::MatrixXd grad_latent =
      Eigen::MatrixXd::Ones(latent.rows(), 1) * grad_pooled / static_cast<double>(latent.rows());
  nlinear_.backward(sequence, grad_latent, param_grad.head(a));
  return loss;
}

json ClassifierModel::to_json() const {
  return json{{"kind", "emotion_classifier"},
              {"window", window()},
              {"num_classes", num_classes()},
              {"nlinear", nlinear_.to_json()},
              {"affine", affine_.to_json()}};
}

ClassifierModel ClassifierModel::from_json(const json& j) {
  require(j.is_object() && j.contains("nlinear") && j.contains("affine"), ErrorKind::Parse,
          "classifier: expected {nlinear, affine}");
  return ClassifierModel(NLinear::from_json(j.at("nlinear")), DenseNet::from_json(j.at("affine")));
}

// ---------------------------------------------------------------------------

double extract_intensity(const ExtractorModel& model, const Eigen::MatrixXd& sequence) {
  return model.predict(sequence);
}

Eigen::VectorXd classify_emotion(const ClassifierModel& model, const Eigen::MatrixXd& sequence) {
  return model.probabilities(sequence);
}

LossWithGradient intensity_loss(const ExtractorModel& model, std::span<const ExtractorSample> data) {
  require(!data.empty(), ErrorKind::InvalidArgument, "intensity_loss: no samples");
  const double n = static_cast<double>(data.size());
  LossWithGradient out{0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.parameter_count()))};
  for (const auto& s : data) {
    const double y = model.backward(
        s.sequence, [&](double pred) { return 2.0 * (pred - s.intensity) / n; }, out.gradient);
    out.value += (y - s.intensity) * (y - s.intensity);
  }
  out.value /= n;
  return out;
}

LossWithGradient classification_loss(const ClassifierModel& model,
                                     std::span<const ExtractorSample> data) {
  require(!data.empty(), ErrorKind::InvalidArgument, "classification_loss: no samples");
  const double n = static_cast<double>(data.size());
  LossWithGradient out{0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.parameter_count()))};
  for (const auto& s : data) out.value += model.backward(s.sequence, s.class_index, out.gradient);
  out.value /= n;
  out.gradient /= n;
  return out;
}

namespace {

/// One backtracked full-batch step per epoch. history[0] is the initial loss.
template <typename Model, typename LossFn>
std::vector<double> descend(Model& model, const LossFn& loss_with_grad,
                            const std::function<double(const Model&)>& loss_value,
                            const ExtractorOptions& opts, std::string_view what) {
  std::vector<double> history;
  Eigen::VectorXd params = model.parameters();
  auto lg = loss_with_grad(model);
  require(std::isfinite(lg.value), ErrorKind::Numerical, std::string(what) + ": non-finite initial loss");
  history.push_back(lg.value);
  Model probe = model;
  const auto f = [&](const Eigen::VectorXd& p) {
    probe.set_parameters(p);
    return loss_value(probe);
  };
  double step = opts.learning_rate;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const auto ls = armijo_backtrack(f, params, lg.value, lg.gradient, -lg.gradient, step);
    if (!ls.accepted) break;  // stationary to working precision
    params -= ls.step * lg.gradient;
    model.set_parameters(params);
    step = std::min(2.0 * ls.step, opts.max_step);
    lg = loss_with_grad(model);
    require(std::isfinite(lg.value), ErrorKind::Numerical,
            std::string(what) + ": non-finite loss at epoch " + std::to_string(epoch + 1));
    history.push_back(lg.value);
  }
  return history;
}

}  // namespace

ExtractorTrainResult train_extractor(std::span<const ExtractorSample> data, const ExtractorOptions& opts) {
  require(!data.empty(), ErrorKind::InvalidArgument, "train_extractor: no training data");
  require(opts.epochs >= 0 && opts.hidden >= 1 && opts.learning_rate > 0.0, ErrorKind::InvalidArgument,
          "train_extractor: invalid options");
  const auto window = static_cast<std::size_t>(data.front().sequence.rows());
  const auto channels = static_cast<std::size_t>(data.front().sequence.cols());
  require(window >= 1 && channels >= 1, ErrorKind::Shape, "train_extractor: empty sequences");
  std::size_t max_class = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_sequence(data[i].sequence, window, channels, "train_extractor sample " + std::to_string(i));
    require(data[i].sequence.allFinite() && std::isfinite(data[i].intensity), ErrorKind::Numerical,
            "train_extractor: non-finite sample " + std::to_string(i));
    max_class = std::max(max_class, data[i].class_index);
  }
  const std::size_t k = opts.num_classes == 0 ? max_class + 1 : opts.num_classes;
  require(max_class < k, ErrorKind::InvalidArgument, "train_extractor: class index out of range");

  ExtractorTrainResult result{
      ExtractorModel::create(window, channels, opts.hidden, derive_seed(opts.seed, "extractor")),
      ClassifierModel::create(window, channels, k, derive_seed(opts.seed, "classifier")),
      {},
      {}};

  result.intensity_loss_history = descend<ExtractorModel>(
      result.extractor, [&](const ExtractorModel& m) { return intensity_loss(m, data); },
      [&](const ExtractorModel& m) {
        double acc = 0.0;
        for (const auto& s : data) {
          const double e = m.predict(s.sequence) - s.intensity;
          acc += e * e;
        }
        return acc / static_cast<double>(data.size());
      },
      opts, "intensity extractor");

  result.class_loss_history = descend<ClassifierModel>(
      result.classifier, [&](const ClassifierModel& m) { return classification_loss(m, data); },
      [&](const ClassifierModel& m) {
        double acc = 0.0;
        for (const auto& s : data) {
          const Eigen::VectorXd z = m.logits(s.sequence);
          acc += log_sum_exp(z) - z[static_cast<Eigen::Index>(s.class_index)];
        }
        return acc / static_cast<double>(data.size());
      },
      opts, "emotion classifier");
  return result;
}

}  // namespace rset
