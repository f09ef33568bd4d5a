#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"
#include "rset/controller/nlinear.hpp"
#include "rset/decouple/dense_net.hpp"
#include "rset/decouple/grad_check.hpp"

namespace rset {

/// Intensity regressor: NLinear -> two ReLU dense layers per frame ->
/// average over time -> affine scalar head -> logistic.
class ExtractorModel {
 public:
  ExtractorModel() = default;
  ExtractorModel(NLinear nlinear, DenseNet dense, DenseNet head);

  static ExtractorModel create(std::size_t window, std::size_t channels, std::size_t hidden,
                               std::uint64_t seed);

  std::size_t window() const noexcept { return nlinear_.window(); }
  std::size_t channels() const noexcept { return dense_.input_dim(); }

  const NLinear& nlinear() const noexcept { return nlinear_; }
  const DenseNet& dense() const noexcept { return dense_; }
  const DenseNet& head() const noexcept { return head_; }

  std::size_t parameter_count() const noexcept;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  /// y_pred in (0, 1). Throws Error(Shape) on a wrong window or channel count.
  double predict(const Eigen::MatrixXd& sequence) const;

  /// Adds upstream(y) * dy/dparams into `param_grad`; returns y_pred.
  double backward(const Eigen::MatrixXd& sequence, const std::function<double(double)>& upstream,
                  Eigen::Ref<Eigen::VectorXd> param_grad) const;

  json to_json() const;
  static ExtractorModel from_json(const json& j);

 private:
  NLinear nlinear_;
  DenseNet dense_;
  DenseNet head_;
};

/// Emotion classifier: NLinear -> average over time -> affine -> softmax.
class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(NLinear nlinear, DenseNet affine);

  static ClassifierModel create(std::size_t window, std::size_t channels, std::size_t num_classes,
                                std::uint64_t seed);

  std::size_t window() const noexcept { return nlinear_.window(); }
  std::size_t num_classes() const noexcept { return affine_.output_dim(); }
  const NLinear& nlinear() const noexcept { return nlinear_; }
  const DenseNet& affine() const noexcept { return affine_; }

  std::size_t parameter_count() const noexcept;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  Eigen::VectorXd logits(const Eigen::MatrixXd& sequence) const;
  Eigen::VectorXd probabilities(const Eigen::MatrixXd& sequence) const;

  /// Adds d(-log p[label])/dparams into `param_grad`; returns that loss.
  double backward(const Eigen::MatrixXd& sequence, std::size_t label,
                  Eigen::Ref<Eigen::VectorXd> param_grad) const;

  json to_json() const;
  static ClassifierModel from_json(const json& j);

 private:
  NLinear nlinear_;
  DenseNet affine_;
};

double extract_intensity(const ExtractorModel& model, const Eigen::MatrixXd& sequence);
Eigen::VectorXd classify_emotion(const ClassifierModel& model, const Eigen::MatrixXd& sequence);

struct ExtractorSample {
  Eigen::MatrixXd sequence;  // L x channels
  double intensity = 0.5;    // remapped label in (0, 1)
  std::size_t class_index = 0;
};

/// Mean squared error of the intensity head over `data`, with gradient.
LossWithGradient intensity_loss(const ExtractorModel& model, std::span<const ExtractorSample> data);
/// Mean cross-entropy of the classifier over `data`, with gradient.
LossWithGradient classification_loss(const ClassifierModel& model,
                                     std::span<const ExtractorSample> data);

struct ExtractorOptions {
  std::size_t hidden = 128;
  std::size_t num_classes = 0;  // 0: infer as max class_index + 1
  int epochs = 200;
  /// Initial trial step for each epoch's backtracking search.
  double learning_rate = 0.5;
  double max_step = 50.0;
  std::uint64_t seed = 0;
};

struct ExtractorTrainResult {
  ExtractorModel extractor;
  ClassifierModel classifier;
  std::vector<double> intensity_loss_history;
  std::vector<double> class_loss_history;
};

/// Full-batch gradient descent, one Armijo-backtracked step per epoch, so
/// both training losses are non-increasing. Throws Error(Shape) on
/// inconsistent sequences and Error(Numerical) on a non-finite loss.
ExtractorTrainResult train_extractor(std::span<const ExtractorSample> data,
                                     const ExtractorOptions& opts = {});

}  // namespace rset
