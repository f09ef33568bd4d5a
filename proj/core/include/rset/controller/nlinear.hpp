#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"

namespace rset {

/// Linear map along the time axis with last-value normalization:
///
///   out = W (X - 1 x_last') + b 1' + 1 x_last'
///
/// X is L x channels (one row per time step), W is H x L. Every channel
/// shares W and b. Shifting X by a constant shifts the output by the same
/// constant.
class NLinear {
 public:
  NLinear() = default;
  /// Throws Error(Shape) unless bias.size() == weight.rows().
  NLinear(Eigen::MatrixXd weight, Eigen::VectorXd bias);

  static NLinear zeros(std::size_t window, std::size_t horizon);
  static NLinear identity(std::size_t window);
  /// W ~ U(-1/sqrt(L), 1/sqrt(L)), b = 0.
  static NLinear random(std::size_t window, std::size_t horizon, std::uint64_t seed);

  std::size_t window() const noexcept { return static_cast<std::size_t>(weight_.cols()); }
  std::size_t horizon() const noexcept { return static_cast<std::size_t>(weight_.rows()); }
  const Eigen::MatrixXd& weight() const noexcept { return weight_; }
  const Eigen::VectorXd& bias() const noexcept { return bias_; }

  std::size_t parameter_count() const noexcept;
  Eigen::VectorXd parameters() const;  // column-major W, then b
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& flat);

  /// Throws Error(Shape) when sequence.rows() != window().
  Eigen::MatrixXd forward(const Eigen::MatrixXd& sequence) const;

  /// Adds dL/dparams for one sequence given dL/doutput (H x channels).
  void backward(const Eigen::MatrixXd& sequence, const Eigen::MatrixXd& grad_output,
                Eigen::Ref<Eigen::VectorXd> param_grad) const;

  json to_json() const;
  static NLinear from_json(const json& j);

 private:
  Eigen::MatrixXd weight_;
  Eigen::VectorXd bias_;
};

}  // namespace rset
