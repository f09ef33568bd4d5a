#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"
#include "rset/decouple/dense_net.hpp"

namespace rset {

struct LossWithGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Loss as a function of a flat parameter vector, with its analytic gradient.
using ParameterLoss = std::function<LossWithGradient(const Eigen::VectorXd&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::size_t worst_index = 0;
  std::size_t parameter_count = 0;

  json to_json() const;
};

/// Central differences per coordinate. Relative error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
/// Throws Error(Numerical) if the loss is non-finite at any probe.
GradCheckReport grad_check(const Eigen::VectorXd& params, const ParameterLoss& loss, double tol,
                           double step = 1e-5);

GradCheckReport grad_check(const DenseNet& net, const ParameterLoss& loss, double tol,
                           double step = 1e-5);

}  // namespace rset
