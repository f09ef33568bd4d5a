#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace rset {

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  int evaluations = 0;
  bool accepted = false;
};

/// Armijo backtracking along `direction` starting from `initial_step`.
/// The accepted point satisfies f(x + t d) <= f(x) + c1 t g'd. Rejects
/// non-finite trial values by shrinking.
LineSearchResult armijo_backtrack(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double fx,
                                  const Eigen::VectorXd& gradient,
                                  const Eigen::VectorXd& direction, double initial_step,
                                  double c1 = 1e-4, double shrink = 0.5,
                                  int max_shrinks = 60);

/// Plain Adam state over a flat parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t size, double learning_rate = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  /// Descends: params -= lr * m_hat / (sqrt(v_hat) + eps).
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient);

  long steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

}  // namespace rset
