#include "rset/common/optim.hpp"

#include <cmath>

namespace rset {

LineSearchResult armijo_backtrack(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double fx,
                                  const Eigen::VectorXd& gradient,
                                  const Eigen::VectorXd& direction, double initial_step,
                                  double c1, double shrink, int max_shrinks) {
  LineSearchResult result;
  const double slope = gradient.dot(direction);
  if (!(slope < 0.0)) return result;  // not a descent direction
  double t = initial_step;
  for (int k = 0; k <= max_shrinks; ++k) {
    const double ft = f(x + t * direction);
    ++result.evaluations;
    if (std::isfinite(ft) && ft <= fx + c1 * t * slope) {
      result.step = t;
      result.value = ft;
      result.accepted = true;
      return result;
    }
    t *= shrink;
  }
  return result;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * gradient;
  v_ = beta2_ * v_ + (1.0 - beta2_) * gradient.cwiseProduct(gradient);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

}  // namespace rset
