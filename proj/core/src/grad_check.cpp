#include "rset/decouple/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "rset/common/error.hpp"

namespace rset {

json GradCheckReport::to_json() const {
  return json{{"max_rel_err", max_rel_err},
              {"tol", tol},
              {"pass", pass},
              {"worst_index", worst_index},
              {"parameter_count", parameter_count}};
}

GradCheckReport grad_check(const Eigen::VectorXd& params, const ParameterLoss& loss, double tol,
                           double step) {
  require(tol > 0.0 && step > 0.0, ErrorKind::InvalidArgument, "grad_check: tol and step must be positive");
  const auto base = loss(params);
  require(std::isfinite(base.value), ErrorKind::Numerical, "grad_check: loss is not finite");
  require(base.gradient.size() == params.size(), ErrorKind::Shape,
          "grad_check: analytic gradient has the wrong length");

  GradCheckReport report;
  report.tol = tol;
  report.parameter_count = static_cast<std::size_t>(params.size());
  Eigen::VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double up = loss(probe).value;
    probe[i] = params[i] - step;
    const double down = loss(probe).value;
    probe[i] = params[i];
    require(std::isfinite(up) && std::isfinite(down), ErrorKind::Numerical,
            "grad_check: loss is not finite while probing parameter " + std::to_string(i));
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = base.gradient[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = static_cast<std::size_t>(i);
    }
  }
  report.pass = report.max_rel_err < tol;
  return report;
}

GradCheckReport grad_check(const DenseNet& net, const ParameterLoss& loss, double tol, double step) {
  return grad_check(net.parameters(), loss, tol, step);
}

}  // namespace rset
