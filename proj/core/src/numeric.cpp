#include "rset/common/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rset/common/error.hpp"

namespace rset {

double sigmoid(double z) noexcept {
  // exp() of a large positive argument overflows, so branch on sign.
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  require(logits.size() > 0, ErrorKind::Shape, "softmax of an empty vector");
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  return e / e.sum();
}

double log_sum_exp(const Eigen::VectorXd& values) {
  require(values.size() > 0, ErrorKind::Shape, "log-sum-exp of an empty vector");
  const double top = values.maxCoeff();
  return top + std::log((values.array() - top).exp().sum());
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Shape, "kendall_tau: size mismatch");
  require(a.size() >= 2, ErrorKind::InvalidArgument, "kendall_tau: need at least 2 samples");
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[j] - a[i];
      const double db = b[j] - b[i];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ++ties_a;
      } else if (db == 0.0) {
        ++ties_b;
      } else if ((da > 0.0) == (db > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + ties_b);
  const double n2 = static_cast<double>(concordant + discordant + ties_a);
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) noexcept {
  return m.allFinite();
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix_seed(mix_seed(root) ^ h);
}

}  // namespace rset
