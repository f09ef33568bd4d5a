#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <Eigen/Core>

namespace rset {

/// Logistic function, clamped so the result is strictly inside (0, 1).
double sigmoid(double z) noexcept;

/// Inverse of the logistic function. Requires p in (0, 1).
double logit(double p) noexcept;

/// Numerically stable softmax (max-shifted).
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

double log_sum_exp(const Eigen::VectorXd& values);

/// Kendall rank correlation (tau-b, tie corrected). Returns 0 when either
/// side is constant. Sizes must match and be at least 2.
double kendall_tau(std::span<const double> a, std::span<const double> b);

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) noexcept;

/// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Named sub-seed: the same (root, name) always maps to the same value.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name) noexcept;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace rset
