#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"
#include "rset/dataset/corpus.hpp"
#include "rset/dataset/pairs.hpp"

namespace rset {

struct RankingDiagnostics {
  double final_objective = 0.0;
  /// Fraction of O pairs with w'(x_i - x_j) < 1.
  double o_violation_rate = 0.0;
  /// Mean |w'(x_i - x_j)| over M pairs.
  double m_mean_abs_gap = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Linear ranking function r(x) = w'x.
struct RankingModel {
  Eigen::VectorXd weights;
  double c_tradeoff = 1.0;
  RankingDiagnostics diagnostics;

  json to_json() const;
  static RankingModel from_json(const json& j);
};

enum class StepRule { Fixed, Backtracking };

struct RankerOptions {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  StepRule step_rule = StepRule::Backtracking;
  /// Step length for StepRule::Fixed.
  double fixed_step = 1e-3;
  std::uint64_t seed = 0;
};

/// Smooth unconstrained form of the relative-attributes program:
///
///   F(w) = 1/2 |w|^2 + C sum_O max(0, 1 - w'd_ij)^2 + C sum_M (w'd_ij)^2
///
/// with d_ij = x_i - x_j. Pair differences are materialized once.
class RankingProblem {
 public:
  RankingProblem(const Corpus& corpus, const PairSet& pairs, double c);

  double value(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  RankingDiagnostics diagnose(const Eigen::VectorXd& w) const;

  std::size_t dim() const noexcept { return dim_; }
  double c() const noexcept { return c_; }

 private:
  std::size_t dim_;
  double c_;
  Eigen::MatrixXd ordered_diffs_;  // |O| x d
  Eigen::MatrixXd similar_diffs_;  // |M| x d
};

/// Gradient descent with Armijo backtracking (Barzilai-Borwein trial step).
/// Throws Error(InvalidArgument) on empty pairs or C <= 0 and
/// Error(Numerical) when the objective becomes non-finite.
RankingModel train_ranker(const Corpus& corpus, const PairSet& pairs, double c,
                          const RankerOptions& opts = {});

/// w'x. Throws Error(Shape) on a dimension mismatch.
double score(const RankingModel& model, const Eigen::VectorXd& features);

/// F(w) summed pair by pair with the model's C.
double objective(const RankingModel& model, const Corpus& corpus, const PairSet& pairs);

struct RankerConfig {
  double c = 1.0;
  bool joint = false;
  RankerOptions options;
  PairSamplingConfig pairs;
};

/// One model per non-neutral class (default) or a single joint model.
struct RankerBank {
  std::optional<RankingModel> joint;
  std::map<Emotion, RankingModel> per_class;

  /// Throws Error(InvalidArgument) when no model covers `e`.
  const RankingModel& model_for(Emotion e) const;

  json to_json() const;
  static RankerBank from_json(const json& j);
};

/// Expects standardized features.
RankerBank train_rankers(const Corpus& corpus, const RankerConfig& config);

}  // namespace rset
