#include "rset/ranker/ranker.hpp"

#include <cmath>
#include <random>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/common/optim.hpp"

namespace rset {
namespace {

Eigen::MatrixXd pair_differences(const Corpus& corpus, const std::vector<IndexPair>& pairs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pairs.size()),
                      static_cast<Eigen::Index>(corpus.feature_dim()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    require(pairs[p].first < corpus.size() && pairs[p].second < corpus.size(),
            ErrorKind::InvalidArgument, "pair index outside the corpus");
    out.row(static_cast<Eigen::Index>(p)) =
        (corpus[pairs[p].first].features - corpus[pairs[p].second].features).transpose();
  }
  return out;
}

}  // namespace

RankingProblem::RankingProblem(const Corpus& corpus, const PairSet& pairs, double c)
    : dim_(corpus.feature_dim()), c_(c) {
  require(c > 0.0 && std::isfinite(c), ErrorKind::InvalidArgument, "C must be positive");
  require(!pairs.empty(), ErrorKind::InvalidArgument, "ranking needs at least one O or M pair");
  ordered_diffs_ = pair_differences(corpus, pairs.ordered);
  similar_diffs_ = pair_differences(corpus, pairs.similar);
}

double RankingProblem::value(const Eigen::VectorXd& w) const {
  const Eigen::ArrayXd hinge = (1.0 - (ordered_diffs_ * w).array()).max(0.0);
  const Eigen::ArrayXd gaps = (similar_diffs_ * w).array();
  return 0.5 * w.squaredNorm() + c_ * (hinge.square().sum() + gaps.square().sum());
}

Eigen::VectorXd RankingProblem::gradient(const Eigen::VectorXd& w) const {
  // At the kink (margin exactly 1) the hinge term contributes 0.
  const Eigen::VectorXd hinge = (1.0 - (ordered_diffs_ * w).array()).max(0.0).matrix();
  const Eigen::VectorXd gaps = similar_diffs_ * w;
  return w - 2.0 * c_ * (ordered_diffs_.transpose() * hinge) +
         2.0 * c_ * (similar_diffs_.transpose() * gaps);
}

RankingDiagnostics RankingProblem::diagnose(const Eigen::VectorXd& w) const {
  RankingDiagnostics d;
  d.final_objective = value(w);
  d.gradient_norm = gradient(w).norm();
  if (ordered_diffs_.rows() > 0) {
    const Eigen::ArrayXd margins = (ordered_diffs_ * w).array();
    d.o_violation_rate = static_cast<double>((margins < 1.0).count()) /
                         static_cast<double>(ordered_diffs_.rows());
  }
  if (similar_diffs_.rows() > 0)
    d.m_mean_abs_gap = (similar_diffs_ * w).cwiseAbs().mean();
  return d;
}

RankingModel train_ranker(const Corpus& corpus, const PairSet& pairs, double c,
                          const RankerOptions& opts) {
  require(opts.max_iterations >= 1, ErrorKind::InvalidArgument, "max_iterations must be >= 1");
  require(opts.gradient_tolerance > 0.0, ErrorKind::InvalidArgument,
          "gradient_tolerance must be positive");
  const RankingProblem problem(corpus, pairs, c);
  const auto dim = static_cast<Eigen::Index>(problem.dim());

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1e-3);
  Eigen::VectorXd w(dim);
  for (Eigen::Index k = 0; k < dim; ++k) w[k] = normal(rng);

  const auto f = [&](const Eigen::VectorXd& x) { return problem.value(x); };
  double fw = f(w);
  Eigen::VectorXd g = problem.gradient(w);
  require(std::isfinite(fw), ErrorKind::Numerical, "non-finite ranking objective at iteration 0");

  RankingModel model;
  model.c_tradeoff = c;
  int it = 0;
  bool converged = false;
  double trial = 1.0;
  Eigen::VectorXd prev_w, prev_g;
  for (; it < opts.max_iterations; ++it) {
    if (g.norm() <= opts.gradient_tolerance) {
      converged = true;
      break;
    }
    if (opts.step_rule == StepRule::Fixed) {
      w -= opts.fixed_step * g;
      fw = f(w);
    } else {
      if (it > 0) {
        const Eigen::VectorXd s = w - prev_w;
        const Eigen::VectorXd y = g - prev_g;
        const double sy = s.dot(y);
        trial = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * trial;
      }
      const auto ls = armijo_backtrack(f, w, fw, g, -g, trial);
      if (!ls.accepted) break;  // no representable decrease left
      prev_w = w;
      prev_g = g;
      w -= ls.step * g;
      fw = ls.value;
    }
    require(std::isfinite(fw), ErrorKind::Numerical,
            "non-finite ranking objective at iteration " + std::to_string(it + 1));
    g = problem.gradient(w);
  }
  model.weights = w;
  model.diagnostics = problem.diagnose(w);
  model.diagnostics.iterations = it;
  model.diagnostics.converged = converged;
  return model;
}

double score(const RankingModel& model, const Eigen::VectorXd& features) {
  require(model.weights.size() == features.size(), ErrorKind::Shape,
          "score: model has dimension " + std::to_string(model.weights.size()) +
              ", features have " + std::to_string(features.size()));
  return model.weights.dot(features);
}

double objective(const RankingModel& model, const Corpus& corpus, const PairSet& pairs) {
  require(static_cast<std::size_t>(model.weights.size()) == corpus.feature_dim(), ErrorKind::Shape,
          "objective: model and corpus dimensions differ");
  double hinge = 0.0;
  for (const auto& p : pairs.ordered) {
    const double m = score(model, corpus[p.first].features) - score(model, corpus[p.second].features);
    const double slack = std::max(0.0, 1.0 - m);
    hinge += slack * slack;
  }
  double gap = 0.0;
  for (const auto& p : pairs.similar) {
    const double m = score(model, corpus[p.first].features) - score(model, corpus[p.second].features);
    gap += m * m;
  }
  return 0.5 * model.weights.squaredNorm() + model.c_tradeoff * (hinge + gap);
}

json RankingModel::to_json() const {
  const auto& d = diagnostics;
  return json{{"weights", vector_to_json(weights)},
              {"c", c_tradeoff},
              {"diagnostics",
               {{"final_objective", d.final_objective},
                {"o_violation_rate", d.o_violation_rate},
                {"m_mean_abs_gap", d.m_mean_abs_gap},
                {"iterations", d.iterations},
                {"gradient_norm", d.gradient_norm},
                {"converged", d.converged}}}};
}

RankingModel RankingModel::from_json(const json& j) {
  require(j.is_object() && j.contains("weights") && j.contains("c"), ErrorKind::Parse,
          "ranking model: expected {weights, c, diagnostics}");
  RankingModel m;
  m.weights = vector_from_json(j.at("weights"), "ranking model weights");
  m.c_tradeoff = j.at("c").get<double>();
  require(m.c_tradeoff > 0.0 && m.weights.size() > 0, ErrorKind::Parse,
          "ranking model: invalid C or empty weights");
  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    m.diagnostics.final_objective = d.value("final_objective", 0.0);
    m.diagnostics.o_violation_rate = d.value("o_violation_rate", 0.0);
    m.diagnostics.m_mean_abs_gap = d.value("m_mean_abs_gap", 0.0);
    m.diagnostics.iterations = d.value("iterations", 0);
    m.diagnostics.gradient_norm = d.value("gradient_norm", 0.0);
    m.diagnostics.converged = d.value("converged", false);
  }
  return m;
}

const RankingModel& RankerBank::model_for(Emotion e) const {
  if (joint) return *joint;
  const auto it = per_class.find(e);
  require(it != per_class.end(), ErrorKind::InvalidArgument,
          "no ranking model for class '" + std::string(to_string(e)) + "'");
  return it->second;
}

json RankerBank::to_json() const {
  if (joint) return json{{"mode", "joint"}, {"model", joint->to_json()}};
  json models = json::object();
  for (const auto& [e, m] : per_class) models[std::string(to_string(e))] = m.to_json();
  return json{{"mode", "per_class"}, {"models", std::move(models)}};
}

RankerBank RankerBank::from_json(const json& j) {
  require(j.is_object() && j.contains("mode"), ErrorKind::Parse, "ranker bank: missing mode");
  RankerBank bank;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "joint") {
    bank.joint = RankingModel::from_json(j.at("model"));
  } else {
    require(mode == "per_class" && j.contains("models"), ErrorKind::Parse,
            "ranker bank: unknown mode '" + mode + "'");
    for (const auto& [key, value] : j.at("models").items())
      bank.per_class.emplace(parse_emotion(key), RankingModel::from_json(value));
  }
  return bank;
}

RankerBank train_rankers(const Corpus& corpus, const RankerConfig& config) {
  RankerBank bank;
  if (config.joint) {
    auto pairs_cfg = config.pairs;
    pairs_cfg.focus.reset();
    bank.joint = train_ranker(corpus, build_pair_sets(corpus, pairs_cfg), config.c, config.options);
    return bank;
  }
  for (const Emotion e : corpus.emotion_classes()) {
    auto pairs_cfg = config.pairs;
    pairs_cfg.focus = e;
    pairs_cfg.seed = derive_seed(config.pairs.seed, to_string(e));
    auto opts = config.options;
    opts.seed = derive_seed(config.options.seed, to_string(e));
    bank.per_class.emplace(e, train_ranker(corpus, build_pair_sets(corpus, pairs_cfg), config.c, opts));
  }
  return bank;
}

}  // namespace rset
