#include "rset_tools/config.hpp"

#include <type_traits>

#include "rset/common/error.hpp"

namespace rset::tools {
namespace {

// Reads known keys from an object and rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    require(j.is_object(), ErrorKind::InvalidArgument,
            "config: " + (prefix_.empty() ? std::string("root") : prefix_) + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        require(v.is_boolean(), ErrorKind::InvalidArgument, "expected a boolean");
      } else if constexpr (std::is_unsigned_v<T>) {
        require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                ErrorKind::InvalidArgument, "expected a non-negative integer");
      } else if constexpr (std::is_integral_v<T>) {
        require(v.is_number_integer(), ErrorKind::InvalidArgument, "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        require(v.is_number(), ErrorKind::InvalidArgument, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        require(v.is_string(), ErrorKind::InvalidArgument, "expected a string");
      } else {
        require(v.is_array(), ErrorKind::InvalidArgument, "expected an array");
        for (const auto& x : v) require(x.is_number(), ErrorKind::InvalidArgument, "expected numbers");
      }
      out = v.get<T>();
    } catch (const Error& e) {
      fail(ErrorKind::InvalidArgument, "config: " + path(key) + ": " + e.what());
    }
  }

  const json* section(const char* key) {
    seen_.push_back(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const auto& s : seen_) known = known || s == key;
      require(known, ErrorKind::InvalidArgument, "config: unknown key '" + path(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

template <class Fn>
void with_section(Reader& parent, const char* key, Fn&& fn) {
  if (const json* s = parent.section(key)) {
    Reader r(*s, parent.path(key));
    fn(r);
    r.finish();
  }
}

}  // namespace

json PipelineConfig::to_json() const {
  return {
      {"seed", seed},
      {"out", out},
      {"paths",
       {{"corpus", paths.corpus},
        {"latent", paths.latent},
        {"emotion_embeddings", paths.emotion_embeddings},
        {"speaker_embeddings", paths.speaker_embeddings},
        {"speaker_hat", paths.speaker_hat}}},
      {"synthetic",
       {{"per_class", synthetic.per_class},
        {"neutral_count", synthetic.neutral_count},
        {"feature_dim", synthetic.feature_dim},
        {"num_speakers", synthetic.num_speakers},
        {"margin", synthetic.margin},
        {"intra_spread", synthetic.intra_spread},
        {"noise", synthetic.noise},
        {"class_offsets", synthetic.class_offsets},
        {"emotion_dim", synthetic.emotion_dim},
        {"speaker_dim", synthetic.speaker_dim},
        {"embedding_noise", synthetic.embedding_noise},
        {"speaker_leak", synthetic.speaker_leak},
        {"speaker_hat_noise", synthetic.speaker_hat_noise}}},
      {"ranking",
       {{"c", ranking.c},
        {"joint", ranking.joint},
        {"max_iterations", ranking.max_iterations},
        {"gradient_tolerance", ranking.gradient_tolerance},
        {"step_rule", ranking.step_rule},
        {"fixed_step", ranking.fixed_step},
        {"pair_mode", ranking.pair_mode},
        {"exhaustive_limit", ranking.exhaustive_limit},
        {"max_pairs_per_set", ranking.max_pairs_per_set}}},
      {"remap", {{"saturation_threshold", remap.saturation_threshold}}},
      {"pool", {{"top_k", pool.top_k}}},
      {"controller",
       {{"window", controller.window},
        {"hidden", controller.hidden},
        {"epochs", controller.epochs},
        {"learning_rate", controller.learning_rate},
        {"frame_noise", controller.frame_noise},
        {"holdout_every", controller.holdout_every},
        {"beta_a", controller.beta_a},
        {"beta_b", controller.beta_b},
        {"projection_epochs", controller.projection_epochs},
        {"projection_learning_rate", controller.projection_learning_rate}}},
      {"mi",
       {{"hidden", mi.hidden},
        {"epochs", mi.epochs},
        {"batch_size", mi.batch_size},
        {"learning_rate", mi.learning_rate}}},
      {"loss", {{"alpha1", loss.alpha1}, {"alpha2", loss.alpha2}}},
      {"alpha", alpha},
  };
}

PipelineConfig PipelineConfig::from_json(const json& j, const PipelineConfig& base) {
  PipelineConfig c = base;
  Reader root(j, "");
  root.get("seed", c.seed);
  root.get("out", c.out);
  root.get("alpha", c.alpha);
  with_section(root, "paths", [&](Reader& r) {
    r.get("corpus", c.paths.corpus);
    r.get("latent", c.paths.latent);
    r.get("emotion_embeddings", c.paths.emotion_embeddings);
    r.get("speaker_embeddings", c.paths.speaker_embeddings);
    r.get("speaker_hat", c.paths.speaker_hat);
  });
  with_section(root, "synthetic", [&](Reader& r) {
    auto& s = c.synthetic;
    r.get("per_class", s.per_class);
    r.get("neutral_count", s.neutral_count);
    r.get("feature_dim", s.feature_dim);
    r.get("num_speakers", s.num_speakers);
    r.get("margin", s.margin);
    r.get("intra_spread", s.intra_spread);
    r.get("noise", s.noise);
    r.get("class_offsets", s.class_offsets);
    r.get("emotion_dim", s.emotion_dim);
    r.get("speaker_dim", s.speaker_dim);
    r.get("embedding_noise", s.embedding_noise);
    r.get("speaker_leak", s.speaker_leak);
    r.get("speaker_hat_noise", s.speaker_hat_noise);
  });
  with_section(root, "ranking", [&](Reader& r) {
    auto& s = c.ranking;
    r.get("c", s.c);
    r.get("joint", s.joint);
    r.get("max_iterations", s.max_iterations);
    r.get("gradient_tolerance", s.gradient_tolerance);
    r.get("step_rule", s.step_rule);
    r.get("fixed_step", s.fixed_step);
    r.get("pair_mode", s.pair_mode);
    r.get("exhaustive_limit", s.exhaustive_limit);
    r.get("max_pairs_per_set", s.max_pairs_per_set);
  });
  with_section(root, "remap", [&](Reader& r) { r.get("saturation_threshold", c.remap.saturation_threshold); });
  with_section(root, "pool", [&](Reader& r) { r.get("top_k", c.pool.top_k); });
  with_section(root, "controller", [&](Reader& r) {
    auto& s = c.controller;
    r.get("window", s.window);
    r.get("hidden", s.hidden);
    r.get("epochs", s.epochs);
    r.get("learning_rate", s.learning_rate);
    r.get("frame_noise", s.frame_noise);
    r.get("holdout_every", s.holdout_every);
    r.get("beta_a", s.beta_a);
    r.get("beta_b", s.beta_b);
    r.get("projection_epochs", s.projection_epochs);
    r.get("projection_learning_rate", s.projection_learning_rate);
  });
  with_section(root, "mi", [&](Reader& r) {
    r.get("hidden", c.mi.hidden);
    r.get("epochs", c.mi.epochs);
    r.get("batch_size", c.mi.batch_size);
    r.get("learning_rate", c.mi.learning_rate);
  });
  with_section(root, "loss", [&](Reader& r) {
    r.get("alpha1", c.loss.alpha1);
    r.get("alpha2", c.loss.alpha2);
  });
  root.finish();
  return c;
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorKind::InvalidArgument, "config: " + what);
  };
  check(!out.empty(), "out must not be empty");
  check(synthetic.per_class > 0 && synthetic.neutral_count > 0, "synthetic counts must be positive");
  check(synthetic.feature_dim > 0 && synthetic.emotion_dim > 0 && synthetic.speaker_dim > 0,
        "synthetic dimensions must be positive");
  check(synthetic.num_speakers > 0, "synthetic.num_speakers must be positive");
  check(ranking.c > 0.0, "ranking.c must be positive");
  check(ranking.max_iterations >= 1, "ranking.max_iterations must be >= 1");
  check(ranking.gradient_tolerance > 0.0, "ranking.gradient_tolerance must be positive");
  check(ranking.step_rule == "backtracking" || ranking.step_rule == "fixed",
        "ranking.step_rule must be 'backtracking' or 'fixed'");
  check(ranking.pair_mode == "auto" || ranking.pair_mode == "exhaustive" || ranking.pair_mode == "sampled",
        "ranking.pair_mode must be 'auto', 'exhaustive' or 'sampled'");
  check(remap.saturation_threshold > 0.0 && remap.saturation_threshold < 0.5,
        "remap.saturation_threshold must be in (0, 0.5)");
  check(pool.top_k >= 1, "pool.top_k must be >= 1");
  check(controller.window >= 1 && controller.hidden >= 1, "controller.window and hidden must be >= 1");
  check(controller.epochs >= 0 && controller.projection_epochs >= 0, "epochs must be non-negative");
  check(controller.holdout_every >= 2, "controller.holdout_every must be >= 2");
  check(controller.beta_a > 0.0 && controller.beta_b > 0.0, "controller.beta_a and beta_b must be positive");
  check(mi.hidden >= 1 && mi.batch_size >= 2 && mi.epochs >= 0, "mi settings out of range");
  check(loss.alpha1 >= 0.0 && loss.alpha2 >= 0.0, "loss weights must be non-negative");
  check(!alpha.empty(), "alpha must list at least one value");
  for (const double a : alpha) check(a >= 0.0, "alpha values must be non-negative");
}

PipelineConfig PipelineConfig::from_json(const json& j) { return from_json(j, PipelineConfig{}); }

PipelineConfig load_config(const std::filesystem::path& path) {
  return PipelineConfig::from_json(read_json_file(path));
}

}  // namespace rset::tools
