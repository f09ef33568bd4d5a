#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rset/common/serialize.hpp"

namespace rset::tools {

/// Inputs default to the files `gen` writes into the output directory.
struct PathsConfig {
  std::string corpus;
  std::string latent;
  std::string emotion_embeddings;
  std::string speaker_embeddings;
  std::string speaker_hat;
};

struct SyntheticConfig {
  std::size_t per_class = 50;
  std::size_t neutral_count = 50;
  std::size_t feature_dim = 16;
  std::size_t num_speakers = 10;
  double margin = 1.0;
  double intra_spread = 1.0;
  double noise = 0.0;
  std::vector<double> class_offsets = {0.0, 0.5, 1.0, 1.5};
  std::size_t emotion_dim = 32;
  std::size_t speaker_dim = 16;
  /// Per-dimension noise on generated emotion embeddings.
  double embedding_noise = 0.05;
  /// How strongly speaker identity leaks into emotion embeddings.
  double speaker_leak = 0.0;
  /// Noise of re-extracted speaker embeddings around the reference.
  double speaker_hat_noise = 0.05;
};

struct RankingConfig {
  double c = 1.0;
  bool joint = false;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  std::string step_rule = "backtracking";  // or "fixed"
  double fixed_step = 1e-3;
  std::string pair_mode = "auto";  // auto | exhaustive | sampled
  std::size_t exhaustive_limit = 2000;
  std::size_t max_pairs_per_set = 100000;
};

struct RemapConfig {
  double saturation_threshold = 0.49;
};

struct PoolConfig {
  std::size_t top_k = 8;
};

struct ControllerConfig {
  std::size_t window = 16;
  std::size_t hidden = 32;
  int epochs = 100;
  double learning_rate = 0.5;
  double frame_noise = 0.05;
  /// Every n-th utterance is held out from extractor training.
  std::size_t holdout_every = 5;
  double beta_a = 1.0;
  double beta_b = 1.0;
  int projection_epochs = 50;
  double projection_learning_rate = 1e-2;
};

struct MiConfig {
  std::size_t hidden = 16;
  int epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 5e-3;
};

struct LossConfig {
  double alpha1 = 0.1;
  double alpha2 = 0.1;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string out = "rset_out";
  PathsConfig paths;
  SyntheticConfig synthetic;
  RankingConfig ranking;
  RemapConfig remap;
  PoolConfig pool;
  ControllerConfig controller;
  MiConfig mi;
  LossConfig loss;
  std::vector<double> alpha = {0.2, 0.4, 0.6, 0.8, 1.0};

  json to_json() const;
  /// Overlays `j` on `base`. Unknown keys and wrong types raise
  /// Error(InvalidArgument) naming the offending key.
  static PipelineConfig from_json(const json& j, const PipelineConfig& base);
  static PipelineConfig from_json(const json& j);

  /// Throws Error(InvalidArgument) on values no stage can use.
  void validate() const;

  std::filesystem::path out_dir() const { return out; }
};

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace rset::tools
