#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rset/common/serialize.hpp"
#include "rset/dataset/emotion.hpp"

namespace rset {

/// One speech sample: precomputed acoustic features plus labels.
struct Utterance {
  std::string id;
  std::string speaker_id;
  Emotion emotion = Emotion::Neutral;
  Eigen::VectorXd features;
  /// Ground truth, known only for synthetic data.
  std::optional<double> latent_intensity;
};

/// Immutable, validated collection of utterances sharing one feature dimension.
class Corpus {
 public:
  Corpus() = default;

  /// Throws Error(Shape) if any utterance's feature length differs from
  /// feature_dim, Error(Numerical) on non-finite features, and
  /// Error(InvalidArgument) when feature_dim is zero.
  Corpus(std::vector<Utterance> utterances, std::size_t feature_dim);

  const std::vector<Utterance>& utterances() const noexcept { return utterances_; }
  const Utterance& operator[](std::size_t i) const { return utterances_.at(i); }
  std::size_t size() const noexcept { return utterances_.size(); }
  bool empty() const noexcept { return utterances_.empty(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  /// Non-neutral classes present, in enum order.
  const std::vector<Emotion>& emotion_classes() const noexcept { return classes_; }

  /// Counts for every class present, Neutral included.
  const std::map<Emotion, std::size_t>& per_class_counts() const noexcept { return counts_; }

  std::vector<std::size_t> indices_of(Emotion e) const;
  bool has_latent() const noexcept;

 private:
  std::vector<Utterance> utterances_;
  std::size_t feature_dim_ = 0;
  std::vector<Emotion> classes_;
  std::map<Emotion, std::size_t> counts_;
};

enum class CorpusFormat { Csv, Jsonl };

/// Picks the format from the file extension (.jsonl / .json -> Jsonl, else Csv).
CorpusFormat format_for_path(const std::filesystem::path& path);

/// Reads `id,speaker,emotion,f0..f{d-1}`. Rows keep file order.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

/// Ground-truth latent intensities as `id,latent`.
void write_latent(const Corpus& corpus, const std::filesystem::path& path);
std::map<std::string, double> load_latent(const std::filesystem::path& path);

/// Copy of `corpus` with latent intensities attached by utterance id.
Corpus with_latent(const Corpus& corpus, const std::map<std::string, double>& latent);

/// Per-dimension z-score parameters. Dimensions whose std is zero map to 0.
struct Scaler {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  Eigen::VectorXd apply(const Eigen::VectorXd& features) const;
  Corpus apply(const Corpus& corpus) const;

  json to_json() const;
  static Scaler from_json(const json& j);
};

/// Population (1/n) mean and standard deviation per dimension.
std::pair<Corpus, Scaler> standardize_features(const Corpus& corpus);

}  // namespace rset
