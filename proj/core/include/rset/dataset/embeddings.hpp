#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace rset {

struct EmotionEmbedding {
  Eigen::VectorXd values;
};

struct SpeakerEmbedding {
  Eigen::VectorXd values;
};

/// Per-utterance vectors keyed by id, kept in file order. Backs both the
/// emotion and the speaker embedding files (`id,v0..v{n-1}`).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  void add(std::string id, Eigen::VectorXd values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  bool contains(const std::string& id) const { return index_.contains(id); }

  /// Throws Error(InvalidArgument) for an unknown id.
  const Eigen::VectorXd& at(const std::string& id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<Eigen::VectorXd> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path,
                      char prefix);

}  // namespace rset
