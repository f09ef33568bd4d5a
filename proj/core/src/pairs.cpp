#include "rset/dataset/pairs.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

#include "rset/common/error.hpp"

namespace rset {
namespace {

/// Floyd's algorithm: `count` distinct values from [0, population), sorted.
std::vector<std::uint64_t> sample_indices(std::uint64_t population, std::uint64_t count,
                                          std::mt19937_64& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count);
  for (std::uint64_t j = population - count; j < population; ++j) {
    std::uniform_int_distribution<std::uint64_t> dist(0, j);
    const auto t = dist(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Maps a flat index onto the (i < j) pairs of each group in order.
class SimilarPairSpace {
 public:
  explicit SimilarPairSpace(std::vector<std::vector<std::size_t>> groups)
      : groups_(std::move(groups)) {
    for (const auto& g : groups_) {
      const std::uint64_t n = g.size();
      offsets_.push_back(total_);
      total_ += n < 2 ? 0 : n * (n - 1) / 2;
    }
  }

  std::uint64_t size() const noexcept { return total_; }

  IndexPair at(std::uint64_t flat) const {
    std::size_t gi = 0;
    while (gi + 1 < groups_.size() && offsets_[gi + 1] <= flat) ++gi;
    std::uint64_t k = flat - offsets_[gi];
    const auto& g = groups_[gi];
    std::size_t i = 0;
    for (std::uint64_t row = g.size() - 1; k >= row; --row) {
      k -= row;
      ++i;
    }
    return {g[i], g[i + 1 + k]};
  }

  void append_all(std::vector<IndexPair>& out) const {
    for (const auto& g : groups_)
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) out.push_back({g[i], g[j]});
  }

 private:
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t total_ = 0;
};

}  // namespace

PairSet build_pair_sets(const Corpus& corpus, const PairSamplingConfig& config) {
  const auto neutral = corpus.indices_of(Emotion::Neutral);
  std::vector<Emotion> classes = corpus.emotion_classes();
  if (config.focus) {
    require(!is_neutral(*config.focus), ErrorKind::InvalidArgument,
            "pair focus must be a non-neutral class");
    classes = {*config.focus};
  }
  std::vector<std::size_t> emotional;
  std::vector<std::vector<std::size_t>> groups;
  for (const Emotion e : classes) {
    auto idx = corpus.indices_of(e);
    emotional.insert(emotional.end(), idx.begin(), idx.end());
    groups.push_back(std::move(idx));
  }
  std::sort(emotional.begin(), emotional.end());
  groups.push_back(neutral);

  require(!neutral.empty(), ErrorKind::InvalidArgument, "pair construction needs neutral samples");
  require(!emotional.empty(), ErrorKind::InvalidArgument,
          "pair construction needs non-neutral samples");

  const SimilarPairSpace similar(std::move(groups));
  const std::uint64_t ordered_total =
      static_cast<std::uint64_t>(emotional.size()) * neutral.size();

  bool exhaustive = config.mode == PairMode::Exhaustive;
  if (config.mode == PairMode::Auto) exhaustive = corpus.size() <= config.exhaustive_limit;

  PairSet out;
  if (exhaustive) {
    out.ordered.reserve(ordered_total);
    for (const auto i : emotional)
      for (const auto j : neutral) out.ordered.push_back({i, j});
    similar.append_all(out.similar);
    return out;
  }

  require(config.max_pairs_per_set > 0, ErrorKind::InvalidArgument,
          "max_pairs_per_set must be positive");
  std::mt19937_64 rng(config.seed);
  const auto o_count = std::min<std::uint64_t>(ordered_total, config.max_pairs_per_set);
  for (const auto flat : sample_indices(ordered_total, o_count, rng))
    out.ordered.push_back({emotional[flat / neutral.size()], neutral[flat % neutral.size()]});
  const auto m_count = std::min<std::uint64_t>(similar.size(), config.max_pairs_per_set);
  for (const auto flat : sample_indices(similar.size(), m_count, rng))
    out.similar.push_back(similar.at(flat));
  return out;
}

}  // namespace rset
