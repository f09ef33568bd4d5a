#include "rset/controller/pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "rset/common/error.hpp"

namespace rset {

CandidatePool::CandidatePool(std::map<Emotion, std::vector<PoolEntry>> classes)
    : classes_(std::move(classes)) {
  bool first = true;
  for (auto& [emotion, list] : classes_) {
    for (const auto& entry : list) {
      require(std::isfinite(entry.intensity) && entry.intensity > 0.0 && entry.intensity < 1.0,
              ErrorKind::InvalidArgument,
              "pool intensity must lie in (0, 1) (utterance '" + entry.utterance_id + "')");
      if (first) {
        dim_ = static_cast<std::size_t>(entry.embedding.values.size());
        first = false;
      }
      require(static_cast<std::size_t>(entry.embedding.values.size()) == dim_ && dim_ > 0,
              ErrorKind::Shape, "pool embeddings must share one dimension");
    }
    std::stable_sort(list.begin(), list.end(), [](const PoolEntry& a, const PoolEntry& b) {
      return a.intensity < b.intensity;
    });
  }
}

const std::vector<PoolEntry>& CandidatePool::entries(Emotion e) const {
  const auto it = classes_.find(e);
  require(it != classes_.end(), ErrorKind::InvalidArgument,
          "class '" + std::string(to_string(e)) + "' is not in the candidate pool");
  return it->second;
}

std::size_t CandidatePool::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [e, list] : classes_) n += list.size();
  return n;
}

json CandidatePool::to_json() const {
  json out = json::object();
  for (const auto& [emotion, list] : classes_) {
    json arr = json::array();
    for (const auto& entry : list)
      arr.push_back(json{{"intensity", entry.intensity},
                         {"embedding", vector_to_json(entry.embedding.values)},
                         {"utterance_id", entry.utterance_id}});
    out[std::string(to_string(emotion))] = std::move(arr);
  }
  return out;
}

CandidatePool CandidatePool::from_json(const json& j) {
  require(j.is_object(), ErrorKind::Parse, "candidate pool: expected an object keyed by class");
  std::map<Emotion, std::vector<PoolEntry>> classes;
  for (const auto& [key, arr] : j.items()) {
    require(arr.is_array(), ErrorKind::Parse, "candidate pool: class '" + key + "' is not a list");
    auto& list = classes[parse_emotion(key)];
    for (const auto& item : arr)
      list.push_back({item.at("intensity").get<double>(),
                      {vector_from_json(item.at("embedding"), "pool embedding")},
                      item.value("utterance_id", std::string())});
  }
  return CandidatePool(std::move(classes));
}

CandidatePool build_pool(std::span<const EmbeddingRecord> embeddings, const IntensityTable& table) {
  std::unordered_map<std::string, const IntensityRow*> rows;
  for (const auto& r : table.rows) rows.emplace(r.utterance_id, &r);
  std::map<Emotion, std::vector<PoolEntry>> classes;
  for (const auto& rec : embeddings) {
    const auto it = rows.find(rec.utterance_id);
    require(it != rows.end() && it->second->remapped.has_value(), ErrorKind::InvalidArgument,
            "embedding '" + rec.utterance_id + "' has no remapped intensity");
    require(it->second->emotion == rec.emotion, ErrorKind::InvalidArgument,
            "embedding '" + rec.utterance_id + "' class disagrees with the intensity table");
    classes[rec.emotion].push_back({*it->second->remapped, rec.embedding, rec.utterance_id});
  }
  return CandidatePool(std::move(classes));
}

double adjust_intensity(double y_pred, double alpha) {
  require(alpha >= 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument,
          "control value alpha must be non-negative");
  require(y_pred > 0.0 && y_pred < 1.0, ErrorKind::InvalidArgument,
          "predicted intensity must lie in (0, 1)");
  return std::clamp(alpha * y_pred, kIntensityFloor, 1.0 - kIntensityFloor);
}

CandidateSelection select_candidates(const CandidatePool& pool, Emotion emotion, double target,
                                     std::size_t top_k) {
  require(top_k >= 1, ErrorKind::InvalidArgument, "top_k must be >= 1");
  const auto& list = pool.entries(emotion);
  require(!list.empty(), ErrorKind::InvalidArgument,
          "candidate list for '" + std::string(to_string(emotion)) + "' is empty");
  std::vector<std::size_t> order(list.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = std::abs(list[a].intensity - target);
    const double db = std::abs(list[b].intensity - target);
    if (da != db) return da < db;
    return list[a].intensity < list[b].intensity;
  });
  order.resize(std::min(top_k, order.size()));
  CandidateSelection out;
  for (const auto i : order) {
    out.keys.push_back(list[i].embedding);
    out.values.push_back(list[i].embedding);
    out.intensities.push_back(list[i].intensity);
    out.utterance_ids.push_back(list[i].utterance_id);
  }
  return out;
}

}  // namespace rset
