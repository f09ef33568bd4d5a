#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rset/common/serialize.hpp"
#include "rset/dataset/corpus.hpp"
#include "rset/ranker/ranker.hpp"

namespace rset {

struct IntensityRow {
  std::string utterance_id;
  Emotion emotion = Emotion::Angry;
  double raw = 0.0;
  /// Filled by remap(); strictly inside (0, 1).
  std::optional<double> remapped;
};

struct IntensityTable {
  std::vector<IntensityRow> rows;

  bool empty() const noexcept { return rows.empty(); }
  bool is_remapped() const noexcept;
  /// Throws Error(InvalidArgument) for an unknown id.
  const IntensityRow& find(const std::string& utterance_id) const;

  json to_json() const;
  static IntensityTable from_json(const json& j);
  /// `utterance_id,class,raw,remapped`
  std::string to_csv() const;
};

struct ClassStats {
  std::map<Emotion, double> means;
};

/// Score every non-neutral utterance with its class model. Neutral rows are
/// excluded. Throws Error(InvalidArgument) if a class has no model.
IntensityTable raw_intensities(const RankerBank& models, const Corpus& corpus);
IntensityTable raw_intensities(const RankingModel& model, const Corpus& corpus);

/// Per-class arithmetic mean of raw. Throws on an empty table.
ClassStats class_means(const IntensityTable& table);

/// remapped = sigmoid(raw - mean[class]).
IntensityTable remap(const IntensityTable& table, const ClassStats& stats);

/// Per class, the fraction of rows with |remapped - 0.5| > threshold.
std::map<Emotion, double> saturation_fraction(const IntensityTable& table, double threshold = 0.49);

}  // namespace rset
