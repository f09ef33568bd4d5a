#include "rset/remap/remap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"

namespace rset {

bool IntensityTable::is_remapped() const noexcept {
  return std::all_of(rows.begin(), rows.end(),
                     [](const IntensityRow& r) { return r.remapped.has_value(); });
}

const IntensityRow& IntensityTable::find(const std::string& utterance_id) const {
  const auto it = std::find_if(rows.begin(), rows.end(), [&](const IntensityRow& r) {
    return r.utterance_id == utterance_id;
  });
  require(it != rows.end(), ErrorKind::InvalidArgument,
          "no intensity row for utterance '" + utterance_id + "'");
  return *it;
}

json IntensityTable::to_json() const {
  json arr = json::array();
  for (const auto& r : rows) {
    json row{{"utterance_id", r.utterance_id},
             {"class", std::string(to_string(r.emotion))},
             {"raw", r.raw}};
    row["remapped"] = r.remapped ? json(*r.remapped) : json(nullptr);
    arr.push_back(std::move(row));
  }
  return json{{"rows", std::move(arr)}};
}

IntensityTable IntensityTable::from_json(const json& j) {
  require(j.is_object() && j.contains("rows") && j.at("rows").is_array(), ErrorKind::Parse,
          "intensity table: expected {rows: [...]}");
  IntensityTable t;
  for (const auto& r : j.at("rows")) {
    IntensityRow row;
    row.utterance_id = r.at("utterance_id").get<std::string>();
    row.emotion = parse_emotion(r.at("class").get<std::string>());
    row.raw = r.at("raw").get<double>();
    if (r.contains("remapped") && !r.at("remapped").is_null()) row.remapped = r.at("remapped").get<double>();
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string IntensityTable::to_csv() const {
  std::ostringstream out;
  out << "utterance_id,class,raw,remapped\n";
  for (const auto& r : rows)
    out << r.utterance_id << ',' << to_string(r.emotion) << ',' << format_double(r.raw) << ','
        << (r.remapped ? format_double(*r.remapped) : std::string()) << '\n';
  return out.str();
}

IntensityTable raw_intensities(const RankerBank& models, const Corpus& corpus) {
  IntensityTable t;
  for (const auto& u : corpus.utterances()) {
    if (is_neutral(u.emotion)) continue;
    t.rows.push_back({u.id, u.emotion, score(models.model_for(u.emotion), u.features), std::nullopt});
  }
  return t;
}

IntensityTable raw_intensities(const RankingModel& model, const Corpus& corpus) {
  RankerBank bank;
  bank.joint = model;
  return raw_intensities(bank, corpus);
}

ClassStats class_means(const IntensityTable& table) {
  require(!table.empty(), ErrorKind::InvalidArgument, "class_means of an empty table");
  std::map<Emotion, std::pair<double, std::size_t>> acc;
  for (const auto& r : table.rows) {
    auto& [sum, n] = acc[r.emotion];
    sum += r.raw;
    ++n;
  }
  ClassStats stats;
  for (const auto& [e, a] : acc) stats.means[e] = a.first / static_cast<double>(a.second);
  return stats;
}

IntensityTable remap(const IntensityTable& table, const ClassStats& stats) {
  IntensityTable out = table;
  for (auto& r : out.rows) {
    const auto it = stats.means.find(r.emotion);
    require(it != stats.means.end(), ErrorKind::InvalidArgument,
            "class '" + std::string(to_string(r.emotion)) + "' missing from class stats");
    r.remapped = sigmoid(r.raw - it->second);
  }
  return out;
}

std::map<Emotion, double> saturation_fraction(const IntensityTable& table, double threshold) {
  std::map<Emotion, std::pair<std::size_t, std::size_t>> acc;
  for (const auto& r : table.rows) {
    require(r.remapped.has_value(), ErrorKind::InvalidArgument,
            "saturation_fraction needs a remapped table");
    auto& [hit, n] = acc[r.emotion];
    hit += std::abs(*r.remapped - 0.5) > threshold ? 1 : 0;
    ++n;
  }
  std::map<Emotion, double> out;
  for (const auto& [e, a] : acc) out[e] = static_cast<double>(a.first) / static_cast<double>(a.second);
  return out;
}

}  // namespace rset
