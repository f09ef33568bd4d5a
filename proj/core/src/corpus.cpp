#include "rset/dataset/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rset/common/error.hpp"

namespace rset {

Corpus::Corpus(std::vector<Utterance> utterances, std::size_t feature_dim)
    : utterances_(std::move(utterances)), feature_dim_(feature_dim) {
  require(feature_dim_ >= 1, ErrorKind::InvalidArgument, "feature dimension must be >= 1");
  std::set<Emotion> present;
  for (std::size_t i = 0; i < utterances_.size(); ++i) {
    const auto& u = utterances_[i];
    require(static_cast<std::size_t>(u.features.size()) == feature_dim_, ErrorKind::Shape,
            "utterance '" + u.id + "' has " + std::to_string(u.features.size()) +
                " features, expected " + std::to_string(feature_dim_));
    require(u.features.allFinite(), ErrorKind::Numerical,
            "utterance '" + u.id + "' has non-finite features");
    ++counts_[u.emotion];
    present.insert(u.emotion);
  }
  for (const Emotion e : kAllEmotions)
    if (!is_neutral(e) && present.contains(e)) classes_.push_back(e);
}

std::vector<std::size_t> Corpus::indices_of(Emotion e) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < utterances_.size(); ++i)
    if (utterances_[i].emotion == e) out.push_back(i);
  return out;
}

bool Corpus::has_latent() const noexcept {
  return !utterances_.empty() &&
         std::all_of(utterances_.begin(), utterances_.end(),
                     [](const Utterance& u) { return u.latent_intensity.has_value(); });
}

CorpusFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? CorpusFormat::Jsonl : CorpusFormat::Csv;
}

namespace {

std::size_t feature_index(std::string_view key) {
  // "f<digits>" -> index, npos otherwise
  if (key.size() < 2 || key.front() != 'f') return std::string_view::npos;
  std::size_t v = 0;
  for (const char c : key.substr(1)) {
    if (c < '0' || c > '9') return std::string_view::npos;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

Corpus load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open corpus " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse,
          path.string() + ": missing header");
  const auto header = split_csv_line(line);
  require(header.size() >= 4 && header[0] == "id" && header[1] == "speaker" &&
              header[2] == "emotion",
          ErrorKind::Parse, path.string() + ": header must start with id,speaker,emotion");
  const std::size_t dim = header.size() - 3;
  for (std::size_t k = 0; k < dim; ++k)
    require(feature_index(header[3 + k]) == k, ErrorKind::Parse,
            path.string() + ": expected feature column f" + std::to_string(k) + ", got '" +
                header[3 + k] + "'");

  std::vector<Utterance> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto fields = split_csv_line(line);
    require(fields.size() == header.size(), ErrorKind::Parse,
            path.string() + ": row " + std::to_string(row) + " has " +
                std::to_string(fields.size() >= 3 ? fields.size() - 3 : 0) +
                " feature values, expected " + std::to_string(dim));
    Utterance u;
    u.id = fields[0];
    u.speaker_id = fields[1];
    u.emotion = parse_emotion(fields[2]);
    u.features.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      double v = 0.0;
      require(parse_double(fields[3 + k], v), ErrorKind::Parse,
              path.string() + ": row " + std::to_string(row) + " column " + header[3 + k] +
                  " is not a number");
      u.features[static_cast<Eigen::Index>(k)] = v;
    }
    rows.push_back(std::move(u));
  }
  return Corpus(std::move(rows), dim);
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open corpus " + path.string());
  std::string line;
  std::vector<Utterance> rows;
  std::size_t dim = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, path.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
    const auto where = path.string() + ": row " + std::to_string(row);
    require(j.is_object() && j.contains("id") && j.contains("speaker") && j.contains("emotion"),
            ErrorKind::Parse, where + " lacks id/speaker/emotion");
    std::size_t count = 0;
    for (const auto& item : j.items())
      if (feature_index(item.key()) != std::string_view::npos) ++count;
    if (row == 1) dim = count;
    require(count == dim && dim > 0, ErrorKind::Parse,
            where + " has " + std::to_string(count) + " feature values, expected " +
                std::to_string(dim));
    Utterance u;
    u.id = j.at("id").get<std::string>();
    u.speaker_id = j.at("speaker").get<std::string>();
    u.emotion = parse_emotion(j.at("emotion").get<std::string>());
    u.features.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      const auto key = "f" + std::to_string(k);
      require(j.contains(key) && j.at(key).is_number(), ErrorKind::Parse,
              where + " is missing numeric " + key);
      u.features[static_cast<Eigen::Index>(k)] = j.at(key).get<double>();
    }
    rows.push_back(std::move(u));
  }
  require(!rows.empty(), ErrorKind::Parse, path.string() + ": no rows");
  return Corpus(std::move(rows), dim);
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  require(std::filesystem::exists(path), ErrorKind::Io, "corpus file not found: " + path.string());
  return format == CorpusFormat::Csv ? load_csv(path) : load_jsonl(path);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  std::ostringstream out;
  const auto dim = corpus.feature_dim();
  if (format == CorpusFormat::Csv) {
    out << "id,speaker,emotion";
    for (std::size_t k = 0; k < dim; ++k) out << ",f" << k;
    out << '\n';
    for (const auto& u : corpus.utterances()) {
      out << u.id << ',' << u.speaker_id << ',' << to_string(u.emotion);
      for (Eigen::Index k = 0; k < u.features.size(); ++k) out << ',' << format_double(u.features[k]);
      out << '\n';
    }
  } else {
    for (const auto& u : corpus.utterances()) {
      json j = json::object();
      j["id"] = u.id;
      j["speaker"] = u.speaker_id;
      j["emotion"] = to_string(u.emotion);
      for (Eigen::Index k = 0; k < u.features.size(); ++k) j["f" + std::to_string(k)] = u.features[k];
      out << j.dump() << '\n';
    }
  }
  write_text_file(path, out.str());
}

void write_latent(const Corpus& corpus, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "id,latent\n";
  for (const auto& u : corpus.utterances()) {
    require(u.latent_intensity.has_value(), ErrorKind::InvalidArgument,
            "utterance '" + u.id + "' has no latent intensity");
    out << u.id << ',' << format_double(*u.latent_intensity) << '\n';
  }
  write_text_file(path, out.str());
}

std::map<std::string, double> load_latent(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open latent file " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && split_csv_line(line).size() == 2,
          ErrorKind::Parse, path.string() + ": header must be id,latent");
  std::map<std::string, double> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto f = split_csv_line(line);
    double v = 0.0;
    require(f.size() == 2 && parse_double(f[1], v), ErrorKind::Parse,
            path.string() + ": malformed row " + std::to_string(row));
    out[f[0]] = v;
  }
  return out;
}

Corpus with_latent(const Corpus& corpus, const std::map<std::string, double>& latent) {
  auto rows = corpus.utterances();
  for (auto& u : rows) {
    const auto it = latent.find(u.id);
    if (it != latent.end()) u.latent_intensity = it->second;
  }
  return Corpus(std::move(rows), corpus.feature_dim());
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& features) const {
  require(features.size() == means.size(), ErrorKind::Shape,
          "scaler expects " + std::to_string(means.size()) + " features, got " +
              std::to_string(features.size()));
  Eigen::VectorXd out(features.size());
  for (Eigen::Index k = 0; k < features.size(); ++k)
    out[k] = stds[k] > 0.0 ? (features[k] - means[k]) / stds[k] : 0.0;
  return out;
}

Corpus Scaler::apply(const Corpus& corpus) const {
  auto rows = corpus.utterances();
  for (auto& u : rows) u.features = apply(u.features);
  return Corpus(std::move(rows), corpus.feature_dim());
}

json Scaler::to_json() const {
  return json{{"means", vector_to_json(means)}, {"stds", vector_to_json(stds)}};
}

Scaler Scaler::from_json(const json& j) {
  require(j.is_object() && j.contains("means") && j.contains("stds"), ErrorKind::Parse,
          "scaler: expected {means, stds}");
  Scaler s{vector_from_json(j.at("means"), "scaler.means"),
           vector_from_json(j.at("stds"), "scaler.stds")};
  require(s.means.size() == s.stds.size() && s.means.size() > 0, ErrorKind::Parse,
          "scaler: means/stds length mismatch");
  require((s.stds.array() >= 0.0).all(), ErrorKind::Parse, "scaler: negative std");
  return s;
}

std::pair<Corpus, Scaler> standardize_features(const Corpus& corpus) {
  require(!corpus.empty(), ErrorKind::InvalidArgument, "cannot standardize an empty corpus");
  const auto d = static_cast<Eigen::Index>(corpus.feature_dim());
  const double n = static_cast<double>(corpus.size());
  Scaler scaler{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  for (const auto& u : corpus.utterances()) scaler.means += u.features;
  scaler.means /= n;
  for (const auto& u : corpus.utterances())
    scaler.stds.array() += (u.features - scaler.means).array().square();
  scaler.stds = (scaler.stds / n).cwiseSqrt();
  // Rounding in the mean leaves a tiny residual spread on constant columns.
  for (Eigen::Index k = 0; k < d; ++k)
    if (scaler.stds[k] <= 1e-12 * (1.0 + std::abs(scaler.means[k]))) scaler.stds[k] = 0.0;
  return {scaler.apply(corpus), scaler};
}

}  // namespace rset
