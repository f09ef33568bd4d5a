#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/dataset/corpus.hpp"
#include "rset/dataset/embeddings.hpp"
#include "rset/dataset/pairs.hpp"
#include "rset/dataset/synthetic.hpp"

using namespace rset;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rset_dataset_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

Utterance utt(std::string id, Emotion e, std::initializer_list<double> f) {
  Utterance u;
  u.id = std::move(id);
  u.speaker_id = "s0";
  u.emotion = e;
  u.features = Eigen::VectorXd(static_cast<Eigen::Index>(f.size()));
  Eigen::Index k = 0;
  for (const double v : f) u.features[k++] = v;
  return u;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("emotion labels parse case-insensitively") {
  CHECK(parse_emotion("ANGRY") == Emotion::Angry);
  CHECK(parse_emotion("Surprise") == Emotion::Surprise);
  CHECK_THROWS_AS(parse_emotion("bored"), Error);
}

TEST_CASE("load_corpus: minimal CSV") {
  const auto p = scratch("min.csv");
  write(p, "id,speaker,emotion,f0,f1,f2\nu1,s1,Neutral,1,2,3\nu2,s1,Angry,4,5,6\n");
  const auto c = load_corpus(p, CorpusFormat::Csv);
  CHECK(c.size() == 2);
  CHECK(c.feature_dim() == 3);
  CHECK(c.emotion_classes() == std::vector<Emotion>{Emotion::Angry});
  CHECK(c[0].id == "u1");
  CHECK(c[1].features[2] == 6.0);
}

TEST_CASE("load_corpus: ragged row names the row") {
  const auto p = scratch("ragged.csv");
  write(p, "id,speaker,emotion,f0,f1,f2\nu1,s1,neutral,1,2,3\nu2,s1,angry,4,5\n");
  try {
    load_corpus(p, CorpusFormat::Csv);
    FAIL("expected a ragged-row error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("load_corpus: missing file and unknown label") {
  CHECK_THROWS_AS(load_corpus(scratch("does_not_exist.csv"), CorpusFormat::Csv), Error);
  const auto p = scratch("badlabel.csv");
  write(p, "id,speaker,emotion,f0\nu1,s1,bored,1\n");
  CHECK_THROWS_AS(load_corpus(p, CorpusFormat::Csv), Error);
}

TEST_CASE("load_corpus: JSONL with the same keys") {
  const auto p = scratch("min.jsonl");
  write(p,
        "{\"id\":\"u1\",\"speaker\":\"s\",\"emotion\":\"neutral\",\"f0\":1.5,\"f1\":2}\n"
        "{\"id\":\"u2\",\"speaker\":\"s\",\"emotion\":\"HAPPY\",\"f0\":-1,\"f1\":0}\n");
  const auto c = load_corpus(p, CorpusFormat::Jsonl);
  CHECK(c.size() == 2);
  CHECK(c.feature_dim() == 2);
  CHECK(c[1].emotion == Emotion::Happy);
  CHECK(c[0].features[0] == 1.5);
}

TEST_CASE("load_corpus: 5 classes x 350 utterances") {
  SyntheticSpec spec;
  spec.per_class = 350;
  spec.neutral_count = 350;
  spec.feature_dim = 8;
  spec.noise = 0.1;
  const auto p = scratch("esd_shape.csv");
  write_corpus(synth_corpus(spec, 3), p, CorpusFormat::Csv);
  const auto c = load_corpus(p, CorpusFormat::Csv);
  CHECK(c.per_class_counts().size() == 5);
  for (const auto& [e, n] : c.per_class_counts()) CHECK(n == 350);
}

TEST_CASE("CSV round trip is exact") {
  SyntheticSpec spec;
  spec.per_class = 5;
  spec.neutral_count = 5;
  spec.noise = 0.3;
  const auto original = synth_corpus(spec, 11);
  const auto p = scratch("rt.csv");
  write_corpus(original, p, CorpusFormat::Csv);
  const auto back = load_corpus(p, CorpusFormat::Csv);
  REQUIRE(back.size() == original.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].features == original[i].features);
}

TEST_CASE("standardize_features") {
  SUBCASE("single utterance -> zeros") {
    const Corpus c({utt("a", Emotion::Neutral, {3.0, -2.0})}, 2);
    const auto [z, s] = standardize_features(c);
    CHECK(z[0].features.isZero(0.0));
  }
  SUBCASE("{0, 2} -> {-1, +1}") {
    const Corpus c({utt("a", Emotion::Neutral, {0.0}), utt("b", Emotion::Angry, {2.0})}, 1);
    const auto [z, s] = standardize_features(c);
    CHECK(z[0].features[0] == -1.0);
    CHECK(z[1].features[0] == 1.0);
  }
  SUBCASE("constant column with a non-representable value stays zero") {
    const Corpus c({utt("a", Emotion::Neutral, {0.1}), utt("b", Emotion::Angry, {0.1}),
                    utt("c", Emotion::Angry, {0.1})},
                   1);
    const auto [z, s] = standardize_features(c);
    CHECK(s.stds[0] == 0.0);
    for (const auto& u : z.utterances()) CHECK(u.features[0] == 0.0);
  }
  SUBCASE("stored scaler reproduces the standardized corpus bit for bit") {
    SyntheticSpec spec;
    spec.noise = 0.5;
    const auto c = synth_corpus(spec, 5);
    const auto [z, s] = standardize_features(c);
    const auto again = Scaler::from_json(s.to_json()).apply(c);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(again[i].features == z[i].features);
    // per-dimension moments
    for (Eigen::Index k = 0; k < 16; ++k) {
      double m = 0.0, v = 0.0;
      for (const auto& u : z.utterances()) m += u.features[k];
      m /= static_cast<double>(z.size());
      for (const auto& u : z.utterances()) v += (u.features[k] - m) * (u.features[k] - m);
      CHECK(oracle::near(m, 0.0, 1e-12));
      CHECK(std::sqrt(v / static_cast<double>(z.size())) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("empty corpus") { CHECK_THROWS_AS(standardize_features(Corpus({}, 3)), Error); }
}

TEST_CASE("build_pair_sets: smallest instance") {
  const Corpus c({utt("a", Emotion::Angry, {1.0}), utt("n", Emotion::Neutral, {0.0})}, 1);
  PairSamplingConfig cfg;
  cfg.mode = PairMode::Exhaustive;
  const auto p = build_pair_sets(c, cfg);
  REQUIRE(p.ordered.size() == 1);
  CHECK(p.ordered[0] == IndexPair{0, 1});
  CHECK(p.similar.empty());
}

TEST_CASE("build_pair_sets: 2 neutral + 2 angry exhaustive") {
  // O = {a1,a2} x {n1,n2} = 4 pairs; M = {(a1,a2), (n1,n2)} = 2 pairs.
  const Corpus c({utt("n1", Emotion::Neutral, {0.0}), utt("a1", Emotion::Angry, {1.0}),
                  utt("n2", Emotion::Neutral, {0.1}), utt("a2", Emotion::Angry, {1.1})},
                 1);
  PairSamplingConfig cfg;
  cfg.mode = PairMode::Exhaustive;
  const auto p = build_pair_sets(c, cfg);
  CHECK(p.ordered.size() == 4);
  CHECK(p.similar.size() == 2);
}

TEST_CASE("build_pair_sets: sampling is deterministic and label-consistent") {
  SyntheticSpec spec;
  spec.per_class = 40;
  spec.neutral_count = 30;
  const auto c = synth_corpus(spec, 1);
  PairSamplingConfig cfg;
  cfg.mode = PairMode::Sampled;
  cfg.seed = 7;
  cfg.max_pairs_per_set = 500;
  const auto a = build_pair_sets(c, cfg);
  const auto b = build_pair_sets(c, cfg);
  CHECK(a == b);
  CHECK(a.ordered.size() == 500);
  CHECK(a.similar.size() == 500);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& p : a.similar) seen.insert({p.first, p.second});
  CHECK(seen.size() == 500);  // without replacement

  cfg.seed = 8;
  CHECK_FALSE(build_pair_sets(c, cfg) == a);
}

TEST_CASE("build_pair_sets: exhaustive sizes and label invariants (exhaustive scan)") {
  SyntheticSpec spec;
  spec.per_class = 7;
  spec.neutral_count = 5;
  const auto c = synth_corpus(spec, 2);
  for (const auto mode : {PairMode::Exhaustive, PairMode::Sampled}) {
    PairSamplingConfig cfg;
    cfg.mode = mode;
    cfg.max_pairs_per_set = 40;
    const auto p = build_pair_sets(c, cfg);
    for (const auto& pr : p.ordered) {
      REQUIRE(pr.first < c.size());
      REQUIRE(pr.second < c.size());
      CHECK_FALSE(is_neutral(c[pr.first].emotion));
      CHECK(is_neutral(c[pr.second].emotion));
    }
    for (const auto& pr : p.similar) {
      REQUIRE(pr.first < c.size());
      REQUIRE(pr.second < c.size());
      CHECK(c[pr.first].emotion == c[pr.second].emotion);
      CHECK(pr.first != pr.second);
    }
    if (mode == PairMode::Exhaustive) {
      CHECK(p.ordered.size() == 28 * 5);
      CHECK(p.similar.size() == 4 * 21 + 10);
    }
  }
}

TEST_CASE("build_pair_sets: focus restricts to one class") {
  SyntheticSpec spec;
  spec.per_class = 4;
  spec.neutral_count = 3;
  const auto c = synth_corpus(spec, 2);
  PairSamplingConfig cfg;
  cfg.focus = Emotion::Sad;
  const auto p = build_pair_sets(c, cfg);
  CHECK(p.ordered.size() == 12);
  CHECK(p.similar.size() == 6 + 3);
  for (const auto& pr : p.ordered) CHECK(c[pr.first].emotion == Emotion::Sad);
}

TEST_CASE("build_pair_sets: errors") {
  const Corpus only_neutral({utt("n", Emotion::Neutral, {0.0})}, 1);
  const Corpus only_angry({utt("a", Emotion::Angry, {0.0})}, 1);
  CHECK_THROWS_AS(build_pair_sets(only_neutral, {}), Error);
  CHECK_THROWS_AS(build_pair_sets(only_angry, {}), Error);
}

TEST_CASE("synth_corpus") {
  SUBCASE("zero noise reproduces multiples of the direction") {
    SyntheticSpec spec;
    spec.classes = {Emotion::Angry};
    spec.neutral_count = 0;
    spec.feature_dim = 4;
    spec.fixed_latents[Emotion::Angry] = {1.0, 2.0, 3.0};
    const auto c = synth_corpus(spec, 9);
    const auto w = synthetic_direction(spec, 9);
    REQUIRE(c.size() == 3);
    CHECK(c[0].features == w);
    CHECK(c[1].features == 2.0 * w);
    CHECK(c[2].features == 3.0 * w);
  }
  SUBCASE("determinism") {
    SyntheticSpec spec;
    spec.noise = 0.2;
    const auto a = synth_corpus(spec, 42);
    const auto b = synth_corpus(spec, 42);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].features == b[i].features);
      CHECK(a[i].latent_intensity == b[i].latent_intensity);
    }
  }
  SUBCASE("margin 1, zero noise: every O pair separable by the direction") {
    SyntheticSpec spec;
    spec.intra_spread = 0.8;
    const auto c = synth_corpus(spec, 4);
    const auto w = synthetic_direction(spec, 4);
    PairSamplingConfig cfg;
    cfg.mode = PairMode::Exhaustive;
    double min_margin = 1e300;
    for (const auto& p : build_pair_sets(c, cfg).ordered)
      min_margin = std::min(min_margin, w.dot(c[p.first].features) - w.dot(c[p.second].features));
    CHECK(min_margin >= 1.0 - 1e-12);
  }
  SUBCASE("zero noise: within-class Kendall tau of 1") {
    SyntheticSpec spec;
    spec.intra_spread = 0.5;
    const auto c = synth_corpus(spec, 8);
    const auto w = synthetic_direction(spec, 8);
    for (const Emotion e : kAllEmotions) {
      std::vector<double> lat, proj;
      for (const auto i : c.indices_of(e)) {
        lat.push_back(*c[i].latent_intensity);
        proj.push_back(w.dot(c[i].features));
      }
      CHECK(oracle::kendall_no_ties(lat, proj) == 1.0);
      CHECK(kendall_tau(lat, proj) == doctest::Approx(1.0));
    }
  }
  SUBCASE("invalid recipes") {
    SyntheticSpec spec;
    spec.feature_dim = 0;
    CHECK_THROWS_AS(synth_corpus(spec, 1), Error);
    spec = {};
    spec.per_class = 0;
    CHECK_THROWS_AS(synth_corpus(spec, 1), Error);
  }
}

TEST_CASE("embedding tables round trip") {
  EmbeddingTable t;
  t.add("a", Eigen::Vector3d(0.1, -2.5, 1e-7));
  t.add("b", Eigen::Vector3d(4, 5, 6));
  const auto p = scratch("emb.csv");
  write_embeddings(t, p, 'e');
  const auto back = load_embeddings(p);
  CHECK(back.ids() == t.ids());
  CHECK(back.at("a") == t.at("a"));
  CHECK_THROWS_AS(back.at("zzz"), Error);
  CHECK_THROWS_AS(t.add("c", Eigen::Vector2d(1, 2)), Error);
}

TEST_CASE("kendall_tau handles ties and reversal") {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> r{4, 3, 2, 1};
  CHECK(kendall_tau(a, r) == doctest::Approx(-1.0));
  const std::vector<double> t{1, 1, 2, 2};
  // tau-b: C=4, D=0, ties only in t: 2 -> 4/sqrt(6*4)
  CHECK(kendall_tau(a, t) == doctest::Approx(4.0 / std::sqrt(24.0)));
}

}  // TEST_SUITE
