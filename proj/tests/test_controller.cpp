#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/controller/attention.hpp"
#include "rset/controller/extractor.hpp"
#include "rset/controller/mixing.hpp"
#include "rset/controller/nlinear.hpp"
#include "rset/controller/pool.hpp"
#include "rset/decouple/grad_check.hpp"

using namespace rset;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

EmotionEmbedding emb(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (const double d : v) x[k++] = d;
  return {x};
}

CandidatePool pool_of(std::vector<double> intensities) {
  std::vector<PoolEntry> list;
  for (std::size_t i = 0; i < intensities.size(); ++i)
    list.push_back({intensities[i], emb({static_cast<double>(i), 1.0}), "u" + std::to_string(i)});
  return CandidatePool({{Emotion::Angry, list}});
}

// Sequences whose mean level encodes the intensity label; class shifts a
// per-class channel pattern.
std::vector<ExtractorSample> synthetic_sequences(std::size_t n, std::size_t window, std::size_t channels,
                                                 std::size_t classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> label(0.1, 0.9);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::mt19937_64 pattern_rng(1234);
  const Eigen::MatrixXd patterns = random_matrix(pattern_rng, static_cast<Eigen::Index>(classes),
                                                 static_cast<Eigen::Index>(channels));
  std::vector<ExtractorSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    ExtractorSample s;
    s.class_index = i % classes;
    s.intensity = label(rng);
    s.sequence.resize(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(channels));
    for (Eigen::Index t = 0; t < s.sequence.rows(); ++t)
      for (Eigen::Index c = 0; c < s.sequence.cols(); ++c)
        s.sequence(t, c) = 4.0 * (s.intensity - 0.5) + patterns(static_cast<Eigen::Index>(s.class_index), c) + noise(rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_SUITE("controller") {

TEST_CASE("sample_lambda and BetaSampler") {
  BetaSampler uniform({1.0, 1.0}, 123);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = uniform.next();
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
  }
  CHECK(std::abs(sum / 10000.0 - 0.5) <= 0.02);

  BetaSampler sym({3.0, 3.0}, 9);
  sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += sym.next();
  CHECK(std::abs(sum / 10000.0 - 0.5) <= 0.02);

  BetaSampler skew({2.0, 6.0}, 9);
  sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += skew.next();
  CHECK(std::abs(sum / 10000.0 - 0.25) <= 0.02);

  BetaSampler a({1, 1}, 77), b({1, 1}, 77);
  for (int i = 0; i < 50; ++i) CHECK(a.next() == b.next());
  CHECK(sample_lambda({1, 1}, 77) == BetaSampler({1, 1}, 77).next());

  CHECK_THROWS_AS(BetaSampler({0.0, 1.0}, 1), Error);
  CHECK_THROWS_AS(sample_lambda({1.0, -2.0}, 1), Error);
}

TEST_CASE("mix_emotions") {
  const auto ei = emb({4, 0}), ej = emb({0, 4});
  CHECK(mix_emotions(ei, ej, 1.0).values == ei.values);
  CHECK(mix_emotions(ei, ej, 0.0).values == ej.values);
  CHECK(mix_emotions(ei, ej, 0.25).values == Eigen::Vector2d(1, 3));
  CHECK_THROWS_AS(mix_emotions(ei, emb({1, 2, 3}), 0.5), Error);
  CHECK_THROWS_AS(mix_emotions(ei, ej, 1.5), Error);
  CHECK_THROWS_AS(mix_emotions(ei, ej, -0.1), Error);
}

TEST_CASE("NLinear") {
  std::mt19937_64 rng(3);
  SUBCASE("zero map on a constant sequence returns the constant") {
    const auto nl = NLinear::zeros(6, 6);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 3, 2.5);
    CHECK(nl.forward(x) == x);
  }
  SUBCASE("identity map returns the input exactly") {
    const auto nl = NLinear::identity(5);
    Eigen::MatrixXd ints(5, 4);
    for (Eigen::Index i = 0; i < ints.size(); ++i) ints.data()[i] = static_cast<double>((i * 7) % 11) - 5.0;
    CHECK(nl.forward(ints) == ints);
    const auto x = random_matrix(rng, 5, 4);
    CHECK((nl.forward(x) - x).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("shift equivariance") {
    const auto nl = NLinear::random(8, 8, 4);
    for (int t = 0; t < 20; ++t) {
      const auto x = random_matrix(rng, 8, 3);
      const double c = random_vector(rng, 1, 5.0)[0];
      const Eigen::MatrixXd shifted = (x.array() + c).matrix();
      const Eigen::MatrixXd diff = nl.forward(shifted) - nl.forward(x);
      CHECK((diff.array() - c).abs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("independent evaluation of the formula") {
    auto nl = NLinear::random(6, 4, 8);
    Eigen::VectorXd p = nl.parameters();
    p.tail(4) = random_vector(rng, 4);
    nl.set_parameters(p);
    const auto x = random_matrix(rng, 6, 3);
    const auto y = nl.forward(x);
    for (Eigen::Index h = 0; h < 4; ++h)
      for (Eigen::Index c = 0; c < 3; ++c) {
        double acc = nl.bias()[h] + x(5, c);
        for (Eigen::Index t = 0; t < 6; ++t) acc += nl.weight()(h, t) * (x(t, c) - x(5, c));
        CHECK(oracle::near(y(h, c), acc, 1e-12));
      }
  }
  SUBCASE("wrong window") { CHECK_THROWS_AS(NLinear::identity(4).forward(Eigen::MatrixXd::Zero(5, 2)), Error); }
  SUBCASE("gradient check at 3 random points") {
    for (std::uint64_t seed : {1, 2, 3}) {
      auto nl = NLinear::random(7, 5, seed);
      const auto x = random_matrix(rng, 7, 3);
      const auto target = random_matrix(rng, 5, 3);
      const auto loss = [&](const Eigen::VectorXd& p) {
        NLinear m = nl;
        m.set_parameters(p);
        const Eigen::MatrixXd r = m.forward(x) - target;
        LossWithGradient out{0.5 * r.squaredNorm(), Eigen::VectorXd::Zero(p.size())};
        m.backward(x, r, out.gradient);
        return out;
      };
      const auto report = grad_check(nl.parameters(), loss, 1e-4);
      CHECK(report.pass);
    }
  }
  SUBCASE("json round trip") {
    const auto nl = NLinear::random(5, 3, 12);
    const auto back = NLinear::from_json(json::parse(nl.to_json().dump()));
    CHECK(back.weight() == nl.weight());
    CHECK(back.bias() == nl.bias());
  }
}

TEST_CASE("extract_intensity") {
  auto model = ExtractorModel::create(8, 4, 16, 5);
  std::mt19937_64 rng(6);
  SUBCASE("zero head gives 0.5") {
    Eigen::VectorXd p = model.parameters();
    const auto head = static_cast<Eigen::Index>(model.head().parameter_count());
    p.tail(head).setZero();
    model.set_parameters(p);
    CHECK(extract_intensity(model, random_matrix(rng, 8, 4)) == 0.5);
  }
  SUBCASE("range holds on 1000 random inputs") {
    for (int i = 0; i < 1000; ++i) {
      const double y = extract_intensity(model, random_matrix(rng, 8, 4, 1.0 + (i % 10) * 10.0));
      REQUIRE(y > 0.0);
      REQUIRE(y < 1.0);
    }
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(extract_intensity(model, Eigen::MatrixXd::Zero(7, 4)), Error);
    CHECK_THROWS_AS(extract_intensity(model, Eigen::MatrixXd::Zero(8, 3)), Error);
  }
}

TEST_CASE("classify_emotion") {
  auto model = ClassifierModel::create(6, 3, 4, 7);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto p = classify_emotion(model, random_matrix(rng, 6, 3, 3.0));
    CHECK((p.array() >= 0.0).all());
    CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
  }
  Eigen::VectorXd params = model.parameters();
  const auto aff = static_cast<Eigen::Index>(model.affine().parameter_count());
  params.tail(aff).setZero();
  model.set_parameters(params);
  const auto uniform = classify_emotion(model, random_matrix(rng, 6, 3));
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(oracle::near(uniform[k], 0.25, 1e-15));

  const Eigen::Vector3d z(0.3, -1.2, 2.0);
  const Eigen::Vector3d shifted = (z.array() + 17.5).matrix();
  CHECK((softmax(z) - softmax(shifted)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(classify_emotion(model, Eigen::MatrixXd::Zero(5, 3)), Error);
}

TEST_CASE("training losses have correct gradients at 3 random points") {
  const auto data = synthetic_sequences(6, 5, 3, 3, 1);
  for (std::uint64_t seed : {11, 12, 13}) {
    const auto ex = ExtractorModel::create(5, 3, 6, seed);
    const auto ex_loss = [&](const Eigen::VectorXd& p) {
      auto m = ex;
      m.set_parameters(p);
      return intensity_loss(m, data);
    };
    const auto r1 = grad_check(ex.parameters(), ex_loss, 1e-4);
    CHECK_MESSAGE(r1.pass, "extractor max rel err " << r1.max_rel_err);

    const auto cl = ClassifierModel::create(5, 3, 3, seed);
    const auto cl_loss = [&](const Eigen::VectorXd& p) {
      auto m = cl;
      m.set_parameters(p);
      return classification_loss(m, data);
    };
    const auto r2 = grad_check(cl.parameters(), cl_loss, 1e-4);
    CHECK_MESSAGE(r2.pass, "classifier max rel err " << r2.max_rel_err);
  }
}

TEST_CASE("train_extractor") {
  ExtractorOptions opts;
  opts.hidden = 16;
  opts.seed = 21;

  SUBCASE("losses are non-increasing and the fit beats the constant baseline") {
    const auto train = synthetic_sequences(60, 8, 4, 3, 2);
    const auto valid = synthetic_sequences(40, 8, 4, 3, 3);
    const auto r = train_extractor(train, opts);
    for (std::size_t i = 1; i < r.intensity_loss_history.size(); ++i) {
      CHECK(r.intensity_loss_history[i] <= r.intensity_loss_history[i - 1]);
      CHECK(r.class_loss_history[i] <= r.class_loss_history[i - 1]);
    }
    double mse = 0.0, baseline = 0.0;
    std::size_t correct = 0;
    for (const auto& s : valid) {
      const double y = extract_intensity(r.extractor, s.sequence);
      mse += (y - s.intensity) * (y - s.intensity);
      baseline += (0.5 - s.intensity) * (0.5 - s.intensity);
      const auto p = classify_emotion(r.classifier, s.sequence);
      Eigen::Index arg = 0;
      p.maxCoeff(&arg);
      correct += static_cast<std::size_t>(arg) == s.class_index;
    }
    CHECK(mse < baseline);
    CHECK(static_cast<double>(correct) / static_cast<double>(valid.size()) >= 0.95);
  }
  SUBCASE("a single repeated pair is memorized within 500 epochs") {
    auto one = synthetic_sequences(1, 8, 4, 2, 4);
    one[0].intensity = 0.8;
    std::vector<ExtractorSample> data(5, one[0]);
    opts.epochs = 500;
    opts.num_classes = 2;
    const auto r = train_extractor(data, opts);
    CHECK(r.intensity_loss_history.back() < 1e-6);
  }
  SUBCASE("determinism") {
    const auto data = synthetic_sequences(10, 8, 4, 2, 5);
    opts.epochs = 20;
    const auto a = train_extractor(data, opts);
    const auto b = train_extractor(data, opts);
    CHECK(a.extractor.parameters() == b.extractor.parameters());
    CHECK(a.classifier.parameters() == b.classifier.parameters());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(train_extractor({}, opts), Error);
    auto data = synthetic_sequences(3, 8, 4, 2, 5);
    data[1].sequence = Eigen::MatrixXd::Zero(7, 4);
    CHECK_THROWS_AS(train_extractor(data, opts), Error);
  }
  SUBCASE("json round trip") {
    const auto m = ExtractorModel::create(4, 2, 3, 1);
    CHECK(ExtractorModel::from_json(json::parse(m.to_json().dump())).parameters() == m.parameters());
    const auto c = ClassifierModel::create(4, 2, 3, 1);
    CHECK(ClassifierModel::from_json(json::parse(c.to_json().dump())).parameters() == c.parameters());
  }
}

TEST_CASE("candidate pool") {
  SUBCASE("sorted ascending") {
    const auto pool = pool_of({0.9, 0.2, 0.5});
    const auto& e = pool.entries(Emotion::Angry);
    CHECK(e[0].intensity == 0.2);
    CHECK(e[1].intensity == 0.5);
    CHECK(e[2].intensity == 0.9);
  }
  SUBCASE("ties keep input order") {
    const auto pool = pool_of({0.5, 0.3, 0.5, 0.5});
    const auto& e = pool.entries(Emotion::Angry);
    CHECK(e[1].utterance_id == "u0");
    CHECK(e[2].utterance_id == "u2");
    CHECK(e[3].utterance_id == "u3");
  }
  SUBCASE("json round trip is bit exact") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
    std::vector<double> xs(50);
    for (auto& x : xs) x = u(rng);
    std::vector<PoolEntry> list;
    for (std::size_t i = 0; i < xs.size(); ++i) list.push_back({xs[i], {random_vector(rng, 6)}, std::to_string(i)});
    const CandidatePool pool({{Emotion::Sad, list}});
    const auto back = CandidatePool::from_json(json::parse(pool.to_json().dump()));
    const auto& a = pool.entries(Emotion::Sad);
    const auto& b = back.entries(Emotion::Sad);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].intensity == b[i].intensity);
      CHECK(a[i].embedding.values == b[i].embedding.values);
      CHECK(a[i].utterance_id == b[i].utterance_id);
    }
    CHECK(back.to_json().dump() == pool.to_json().dump());
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(pool_of({0.0, 0.5}), Error);
    CHECK_THROWS_AS(pool_of({1.0}), Error);
    std::vector<PoolEntry> mixed{{0.4, emb({1, 2}), "a"}, {0.6, emb({1, 2, 3}), "b"}};
    CHECK_THROWS_AS(CandidatePool({{Emotion::Angry, mixed}}), Error);
    CHECK_THROWS_AS(pool_of({0.5}).entries(Emotion::Happy), Error);
  }
  SUBCASE("build_pool") {
    IntensityTable t;
    t.rows = {{"a", Emotion::Angry, 0.0, 0.9}, {"b", Emotion::Angry, 0.0, 0.2}, {"c", Emotion::Sad, 0.0, 0.5}};
    std::vector<EmbeddingRecord> recs{{"a", Emotion::Angry, emb({1, 0})},
                                      {"b", Emotion::Angry, emb({0, 1})},
                                      {"c", Emotion::Sad, emb({1, 1})}};
    const auto pool = build_pool(recs, t);
    CHECK(pool.size() == 3);
    CHECK(pool.entries(Emotion::Angry)[0].utterance_id == "b");
    recs.push_back({"zzz", Emotion::Angry, emb({0, 0})});
    CHECK_THROWS_AS(build_pool(recs, t), Error);
    recs.pop_back();
    recs[2].emotion = Emotion::Happy;
    CHECK_THROWS_AS(build_pool(recs, t), Error);
  }
}

TEST_CASE("adjust_intensity") {
  CHECK(adjust_intensity(0.37, 1.0) == 0.37);
  CHECK(adjust_intensity(0.37, 0.0) == kIntensityFloor);
  CHECK(adjust_intensity(0.9, 5.0) == 1.0 - kIntensityFloor);
  const double expected[] = {0.1, 0.2, 0.3, 0.4};
  const double alphas[] = {0.2, 0.4, 0.6, 0.8};
  for (int i = 0; i < 4; ++i) CHECK(oracle::near(adjust_intensity(0.5, alphas[i]), expected[i], 1e-15));
  CHECK_THROWS_AS(adjust_intensity(0.5, -0.1), Error);
  CHECK_THROWS_AS(adjust_intensity(1.5, 1.0), Error);

  // monotone in alpha and in y_pred
  for (double y = 0.01; y < 1.0; y += 0.07)
    for (double a = 0.0; a < 3.0; a += 0.1) {
      CHECK(adjust_intensity(y, a) <= adjust_intensity(y, a + 0.1));
      CHECK(adjust_intensity(y, a) <= adjust_intensity(std::min(y + 0.05, 0.999), a));
    }
}

TEST_CASE("select_candidates") {
  const auto pool = pool_of({0.2, 0.5, 0.9});
  CHECK(select_candidates(pool, Emotion::Angry, 0.55, 1).intensities == std::vector<double>{0.5});
  CHECK(select_candidates(pool, Emotion::Angry, 0.35, 1).intensities == std::vector<double>{0.2});
  CHECK(select_candidates(pool, Emotion::Angry, 0.5, 100).intensities.size() == 3);
  CHECK_THROWS_AS(select_candidates(pool, Emotion::Sad, 0.5, 1), Error);
  CHECK_THROWS_AS(select_candidates(pool, Emotion::Angry, 0.5, 0), Error);

  SUBCASE("full selection matches a brute-force distance sort") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> grid(1, 40);
    std::vector<double> xs(60);
    for (auto& x : xs) x = grid(rng) / 41.0;  // duplicates on purpose
    const auto p = pool_of(xs);
    for (const double target : {0.0, 0.26, 0.5, 0.731, 1.0}) {
      const auto sel = select_candidates(p, Emotion::Angry, target, xs.size());
      std::vector<std::size_t> idx(p.entries(Emotion::Angry).size());
      std::iota(idx.begin(), idx.end(), 0);
      const auto& entries = p.entries(Emotion::Angry);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double da = std::abs(entries[a].intensity - target);
        const double db = std::abs(entries[b].intensity - target);
        if (da != db) return da < db;
        return entries[a].intensity < entries[b].intensity;
      });
      REQUIRE(sel.utterance_ids.size() == idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) CHECK(sel.utterance_ids[i] == entries[idx[i]].utterance_id);
    }
  }
  SUBCASE("top-1 selection is monotone in target") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::vector<double> xs(30);
    for (auto& x : xs) x = u(rng);
    const auto p = pool_of(xs);
    double prev = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.001) {
      const double got = select_candidates(p, Emotion::Angry, t, 1).intensities[0];
      CHECK(got >= prev);
      prev = got;
    }
  }
}

TEST_CASE("fuse") {
  std::mt19937_64 rng(41);
  SUBCASE("single candidate returns the value exactly") {
    const SpeakerEmbedding q{random_vector(rng, 4)};
    const std::vector<EmotionEmbedding> k{{random_vector(rng, 4)}}, v{{random_vector(rng, 4)}};
    const auto r = fuse(q, k, v);
    CHECK(r.embedding.values == v[0].values);
    CHECK(r.weights[0] == 1.0);
  }
  SUBCASE("identical keys give uniform weights and the mean value") {
    const SpeakerEmbedding q{random_vector(rng, 3)};
    const EmotionEmbedding key{random_vector(rng, 3)};
    std::vector<EmotionEmbedding> k(4, key), v;
    for (int i = 0; i < 4; ++i) v.push_back({random_vector(rng, 3)});
    const auto r = fuse(q, k, v);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    for (const auto& x : v) mean += x.values / 4.0;
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(oracle::near(r.weights[i], 0.25, 1e-15));
    CHECK((r.embedding.values - mean).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("weights form a probability vector; permutation invariance") {
    std::uniform_int_distribution<int> count(1, 12);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = count(rng);
      const double scale = 0.1 + (trial % 7) * 3.0;
      const SpeakerEmbedding q{random_vector(rng, 5, scale)};
      std::vector<EmotionEmbedding> k, v;
      for (int i = 0; i < n; ++i) {
        k.push_back({random_vector(rng, 5, scale)});
        v.push_back({random_vector(rng, 5)});
      }
      const auto r = fuse(q, k, v);
      REQUIRE((r.weights.array() >= 0.0).all());
      REQUIRE(std::abs(r.weights.sum() - 1.0) <= 1e-9);

      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<EmotionEmbedding> kp, vp;
      for (const int p : perm) {
        kp.push_back(k[static_cast<std::size_t>(p)]);
        vp.push_back(v[static_cast<std::size_t>(p)]);
      }
      REQUIRE((fuse(q, kp, vp).embedding.values - r.embedding.values).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("matches a direct evaluation") {
    const SpeakerEmbedding q{random_vector(rng, 4)};
    std::vector<EmotionEmbedding> k, v;
    for (int i = 0; i < 3; ++i) {
      k.push_back({random_vector(rng, 4)});
      v.push_back({random_vector(rng, 2)});
    }
    std::vector<double> s(3);
    double z = 0.0;
    for (int i = 0; i < 3; ++i) {
      double dot = 0.0;
      for (int d = 0; d < 4; ++d) dot += q.values[d] * k[static_cast<std::size_t>(i)].values[d];
      s[static_cast<std::size_t>(i)] = std::exp(dot / 2.0);
      z += s[static_cast<std::size_t>(i)];
    }
    const auto r = fuse(q, k, v);
    for (int d = 0; d < 2; ++d) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) acc += s[static_cast<std::size_t>(i)] / z * v[static_cast<std::size_t>(i)].values[d];
      CHECK(oracle::near(r.embedding.values[d], acc, 1e-12));
    }
  }
  SUBCASE("errors") {
    const SpeakerEmbedding q{random_vector(rng, 3)};
    CHECK_THROWS_AS(fuse(q, std::vector<EmotionEmbedding>{}, std::vector<EmotionEmbedding>{}), Error);
    const std::vector<EmotionEmbedding> k{{random_vector(rng, 4)}}, v{{random_vector(rng, 4)}};
    CHECK_THROWS_AS(fuse(q, k, v), Error);
    const std::vector<EmotionEmbedding> v2{{random_vector(rng, 4)}, {random_vector(rng, 4)}};
    CHECK_THROWS_AS(fuse(SpeakerEmbedding{random_vector(rng, 4)}, k, v2), Error);
    // a projection fixes the dimension mismatch
    CHECK_NOTHROW(fuse(q, k, v, QueryProjection::random(3, 4, 1)));
  }
}

TEST_CASE("query projection") {
  std::mt19937_64 rng(51);
  std::vector<FusionSample> samples;
  const auto truth = QueryProjection::random(3, 4, 99);
  for (int i = 0; i < 20; ++i) {
    FusionSample s;
    s.query = {random_vector(rng, 3)};
    for (int j = 0; j < 5; ++j) {
      s.keys.push_back({random_vector(rng, 4)});
      s.values.push_back({random_vector(rng, 2)});
    }
    s.target = fuse(s.query, s.keys, s.values, truth).embedding;
    samples.push_back(std::move(s));
  }
  SUBCASE("identity when dimensions match") {
    const auto id = QueryProjection::identity(4);
    const Eigen::VectorXd x = random_vector(rng, 4);
    CHECK(id.apply(x) == x);
  }
  SUBCASE("gradient check at 3 random points") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto init = QueryProjection::random(3, 4, seed);
      const auto loss = [&](const Eigen::VectorXd& p) {
        auto m = init;
        m.set_parameters(p);
        return fusion_loss(m, samples);
      };
      const auto report = grad_check(init.parameters(), loss, 1e-4);
      CHECK_MESSAGE(report.pass, "max rel err " << report.max_rel_err);
    }
  }
  SUBCASE("training reduces the fusion loss") {
    const auto init = QueryProjection::random(3, 4, 5);
    ProjectionTrainOptions opts;
    opts.epochs = 300;
    const auto fitted = train_query_projection(init, samples, opts);
    CHECK(fusion_loss(fitted, samples).value < 0.5 * fusion_loss(init, samples).value);
    const auto back = QueryProjection::from_json(json::parse(fitted.to_json().dump()));
    CHECK(back.parameters() == fitted.parameters());
  }
}

}  // TEST_SUITE
