#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "rset/controller/attention.hpp"
#include "rset/controller/extractor.hpp"
#include "rset/dataset/synthetic.hpp"
#include "rset/decouple/vclub.hpp"
#include "rset/ranker/ranker.hpp"

using namespace rset;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_TrainRankers(benchmark::State& state) {
  SyntheticSpec spec;
  spec.per_class = static_cast<std::size_t>(state.range(0));
  spec.neutral_count = spec.per_class;
  const auto corpus = standardize_features(synth_corpus(spec, 1)).first;
  for (auto _ : state) benchmark::DoNotOptimize(train_rankers(corpus, RankerConfig{}));
}
BENCHMARK(BM_TrainRankers)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_MiLoss(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = state.range(0);
  const PairBatch batch{random_matrix(rng, n, 16), random_matrix(rng, n, 32)};
  const auto model = VClubModel::create(16, 32, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mi_loss(model, batch));
}
BENCHMARK(BM_MiLoss)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ExtractIntensity(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto model = ExtractorModel::create(16, 32, 32, 5);
  const Eigen::MatrixXd seq = random_matrix(rng, 16, 32);
  for (auto _ : state) benchmark::DoNotOptimize(extract_intensity(model, seq));
}
BENCHMARK(BM_ExtractIntensity);

void BM_Fuse(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const auto k = state.range(0);
  const SpeakerEmbedding query{random_matrix(rng, 16, 1).col(0)};
  std::vector<EmotionEmbedding> keys, values;
  for (Eigen::Index i = 0; i < k; ++i) {
    keys.push_back({random_matrix(rng, 32, 1).col(0)});
    values.push_back({random_matrix(rng, 32, 1).col(0)});
  }
  const auto projection = QueryProjection::random(16, 32, 7);
  for (auto _ : state) benchmark::DoNotOptimize(fuse(query, keys, values, projection));
}
BENCHMARK(BM_Fuse)->Arg(8)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
