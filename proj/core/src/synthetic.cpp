#include "rset/dataset/synthetic.hpp"

#include <cstdio>
#include <random>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"

namespace rset {
namespace {

std::string make_id(Emotion e, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", n);
  return std::string(to_string(e)) + "_" + buf;
}

}  // namespace

Eigen::VectorXd synthetic_direction(const SyntheticSpec& spec, std::uint64_t seed) {
  require(spec.feature_dim > 0, ErrorKind::InvalidArgument, "feature_dim must be positive");
  if (spec.direction) {
    require(static_cast<std::size_t>(spec.direction->size()) == spec.feature_dim,
            ErrorKind::Shape, "direction length must equal feature_dim");
    return *spec.direction;
  }
  std::mt19937_64 rng(derive_seed(seed, "direction"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(spec.feature_dim));
  do {
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = normal(rng);
  } while (w.norm() == 0.0);
  return w / w.norm();
}

Corpus synth_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  require(spec.feature_dim > 0, ErrorKind::InvalidArgument, "feature_dim must be positive");
  require(spec.per_class > 0 || !spec.fixed_latents.empty(), ErrorKind::InvalidArgument,
          "per_class must be positive");
  require(!spec.classes.empty(), ErrorKind::InvalidArgument, "need at least one emotion class");
  require(spec.num_speakers > 0, ErrorKind::InvalidArgument, "num_speakers must be positive");
  require(spec.noise >= 0.0 && spec.intra_spread >= 0.0 && spec.margin >= 0.0,
          ErrorKind::InvalidArgument, "noise, spread and margin must be non-negative");
  for (const Emotion e : spec.classes)
    require(!is_neutral(e), ErrorKind::InvalidArgument, "classes must be non-neutral");

  const Eigen::VectorXd w = synthetic_direction(spec, seed);
  std::mt19937_64 rng(derive_seed(seed, "corpus"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double half = 0.5 * spec.intra_spread;

  std::vector<Utterance> rows;
  auto emit = [&](Emotion e, std::size_t n, double latent) {
    Utterance u;
    u.id = make_id(e, n);
    u.speaker_id = "spk" + std::to_string(n % spec.num_speakers);
    u.emotion = e;
    u.features = w * latent;
    if (spec.noise > 0.0)
      for (Eigen::Index k = 0; k < u.features.size(); ++k) u.features[k] += spec.noise * normal(rng);
    u.latent_intensity = latent;
    rows.push_back(std::move(u));
  };

  auto class_latents = [&](Emotion e, std::size_t count, double low) {
    if (const auto it = spec.fixed_latents.find(e); it != spec.fixed_latents.end())
      return it->second;
    std::vector<double> out(count);
    for (auto& v : out) v = low + spec.intra_spread * unit(rng);
    return out;
  };

  const auto neutral = class_latents(Emotion::Neutral, spec.neutral_count, -half);
  for (std::size_t n = 0; n < neutral.size(); ++n) emit(Emotion::Neutral, n, neutral[n]);
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const double offset =
        spec.class_offsets.empty() ? 0.0 : spec.class_offsets[c % spec.class_offsets.size()];
    const auto latents =
        class_latents(spec.classes[c], spec.per_class, half + spec.margin + offset);
    require(!latents.empty(), ErrorKind::InvalidArgument, "per_class must be positive");
    for (std::size_t n = 0; n < latents.size(); ++n) emit(spec.classes[c], n, latents[n]);
  }
  return Corpus(std::move(rows), spec.feature_dim);
}

}  // namespace rset
