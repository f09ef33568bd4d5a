#include "rset_tools/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include <Eigen/QR>

#include "rset/common/error.hpp"
#include "rset/common/numeric.hpp"
#include "rset/controller/attention.hpp"
#include "rset/controller/extractor.hpp"
#include "rset/controller/mixing.hpp"
#include "rset/controller/pool.hpp"
#include "rset/dataset/corpus.hpp"
#include "rset/dataset/embeddings.hpp"
#include "rset/dataset/synthetic.hpp"
#include "rset/decouple/losses.hpp"
#include "rset/decouple/vclub.hpp"
#include "rset/ranker/ranker.hpp"
#include "rset/remap/remap.hpp"

namespace fs = std::filesystem;

namespace rset::tools {
namespace {

constexpr const char* kStages[] = {"gen", "rank", "remap", "pool", "train_extractor", "mi", "fuse"};

fs::path out_file(const PipelineConfig& c, const std::string& name) { return c.out_dir() / name; }

fs::path input_path(const PipelineConfig& c, const std::string& configured, const std::string& default_name) {
  return configured.empty() ? out_file(c, default_name) : fs::path(configured);
}

// Upstream artifact or a MissingArtifact error telling the user what to run.
fs::path artifact(const fs::path& path, const std::string& producer) {
  require(fs::exists(path), ErrorKind::MissingArtifact,
          path.string() + " not found; run `rset " + producer + "` first");
  return path;
}

void prepare_out(const PipelineConfig& c) {
  c.validate();
  std::error_code ec;
  fs::create_directories(c.out_dir(), ec);
  require(!ec && fs::is_directory(c.out_dir()), ErrorKind::Io,
          "cannot create output directory " + c.out_dir().string());
  write_json_file(out_file(c, "effective_config.json"), c.to_json());
}

json finish(const PipelineConfig& c, const std::string& stage, json report) {
  report["stage"] = stage;
  write_json_file(out_file(c, stage + "_report.json"), report);
  return report;
}

Corpus load_input_corpus(const PipelineConfig& c) {
  const auto path = artifact(input_path(c, c.paths.corpus, "corpus.csv"), "gen");
  return load_corpus(path, format_for_path(path));
}

std::optional<std::map<std::string, double>> load_input_latent(const PipelineConfig& c) {
  const auto path = input_path(c, c.paths.latent, "latent.csv");
  if (!c.paths.latent.empty()) artifact(path, "gen");
  if (!fs::exists(path)) return std::nullopt;
  return load_latent(path);
}

EmbeddingTable load_table(const PipelineConfig& c, const std::string& configured, const std::string& name) {
  return load_embeddings(artifact(input_path(c, configured, name), "gen"));
}

IntensityTable load_intensities(const PipelineConfig& c) {
  return IntensityTable::from_json(read_json_file(artifact(out_file(c, "intensities.json"), "remap")));
}

Eigen::VectorXd gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * g(rng);
  return v;
}

json kendall_by_class(const Corpus& corpus, const IntensityTable& table,
                      const std::map<std::string, double>& latent, bool remapped) {
  json out = json::object();
  for (const Emotion e : corpus.emotion_classes()) {
    std::vector<double> lat, score;
    for (const auto i : corpus.indices_of(e)) {
      const auto& id = corpus[i].id;
      const auto it = latent.find(id);
      if (it == latent.end()) continue;
      const auto& row = table.find(id);
      lat.push_back(it->second);
      score.push_back(remapped ? *row.remapped : row.raw);
    }
    if (lat.size() >= 2) out[std::string(to_string(e))] = kendall_tau(lat, score);
  }
  return out;
}

// Frame-level stand-in: the utterance embedding tiled over the window with
// seeded per-utterance jitter.
Eigen::MatrixXd frame_sequence(const Eigen::VectorXd& embedding, const std::string& id,
                               const PipelineConfig& c) {
  std::mt19937_64 rng(derive_seed(derive_seed(c.seed, "frames"), id));
  std::normal_distribution<double> g(0.0, c.controller.frame_noise);
  Eigen::MatrixXd seq(static_cast<Eigen::Index>(c.controller.window), embedding.size());
  for (Eigen::Index t = 0; t < seq.rows(); ++t)
    for (Eigen::Index k = 0; k < seq.cols(); ++k) seq(t, k) = embedding[k] + g(rng);
  return seq;
}

std::size_t class_index(const Corpus& corpus, Emotion e) {
  const auto& classes = corpus.emotion_classes();
  return static_cast<std::size_t>(std::find(classes.begin(), classes.end(), e) - classes.begin());
}

bool held_out(std::size_t position, const PipelineConfig& c) {
  return position % c.controller.holdout_every == 0;
}

// Non-neutral utterances in corpus order with their remapped labels.
struct LabelledUtterance {
  std::size_t corpus_index;
  double intensity;
};

std::vector<LabelledUtterance> labelled(const Corpus& corpus, const IntensityTable& table) {
  std::vector<LabelledUtterance> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (is_neutral(corpus[i].emotion)) continue;
    const auto& row = table.find(corpus[i].id);
    require(row.remapped.has_value(), ErrorKind::InvalidArgument,
            "intensity row " + corpus[i].id + " is not remapped");
    out.push_back({i, *row.remapped});
  }
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gen", "rank", "remap", "pool", "train-extractor",
                                                 "mi",  "fuse", "report"};
  return names;
}

json cmd_gen(const PipelineConfig& c) {
  prepare_out(c);
  const auto& sc = c.synthetic;
  SyntheticSpec spec;
  spec.per_class = sc.per_class;
  spec.neutral_count = sc.neutral_count;
  spec.feature_dim = sc.feature_dim;
  spec.num_speakers = sc.num_speakers;
  spec.margin = sc.margin;
  spec.intra_spread = sc.intra_spread;
  spec.noise = sc.noise;
  spec.class_offsets = sc.class_offsets;
  const auto corpus = synth_corpus(spec, derive_seed(c.seed, "corpus"));
  write_corpus(corpus, out_file(c, "corpus.csv"), CorpusFormat::Csv);
  write_latent(corpus, out_file(c, "latent.csv"));

  std::mt19937_64 rng(derive_seed(c.seed, "embeddings"));
  std::map<Emotion, Eigen::VectorXd> centers, directions;
  for (const Emotion e : kAllEmotions) {
    centers[e] = gaussian(rng, sc.emotion_dim);
    Eigen::VectorXd d = gaussian(rng, sc.emotion_dim);
    directions[e] = d / d.norm();
  }
  const Eigen::MatrixXd leak =
      gaussian(rng, sc.emotion_dim * sc.speaker_dim, 1.0 / std::sqrt(static_cast<double>(sc.speaker_dim)))
          .reshaped(static_cast<Eigen::Index>(sc.emotion_dim), static_cast<Eigen::Index>(sc.speaker_dim));

  EmbeddingTable speakers(sc.speaker_dim);
  for (std::size_t n = 0; n < sc.num_speakers; ++n) speakers.add("spk" + std::to_string(n), gaussian(rng, sc.speaker_dim));

  EmbeddingTable emotions(sc.emotion_dim), speaker_hat(sc.speaker_dim);
  for (const auto& u : corpus.utterances()) {
    const Eigen::VectorXd& spk = speakers.at(u.speaker_id);
    Eigen::VectorXd v = centers[u.emotion] + *u.latent_intensity * directions[u.emotion] +
                        gaussian(rng, sc.emotion_dim, sc.embedding_noise) + sc.speaker_leak * (leak * spk);
    emotions.add(u.id, std::move(v));
    speaker_hat.add(u.id, spk + gaussian(rng, sc.speaker_dim, sc.speaker_hat_noise));
  }
  write_embeddings(emotions, out_file(c, "emotion_embeddings.csv"), 'e');
  write_embeddings(speakers, out_file(c, "speaker_embeddings.csv"), 's');
  write_embeddings(speaker_hat, out_file(c, "speaker_hat.csv"), 's');

  json counts = json::object();
  for (const auto& [e, n] : corpus.per_class_counts()) counts[std::string(to_string(e))] = n;
  return finish(c, "gen",
                {{"utterances", corpus.size()},
                 {"non_neutral", corpus.size() - corpus.per_class_counts().at(Emotion::Neutral)},
                 {"per_class", counts},
                 {"feature_dim", corpus.feature_dim()},
                 {"emotion_dim", sc.emotion_dim},
                 {"speaker_dim", sc.speaker_dim},
                 {"num_speakers", sc.num_speakers}});
}

json cmd_rank(const PipelineConfig& c) {
  prepare_out(c);
  const auto raw_corpus = load_input_corpus(c);
  const auto [corpus, scaler] = standardize_features(raw_corpus);
  write_json_file(out_file(c, "scaler.json"), scaler.to_json());

  RankerConfig rc;
  rc.c = c.ranking.c;
  rc.joint = c.ranking.joint;
  rc.options.max_iterations = c.ranking.max_iterations;
  rc.options.gradient_tolerance = c.ranking.gradient_tolerance;
  rc.options.step_rule = c.ranking.step_rule == "fixed" ? StepRule::Fixed : StepRule::Backtracking;
  rc.options.fixed_step = c.ranking.fixed_step;
  rc.options.seed = derive_seed(c.seed, "rank");
  rc.pairs.mode = c.ranking.pair_mode == "exhaustive" ? PairMode::Exhaustive
                  : c.ranking.pair_mode == "sampled"  ? PairMode::Sampled
                                                      : PairMode::Auto;
  rc.pairs.exhaustive_limit = c.ranking.exhaustive_limit;
  rc.pairs.max_pairs_per_set = c.ranking.max_pairs_per_set;
  rc.pairs.seed = derive_seed(c.seed, "pairs");
  const auto bank = train_rankers(corpus, rc);
  write_json_file(out_file(c, "ranker.json"), bank.to_json());

  json models = json::object();
  if (bank.joint) {
    models["joint"] = bank.joint->to_json().at("diagnostics");
  } else {
    for (const auto& [e, m] : bank.per_class) models[std::string(to_string(e))] = m.to_json().at("diagnostics");
  }
  json report = {{"mode", bank.joint ? "joint" : "per_class"}, {"c", rc.c}, {"diagnostics", models}};
  if (const auto latent = load_input_latent(c)) {
    report["kendall_tau"] = kendall_by_class(corpus, raw_intensities(bank, corpus), *latent, false);
  }
  return finish(c, "rank", report);
}

json cmd_remap(const PipelineConfig& c) {
  prepare_out(c);
  const auto bank = RankerBank::from_json(read_json_file(artifact(out_file(c, "ranker.json"), "rank")));
  const auto scaler = Scaler::from_json(read_json_file(artifact(out_file(c, "scaler.json"), "rank")));
  const auto corpus = scaler.apply(load_input_corpus(c));
  const auto raw = raw_intensities(bank, corpus);
  require(!raw.empty(), ErrorKind::InvalidArgument, "corpus has no non-neutral utterances to remap");
  const auto stats = class_means(raw);
  const auto table = remap(raw, stats);
  write_json_file(out_file(c, "intensities.json"), table.to_json());
  write_text_file(out_file(c, "intensities.csv"), table.to_csv());

  json means = json::object(), saturation = json::object(), ranges = json::object();
  for (const auto& [e, m] : stats.means) means[std::string(to_string(e))] = m;
  for (const auto& [e, f] : saturation_fraction(table, c.remap.saturation_threshold))
    saturation[std::string(to_string(e))] = f;
  for (const auto& row : table.rows) {
    auto& r = ranges[std::string(to_string(row.emotion))];
    if (r.is_null()) r = {{"min", *row.remapped}, {"max", *row.remapped}};
    r["min"] = std::min(r["min"].get<double>(), *row.remapped);
    r["max"] = std::max(r["max"].get<double>(), *row.remapped);
  }
  json report = {{"rows", table.rows.size()},
                 {"class_means", means},
                 {"saturation_threshold", c.remap.saturation_threshold},
                 {"saturation_fraction", saturation},
                 {"remapped_range", ranges}};
  if (const auto latent = load_input_latent(c)) report["kendall_tau"] = kendall_by_class(corpus, table, *latent, true);
  return finish(c, "remap", report);
}

json cmd_pool(const PipelineConfig& c) {
  prepare_out(c);
  const auto table = load_intensities(c);
  const auto emotions = load_table(c, c.paths.emotion_embeddings, "emotion_embeddings.csv");
  std::vector<EmbeddingRecord> records;
  for (const auto& row : table.rows) {
    require(emotions.contains(row.utterance_id), ErrorKind::InvalidArgument,
            "no emotion embedding for " + row.utterance_id);
    records.push_back({row.utterance_id, row.emotion, {emotions.at(row.utterance_id)}});
  }
  const auto pool = build_pool(records, table);
  write_json_file(out_file(c, "pool.json"), pool.to_json());

  json classes = json::object();
  for (const auto& [e, list] : pool.classes())
    classes[std::string(to_string(e))] = {{"size", list.size()},
                                          {"min_intensity", list.front().intensity},
                                          {"max_intensity", list.back().intensity}};
  return finish(c, "pool", {{"entries", pool.size()}, {"embedding_dim", pool.embedding_dim()}, {"classes", classes}});
}

json cmd_train_extractor(const PipelineConfig& c) {
  prepare_out(c);
  const auto table = load_intensities(c);
  const auto corpus = load_input_corpus(c);
  const auto emotions = load_table(c, c.paths.emotion_embeddings, "emotion_embeddings.csv");

  std::vector<ExtractorSample> train, valid;
  const auto rows = labelled(corpus, table);
  for (std::size_t p = 0; p < rows.size(); ++p) {
    const auto& u = corpus[rows[p].corpus_index];
    ExtractorSample s{frame_sequence(emotions.at(u.id), u.id, c), rows[p].intensity, class_index(corpus, u.emotion)};
    (held_out(p, c) ? valid : train).push_back(std::move(s));
  }
  require(!train.empty(), ErrorKind::InvalidArgument, "no training utterances for the extractor");

  ExtractorOptions opts;
  opts.hidden = c.controller.hidden;
  opts.num_classes = corpus.emotion_classes().size();
  opts.epochs = c.controller.epochs;
  opts.learning_rate = c.controller.learning_rate;
  opts.seed = derive_seed(c.seed, "extractor");
  const auto result = train_extractor(train, opts);
  write_json_file(out_file(c, "extractor.json"), result.extractor.to_json());
  write_json_file(out_file(c, "classifier.json"), result.classifier.to_json());

  auto evaluate = [&](const std::vector<ExtractorSample>& data) {
    double mse = 0.0, baseline = 0.0;
    std::size_t correct = 0;
    for (const auto& s : data) {
      const double y = extract_intensity(result.extractor, s.sequence);
      mse += (y - s.intensity) * (y - s.intensity);
      baseline += (0.5 - s.intensity) * (0.5 - s.intensity);
      Eigen::Index arg = 0;
      classify_emotion(result.classifier, s.sequence).maxCoeff(&arg);
      correct += static_cast<std::size_t>(arg) == s.class_index;
    }
    const double n = static_cast<double>(std::max<std::size_t>(data.size(), 1));
    return json{{"samples", data.size()},
                {"intensity_mse", mse / n},
                {"baseline_mse", baseline / n},
                {"class_accuracy", static_cast<double>(correct) / n}};
  };
  return finish(c, "train_extractor",
                {{"epochs", c.controller.epochs},
                 {"window", c.controller.window},
                 {"hidden", c.controller.hidden},
                 {"intensity_loss_initial", result.intensity_loss_history.front()},
                 {"intensity_loss_final", result.intensity_loss_history.back()},
                 {"class_loss_initial", result.class_loss_history.front()},
                 {"class_loss_final", result.class_loss_history.back()},
                 {"train", evaluate(train)},
                 {"validation", evaluate(valid)}});
}

json cmd_mi(const PipelineConfig& c) {
  prepare_out(c);
  const auto corpus = load_input_corpus(c);
  const auto emotions = load_table(c, c.paths.emotion_embeddings, "emotion_embeddings.csv");
  const auto speakers = load_table(c, c.paths.speaker_embeddings, "speaker_embeddings.csv");
  const auto speaker_hat = load_table(c, c.paths.speaker_hat, "speaker_hat.csv");

  const auto n = static_cast<Eigen::Index>(corpus.size());
  PairBatch batch{Eigen::MatrixXd(n, static_cast<Eigen::Index>(speakers.dim())),
                  Eigen::MatrixXd(n, static_cast<Eigen::Index>(emotions.dim()))};
  std::vector<SpeakerEmbedding> reference, predicted;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& u = corpus[static_cast<std::size_t>(i)];
    batch.speakers.row(i) = speakers.at(u.speaker_id).transpose();
    batch.emotions.row(i) = emotions.at(u.id).transpose();
    reference.push_back({speakers.at(u.speaker_id)});
    predicted.push_back({speaker_hat.at(u.id)});
  }

  VClubTrainOptions opts;
  opts.epochs = c.mi.epochs;
  opts.batch_size = c.mi.batch_size;
  opts.learning_rate = c.mi.learning_rate;
  opts.seed = derive_seed(c.seed, "mi");
  const auto init = VClubModel::create(speakers.dim(), emotions.dim(), c.mi.hidden, derive_seed(c.seed, "vclub"));
  const auto trained = train_variational(init, batch, opts);
  write_json_file(out_file(c, "vclub.json"), trained.model.to_json());
  const double l_mi = mi_loss(trained.model, batch);
  const double l_spcon = speaker_consistency_loss(predicted, reference);

  // Reconstruction stand-in: least-squares decoder from (emotion, speaker)
  // embeddings back to standardized features.
  const auto features = standardize_features(corpus).first;
  Eigen::MatrixXd design(n, batch.emotions.cols() + batch.speakers.cols() + 1);
  Eigen::MatrixXd target(n, static_cast<Eigen::Index>(corpus.feature_dim()));
  design << batch.emotions, batch.speakers, Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) target.row(i) = features[static_cast<std::size_t>(i)].features.transpose();
  const Eigen::MatrixXd decoded = design * design.colPivHouseholderQr().solve(target);
  const double l_recon = recon_loss(decoded, target);

  const LossWeights w{c.loss.alpha1, c.loss.alpha2};
  return finish(c, "mi",
                {{"pairs", batch.size()},
                 {"mi_estimate", l_mi},
                 {"logprob_initial", mean_logprob_with_gradient(init, batch).value},
                 {"logprob_final", trained.epoch_logprob.empty() ? 0.0 : trained.epoch_logprob.back()},
                 {"recon_loss", l_recon},
                 {"speaker_consistency_loss", l_spcon},
                 {"alpha1", w.alpha1},
                 {"alpha2", w.alpha2},
                 {"total_loss", total_loss(l_recon, l_mi, l_spcon, w)}});
}

json cmd_fuse(const PipelineConfig& c) {
  prepare_out(c);
  const auto pool = CandidatePool::from_json(read_json_file(artifact(out_file(c, "pool.json"), "pool")));
  const auto extractor =
      ExtractorModel::from_json(read_json_file(artifact(out_file(c, "extractor.json"), "train-extractor")));
  const auto table = load_intensities(c);
  const auto corpus = load_input_corpus(c);
  const auto emotions = load_table(c, c.paths.emotion_embeddings, "emotion_embeddings.csv");
  const auto speakers = load_table(c, c.paths.speaker_embeddings, "speaker_embeddings.csv");
  const auto top_k = c.pool.top_k;

  // Query projection: identity when speaker and key spaces agree, otherwise
  // fitted so fused candidates reconstruct each training utterance's embedding.
  const auto rows = labelled(corpus, table);
  QueryProjection projection;
  double projection_loss = 0.0;
  if (speakers.dim() == pool.embedding_dim()) {
    projection = QueryProjection::identity(speakers.dim());
  } else {
    std::vector<FusionSample> samples;
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (held_out(p, c)) continue;
      const auto& u = corpus[rows[p].corpus_index];
      const auto sel = select_candidates(pool, u.emotion, rows[p].intensity, top_k);
      samples.push_back({{speakers.at(u.speaker_id)}, sel.keys, sel.values, {emotions.at(u.id)}});
    }
    ProjectionTrainOptions popts;
    popts.epochs = c.controller.projection_epochs;
    popts.learning_rate = c.controller.projection_learning_rate;
    projection = train_query_projection(
        QueryProjection::random(speakers.dim(), pool.embedding_dim(), derive_seed(c.seed, "projection")), samples,
        popts);
    projection_loss = samples.empty() ? 0.0 : fusion_loss(projection, samples).value;
  }
  write_json_file(out_file(c, "projection.json"), projection.to_json());

  std::vector<double> alphas = c.alpha;
  std::stable_sort(alphas.begin(), alphas.end());
  json sweep = json::array(), monotone = json::object();
  std::string csv = "class,alpha,reference,y_pred,target,selected_intensity,selected_utterance,mean_candidate_intensity\n";
  EmbeddingTable fused_table(pool.embedding_dim());
  for (const Emotion e : corpus.emotion_classes()) {
    // reference: first held-out utterance of the class
    const LabelledUtterance* ref = nullptr;
    for (std::size_t p = 0; p < rows.size() && !ref; ++p)
      if (held_out(p, c) && corpus[rows[p].corpus_index].emotion == e) ref = &rows[p];
    for (std::size_t p = 0; p < rows.size() && !ref; ++p)
      if (corpus[rows[p].corpus_index].emotion == e) ref = &rows[p];
    const auto& u = corpus[ref->corpus_index];
    const double y_pred = extract_intensity(extractor, frame_sequence(emotions.at(u.id), u.id, c));
    const SpeakerEmbedding query{speakers.at(u.speaker_id)};

    bool ok = true;
    double previous = -1.0;
    for (const double a : alphas) {
      const double target = adjust_intensity(y_pred, a);
      const auto sel = select_candidates(pool, e, target, top_k);
      const auto fused = fuse(query, sel.keys, sel.values, projection);
      double mean = 0.0;
      for (const double x : sel.intensities) mean += x;
      mean /= static_cast<double>(sel.intensities.size());
      ok = ok && sel.intensities.front() >= previous;
      previous = sel.intensities.front();
      const std::string cls(to_string(e));
      sweep.push_back({{"class", cls},
                       {"alpha", a},
                       {"reference", u.id},
                       {"y_pred", y_pred},
                       {"target", target},
                       {"selected_intensity", sel.intensities.front()},
                       {"selected_utterance", sel.utterance_ids.front()},
                       {"mean_candidate_intensity", mean},
                       {"attention_weights", vector_to_json(fused.weights)}});
      csv += cls + "," + format_double(a) + "," + u.id + "," + format_double(y_pred) + "," + format_double(target) +
             "," + format_double(sel.intensities.front()) + "," + sel.utterance_ids.front() + "," +
             format_double(mean) + "\n";
      fused_table.add(cls + "@" + format_double(a), fused.embedding.values);
    }
    monotone[std::string(to_string(e))] = ok;
  }
  write_text_file(out_file(c, "alpha_sweep.csv"), csv);
  write_embeddings(fused_table, out_file(c, "fused_embeddings.csv"), 'e');

  // Emotion mixing between the first two class centroids of the pool.
  json mixing = json::object();
  if (pool.classes().size() >= 2) {
    auto centroid = [&](const std::vector<PoolEntry>& list) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pool.embedding_dim()));
      for (const auto& p : list) m += p.embedding.values;
      return EmotionEmbedding{m / static_cast<double>(list.size())};
    };
    const auto first = pool.classes().begin();
    const auto second = std::next(first);
    const double lambda = sample_lambda({c.controller.beta_a, c.controller.beta_b}, derive_seed(c.seed, "mix"));
    const auto mixed = mix_emotions(centroid(first->second), centroid(second->second), lambda);
    mixing = {{"first", std::string(to_string(first->first))},
              {"second", std::string(to_string(second->first))},
              {"lambda", lambda},
              {"embedding", vector_to_json(mixed.values)}};
  }

  return finish(c, "fuse",
                {{"top_k", top_k},
                 {"projection", speakers.dim() == pool.embedding_dim() ? "identity" : "learned"},
                 {"projection_loss", projection_loss},
                 {"alpha_sweep", sweep},
                 {"monotone_non_decreasing", monotone},
                 {"mixing", mixing}});
}

json cmd_report(const PipelineConfig& c) {
  require(fs::is_directory(c.out_dir()), ErrorKind::MissingArtifact,
          "output directory " + c.out_dir().string() + " does not exist; run a pipeline command first");
  json sections = json::object();
  json stages = json::array();
  for (const char* stage : kStages) {
    const auto path = out_file(c, std::string(stage) + "_report.json");
    if (!fs::exists(path)) continue;
    sections[stage] = read_json_file(path);
    stages.push_back(stage);
  }
  require(!stages.empty(), ErrorKind::MissingArtifact,
          "no stage reports in " + c.out_dir().string() + "; run a pipeline command first");
  const json summary = {{"stages", stages}, {"sections", sections}};
  write_json_file(out_file(c, "summary.json"), summary);

  // Flattened scalars: section,key,value (key is a JSON pointer).
  std::string csv = "section,key,value\n";
  for (const auto& stage : stages) {
    const auto flat = sections[stage.get<std::string>()].flatten();
    for (const auto& [key, value] : flat.items()) {
      std::string text;
      if (value.is_number_float()) text = format_double(value.get<double>());
      else if (value.is_string()) text = value.get<std::string>();
      else text = value.dump();
      csv += stage.get<std::string>() + "," + key + "," + text + "\n";
    }
  }
  write_text_file(out_file(c, "summary.csv"), csv);

  if (fs::exists(out_file(c, "intensities.json"))) {
    const auto table = load_intensities(c);
    constexpr int kBins = 10;
    std::map<Emotion, std::vector<std::size_t>> hist;
    for (const auto& row : table.rows) {
      auto& h = hist[row.emotion];
      h.resize(kBins);
      const double x = row.remapped.value_or(0.5);
      h[static_cast<std::size_t>(std::clamp(static_cast<int>(x * kBins), 0, kBins - 1))] += 1;
    }
    std::string dist = "class,bin_low,bin_high,count\n";
    for (const auto& [e, h] : hist)
      for (int b = 0; b < kBins; ++b)
        dist += std::string(to_string(e)) + "," + format_double(b / double(kBins)) + "," +
                format_double((b + 1) / double(kBins)) + "," + std::to_string(h[static_cast<std::size_t>(b)]) + "\n";
    write_text_file(out_file(c, "intensity_distribution.csv"), dist);
  }
  return summary;
}

json run_command(std::string_view verb, const PipelineConfig& c) {
  if (verb == "gen") return cmd_gen(c);
  if (verb == "rank") return cmd_rank(c);
  if (verb == "remap") return cmd_remap(c);
  if (verb == "pool") return cmd_pool(c);
  if (verb == "train-extractor") return cmd_train_extractor(c);
  if (verb == "mi") return cmd_mi(c);
  if (verb == "fuse") return cmd_fuse(c);
  if (verb == "report") return cmd_report(c);
  if (verb == "all") {
    for (const auto& name : command_names())
      if (name != "report") run_command(name, c);
    return cmd_report(c);
  }
  fail(ErrorKind::InvalidArgument, "unknown command '" + std::string(verb) + "'");
}

}  // namespace rset::tools
