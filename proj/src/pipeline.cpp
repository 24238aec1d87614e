#include "miwaf/pipeline.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/hash.hpp"
#include "miwaf/rng.hpp"
#include "miwaf/tokenizer.hpp"
#include "miwaf/vectorizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace miwaf {

namespace {

std::size_t fraction_of(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  return idx;
}

Corpus take(const Corpus &from, std::span<const std::size_t> indices, std::string name) {
  Corpus out;
  out.source_name = std::move(name);
  out.requests.reserve(indices.size());
  for (auto i : indices)
    out.requests.push_back(from.requests[i]);
  return out;
}

std::vector<SparseVector> vectorize_all(const RequestVectorizer &vectorize, const Corpus &c) {
  std::vector<SparseVector> out;
  out.reserve(c.size());
  for (const auto &req : c.requests)
    out.push_back(vectorize(req));
  return out;
}

std::string filter_description(const HeaderFilter &filter) {
  std::string out = filter.mode() == HeaderFilter::Mode::Allowlist ? "allow:" : "deny:";
  bool first = true;
  for (const auto &n : filter.names()) {
    out += first ? "" : ",";
    out += n;
    first = false;
  }
  return out;
}

std::string ranking_digest(const FeatureRanking &ranking) {
  std::ostringstream buf;
  ranking.write(buf);
  return sha256_hex(buf.str());
}

Corpus concat(const Corpus &a, const Corpus &b, std::string name) {
  Corpus out;
  out.source_name = std::move(name);
  out.requests = a.requests;
  out.requests.insert(out.requests.end(), b.requests.begin(), b.requests.end());
  return out;
}

Corpus relabeled(const Corpus &c, ClassLabel label) {
  Corpus out = c;
  for (auto &req : out.requests)
    if (req.label == ClassLabel::Unlabeled)
      req.label = label;
  return out;
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

} // namespace

NormalSplit split_normals(const Corpus &normals, const SplitFractions &fractions,
                          std::uint64_t seed) {
  const std::size_t n = normals.size();
  const auto idx = shuffled_indices(n, seed);
  const std::size_t n_train = fraction_of(fractions.train, n);
  const std::size_t n_val = fraction_of(fractions.validation, n);
  const std::size_t n_test = std::min(fraction_of(fractions.test, n), n - n_train - n_val);

  const std::span<const std::size_t> all(idx);
  NormalSplit split;
  split.train = take(normals, all.subspan(0, n_train), normals.source_name + "#train");
  split.validation =
      take(normals, all.subspan(n_train, n_val), normals.source_name + "#validation");
  split.test = take(normals, all.subspan(n_train + n_val, n_test), normals.source_name + "#test");
  return split;
}

std::pair<Corpus, Corpus> split_attacks(const Corpus &attacks, double holdout,
                                        std::uint64_t seed) {
  const std::size_t n = attacks.size();
  const auto idx = shuffled_indices(n, seed);
  const std::size_t n_hold = fraction_of(holdout, n);
  const std::span<const std::size_t> all(idx);
  return {take(attacks, all.subspan(n_hold), attacks.source_name + "#kept"),
          take(attacks, all.subspan(0, n_hold), attacks.source_name + "#holdout")};
}

Corpus subsample_by_category(const Corpus &corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0 && fraction <= 1))
    throw Error(ErrorKind::InvalidArgument, "subsample fraction must lie in (0, 1]");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    groups[corpus.requests[i].category].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto &[category, members] : groups) {
    rng.shuffle(std::span<std::size_t>(members));
    const auto want = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(members.size())));
    const std::size_t n = std::clamp<std::size_t>(want, 1, members.size());
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n));
  }
  std::sort(keep.begin(), keep.end());
  return take(corpus, keep, corpus.source_name + "#subsample");
}

Corpus blend_unlabeled(const Corpus &normals, const Corpus &attacks, double ratio,
                       std::uint64_t seed) {
  const auto want = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(normals.size())));
  const std::size_t n_attack = std::min(want, attacks.size());
  const auto idx = shuffled_indices(attacks.size(), seed);

  Corpus mix = normals;
  mix.source_name = "unlabeled-mix";
  for (std::size_t k = 0; k < n_attack; ++k)
    mix.requests.push_back(attacks.requests[idx[k]]);
  for (auto &req : mix.requests)
    req.label = ClassLabel::Unlabeled;
  return mix;
}

std::vector<ClassLabel> role_labels(const Corpus &normals, const Corpus &attacks) {
  std::vector<ClassLabel> labels;
  labels.reserve(normals.size() + attacks.size());
  for (const auto &req : normals.requests)
    labels.push_back(req.label == ClassLabel::Unlabeled ? ClassLabel::Normal : req.label);
  for (const auto &req : attacks.requests)
    labels.push_back(req.label == ClassLabel::Unlabeled ? ClassLabel::Attack : req.label);
  return labels;
}

FeatureRanking run_rank(const RunConfig &cfg, const Corpus &normals, const Corpus &attacks) {
  const TokenDictionary dictionary = build_dictionary(attacks, normals, cfg.preprocess);

  std::vector<std::vector<std::string>> docs;
  docs.reserve(normals.size() + attacks.size());
  for (const Corpus *c : {&normals, &attacks})
    for (const auto &req : c->requests)
      docs.push_back(request_tokens(req, cfg.preprocess));

  const FeatureMatrix tfidf = tfidf_matrix(docs, dictionary.vocabulary());
  const auto labels = role_labels(normals, attacks);
  FeatureRanking ranking = rank_features(tfidf, labels, cfg.estimator);

  ranking.metadata.emplace_back("dictionary_size", std::to_string(dictionary.size()));
  ranking.metadata.emplace_back("normal_corpus_sha256", corpus_digest(normals));
  ranking.metadata.emplace_back("attack_corpus_sha256", corpus_digest(attacks));
  ranking.metadata.emplace_back("header_filter", filter_description(cfg.preprocess.filter));
  ranking.metadata.emplace_back("include_body", cfg.preprocess.include_body ? "true" : "false");
  return ranking;
}

TrainArtifacts run_train(const RunConfig &cfg, const std::vector<std::string> &features,
                         const Corpus &train_normals, const Corpus &validation_normals,
                         const Corpus &validation_attacks) {
  if (train_normals.size() < 2)
    throw Error(ErrorKind::DegenerateInput, "training split holds " +
                                                std::to_string(train_normals.size()) +
                                                " requests; at least 2 are needed");
  const RequestVectorizer vectorize(features, cfg.preprocess, cfg.scaling);
  const auto train_vecs = vectorize_all(vectorize, train_normals);
  const auto val_normal_vecs = vectorize_all(vectorize, validation_normals);

  TrainArtifacts out;
  double nu = cfg.nu, gamma = cfg.gamma;
  if (!cfg.nu_grid.empty() && !cfg.gamma_grid.empty()) {
    const Corpus mix = blend_unlabeled(validation_normals, validation_attacks,
                                       cfg.unlabeled_ratio, cfg.seed ^ 0x5eedULL);
    const auto mix_vecs = vectorize_all(vectorize, mix);
    out.grid = grid_search(train_vecs, val_normal_vecs, mix_vecs, cfg.nu_grid, cfg.gamma_grid,
                           cfg.train_options, cfg.threads);
    nu = out.grid->best_nu;
    gamma = out.grid->best_gamma;
  }

  auto trained = train_detailed(train_vecs, nu, gamma, cfg.train_options);
  out.model = std::move(trained.model);
  out.stats = trained.stats;
  out.model.selected_features = features;
  out.model.preprocess = cfg.preprocess;
  out.model.scaling = cfg.scaling;
  out.model.theta = 0.0;

  if (!validation_normals.empty() && !validation_attacks.empty()) {
    std::vector<ScoredItem> scores;
    for (const auto &v : val_normal_vecs)
      scores.push_back({decision(out.model, v), ClassLabel::Normal});
    for (const auto &req : validation_attacks.requests)
      scores.push_back({decision(out.model, vectorize(req)), ClassLabel::Attack});
    out.validation_roc = roc(scores);
    out.model.theta = pick_theta(*out.validation_roc, cfg.theta_policy);
  }

  out.model.provenance["train_normals_sha256"] = corpus_digest(train_normals);
  if (!validation_normals.empty())
    out.model.provenance["validation_normals_sha256"] = corpus_digest(validation_normals);
  if (!validation_attacks.empty())
    out.model.provenance["validation_attacks_sha256"] = corpus_digest(validation_attacks);
  out.model.provenance["theta_policy"] = to_string(cfg.theta_policy);
  out.model.provenance["seed"] = std::to_string(cfg.seed);
  if (out.grid)
    out.model.provenance["grid_selection"] = std::string(k_f_hat_formula);
  return out;
}

TrainArtifacts run_train(const RunConfig &cfg, const FeatureRanking &ranking,
                         const Corpus &train_normals, const Corpus &validation_normals,
                         const Corpus &validation_attacks) {
  auto out = run_train(cfg, select_top(ranking, cfg.n_features), train_normals,
                       validation_normals, validation_attacks);
  out.model.provenance["ranking_sha256"] = ranking_digest(ranking);
  out.model.provenance["ranking_estimator"] = ranking.estimator_id;
  return out;
}

EvalReport run_eval(const OcsvmModel &model, const Corpus &test) {
  const RequestVectorizer vectorize(model);
  std::vector<ScoredItem> scores;
  scores.reserve(test.size());
  for (const auto &req : test.requests)
    scores.push_back({decision(model, vectorize(req)), req.label});

  EvalReport report;
  report.roc = roc(scores);
  report.metrics = compute_metrics(scores, model.theta, model.selected_features.size());
  return report;
}

StreamStats run_score_stream(const OcsvmModel &model, std::istream &in, std::ostream &out,
                             std::ostream &diag) {
  const RequestVectorizer vectorize(model);
  StreamStats stats;
  std::string line;
  while (std::getline(in, line)) {
    ++stats.lines;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      const RawRequest req = parse_jsonl_record(line, stats.lines);
      const double score = decision(model, vectorize(req));

      nlohmann::ordered_json rec;
      const auto parsed = nlohmann::json::parse(line, nullptr, false);
      if (parsed.is_object() && parsed.contains("id"))
        rec["id"] = parsed["id"];
      else
        rec["id"] = stats.lines;
      rec["decision"] = score;
      rec["label"] = std::string(to_string(score >= model.theta ? ClassLabel::Normal
                                                                : ClassLabel::Attack));
      out << rec.dump() << '\n';
      ++stats.scored;
    } catch (const Error &e) {
      ++stats.errors;
      diag << "line " << stats.lines << ": " << e.what() << '\n';
    }
  }
  out.flush();
  return stats;
}

ExperimentResult run_experiment(const RunConfig &cfg, const Corpus &normals,
                                const Corpus &attacks) {
  cfg.validate();
  if (normals.empty() || attacks.empty())
    throw Error(ErrorKind::EmptyCorpus, "experiment needs normal and attack corpora");

  const Corpus normal_set = relabeled(normals, ClassLabel::Normal);
  const Corpus attack_set = relabeled(attacks, ClassLabel::Attack);
  const NormalSplit split = split_normals(normal_set, cfg.split, cfg.seed);
  auto [kept_attacks, test_attacks] = split_attacks(attack_set, cfg.attack_holdout, cfg.seed + 1);
  if (test_attacks.empty())
    test_attacks = kept_attacks;

  ExperimentResult result;
  const Corpus rank_normals = concat(split.train, split.validation, normals.source_name);
  result.ranking = run_rank(cfg, rank_normals, kept_attacks);
  result.training = run_train(cfg, result.ranking, split.train, split.validation, kept_attacks);
  result.evaluation =
      run_eval(result.training.model, concat(split.test, test_attacks, "test"));
  return result;
}

void write_experiment(const ExperimentResult &result, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  result.ranking.save(dir / "ranking.tsv");
  save_model(result.training.model, dir / "model.json");
  write_file(dir / "metrics.json",
             metrics_to_json(result.evaluation.metrics, result.training.model.provenance) + "\n");
  std::ostringstream roc_csv;
  write_roc_csv(result.evaluation.roc, roc_csv);
  write_file(dir / "roc.csv", roc_csv.str());
  if (result.training.grid) {
    std::ostringstream grid_csv;
    write_grid_csv(*result.training.grid, grid_csv);
    write_file(dir / "grid.csv", grid_csv.str());
  }
}

} // namespace miwaf
