#ifndef MIWAF_PIPELINE_HPP
#define MIWAF_PIPELINE_HPP

#include "miwaf/evaluate.hpp"
#include "miwaf/feature_select.hpp"
#include "miwaf/ocsvm.hpp"
#include "miwaf/request_model.hpp"
#include "miwaf/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace miwaf {

struct NormalSplit {
  Corpus train;
  Corpus validation;
  Corpus test;
};

/// Seeded shuffle, then contiguous train / validation / test blocks of
/// floor(fraction * n) requests each.
NormalSplit split_normals(const Corpus &normals, const SplitFractions &fractions,
                          std::uint64_t seed);

/// Seeded shuffle of the attacks; returns (kept, held_out) where held_out
/// holds floor(holdout * n) requests.
std::pair<Corpus, Corpus> split_attacks(const Corpus &attacks, double holdout,
                                        std::uint64_t seed);

/// Keeps round(fraction * count) requests (at least one) of every category,
/// in original order. Requests without a category form their own group.
Corpus subsample_by_category(const Corpus &corpus, double fraction, std::uint64_t seed);

/// Unlabeled mix for model selection: every validation normal plus
/// round(ratio * |normals|) seeded draws (without replacement, capped at the
/// corpus size) from the attacks. Labels are cleared.
Corpus blend_unlabeled(const Corpus &normals, const Corpus &attacks, double ratio,
                       std::uint64_t seed);

/// Labels used for ranking. Unlabeled requests take the label of the corpus
/// they came from; explicit labels are kept.
std::vector<ClassLabel> role_labels(const Corpus &normals, const Corpus &attacks);

/// Dictionary over both corpora, TF-IDF over their union, MI ranking.
/// The ranking metadata records corpus digests and sizes.
FeatureRanking run_rank(const RunConfig &cfg, const Corpus &normals, const Corpus &attacks);

struct TrainArtifacts {
  OcsvmModel model;
  SolverStats stats;
  std::optional<GridSearchResult> grid;
  std::optional<RocCurve> validation_roc;
};

/// Trains on train_normals only. Runs the grid search when cfg carries both
/// grids, then sets theta from the validation ROC (validation normals vs
/// validation attacks) under cfg.theta_policy. Without both validation
/// classes theta stays 0.
TrainArtifacts run_train(const RunConfig &cfg, const std::vector<std::string> &features,
                         const Corpus &train_normals, const Corpus &validation_normals,
                         const Corpus &validation_attacks);
TrainArtifacts run_train(const RunConfig &cfg, const FeatureRanking &ranking,
                         const Corpus &train_normals, const Corpus &validation_normals,
                         const Corpus &validation_attacks);

struct EvalReport {
  Metrics metrics;
  RocCurve roc;
};

/// Scores a labeled test corpus at the model's theta.
EvalReport run_eval(const OcsvmModel &model, const Corpus &test);

struct StreamStats {
  std::size_t lines = 0;
  std::size_t scored = 0;
  std::size_t errors = 0;
};

/// Reads JSONL requests line by line and writes one JSON line
/// {"id", "decision", "label"} per scored request. Malformed lines are
/// reported on diag and skipped. id is the record's "id" field when present,
/// otherwise the 1-based line number.
StreamStats run_score_stream(const OcsvmModel &model, std::istream &in, std::ostream &out,
                             std::ostream &diag);

struct ExperimentResult {
  FeatureRanking ranking;
  TrainArtifacts training;
  EvalReport evaluation;
};

/// Full run: split normals, hold out attacks for testing, rank on the
/// non-test data, train, evaluate on test normals plus held-out attacks.
/// With attack_holdout == 0 every attack is reused for testing.
ExperimentResult run_experiment(const RunConfig &cfg, const Corpus &normals,
                                const Corpus &attacks);

/// Writes ranking.tsv, model.json, metrics.json, roc.csv and (after a grid
/// search) grid.csv into dir.
void write_experiment(const ExperimentResult &result, const std::filesystem::path &dir);

} // namespace miwaf

#endif
