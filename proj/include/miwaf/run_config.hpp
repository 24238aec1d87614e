#ifndef MIWAF_RUN_CONFIG_HPP
#define MIWAF_RUN_CONFIG_HPP

#include "miwaf/evaluate.hpp"
#include "miwaf/feature_select.hpp"
#include "miwaf/ocsvm.hpp"
#include "miwaf/preprocess.hpp"
#include "miwaf/vectorizer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace miwaf {

/// Fractions of the normal corpus used for training, validation and test.
/// Each is positive and they sum to at most 1; any remainder is unused.
struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct RunConfig {
  std::filesystem::path normal_corpus;
  std::filesystem::path attack_corpus;
  PreprocessConfig preprocess;
  std::size_t n_features = 100;
  double nu = 0.05;
  double gamma = 0.5;
  /// Grid search runs only when both grids are non-empty.
  std::vector<double> nu_grid;
  std::vector<double> gamma_grid;
  MiEstimator estimator = MiEstimator::Presence;
  std::uint64_t seed = 42;
  SplitFractions split;
  VectorScaling scaling = VectorScaling::None;
  ThetaPolicy theta_policy;
  /// Share of the attack corpus held back for the test set by run_experiment.
  double attack_holdout = 0.5;
  /// Attacks blended per validation normal into the grid-search unlabeled mix.
  double unlabeled_ratio = 1.0;
  TrainOptions train_options;
  unsigned threads = 1;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

std::vector<double> default_nu_grid();
std::vector<double> default_gamma_grid();

/// Applies a TOML-style document ("key = value" lines, '#' comments,
/// [section] headers ignored) on top of cfg. Unknown keys are rejected.
void apply_config_text(RunConfig &cfg, std::string_view text);
RunConfig load_run_config(const std::filesystem::path &path);

} // namespace miwaf

#endif
