// Command-line front end for the miwaf library.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 non-convergence.

#include "miwaf/errors.hpp"
#include "miwaf/evaluate.hpp"
#include "miwaf/feature_select.hpp"
#include "miwaf/ocsvm.hpp"
#include "miwaf/pipeline.hpp"
#include "miwaf/request_model.hpp"
#include "miwaf/run_config.hpp"
#include "miwaf/synthgen.hpp"
#include "miwaf/tokenizer.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace miwaf;

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_usage = 2;
constexpr int k_exit_data = 3;
constexpr int k_exit_nonconvergence = 4;

/// Options shared by every subcommand; they override the config file.
struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> header_denylist;
  std::optional<std::vector<std::string>> header_allowlist;
  std::optional<bool> include_body;
  std::optional<std::size_t> n_features;
  std::optional<double> nu;
  std::optional<double> gamma;
  std::optional<std::string> vector_scaling;
  std::optional<std::string> estimator;
  std::optional<std::string> theta_policy;
  std::optional<unsigned> threads;
};

std::set<std::string> name_set(const std::vector<std::string> &names) {
  std::set<std::string> out;
  for (const auto &n : names)
    if (!n.empty())
      out.insert(n);
  return out;
}

RunConfig resolve_config(const GlobalOptions &g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed)
    cfg.seed = *g.seed;
  if (g.header_denylist)
    cfg.preprocess.filter = HeaderFilter::denylist(name_set(*g.header_denylist));
  if (g.header_allowlist)
    cfg.preprocess.filter = HeaderFilter::allowlist(name_set(*g.header_allowlist));
  if (g.include_body)
    cfg.preprocess.include_body = *g.include_body;
  if (g.n_features)
    cfg.n_features = *g.n_features;
  if (g.nu)
    cfg.nu = *g.nu;
  if (g.gamma)
    cfg.gamma = *g.gamma;
  if (g.vector_scaling)
    cfg.scaling = parse_vector_scaling(*g.vector_scaling);
  if (g.estimator)
    cfg.estimator = parse_estimator(*g.estimator);
  if (g.theta_policy)
    cfg.theta_policy = parse_theta_policy(*g.theta_policy);
  if (g.threads)
    cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

/// Loads a corpus from an explicit path, falling back to a config path.
Corpus load_required(const std::string &path, const fs::path &fallback, std::string_view what) {
  const fs::path p = path.empty() ? fallback : fs::path(path);
  if (p.empty())
    throw Error(ErrorKind::InvalidArgument, "no " + std::string(what) + " corpus given");
  return load_corpus(p);
}

Corpus load_optional(const std::string &path) {
  return path.empty() ? Corpus{} : load_corpus(path);
}

Corpus with_role(Corpus c, ClassLabel label) {
  for (auto &r : c.requests)
    if (r.label == ClassLabel::Unlabeled)
      r.label = label;
  return c;
}

std::vector<std::string> read_token_list(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!line.empty() && line.front() != '#')
      tokens.push_back(line);
  }
  if (tokens.empty())
    throw Error(ErrorKind::EmptyCorpus, "feature list " + path.string() + " is empty");
  return tokens;
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text))
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

void print_metrics(const Metrics &m) {
  std::printf("n_features=%zu acc=%.4f tpr=%.4f fpr=%.4f auc=%.4f theta=%.6g\n", m.n_features,
              m.acc, m.tpr, m.fpr, m.auc, m.theta);
}

void add_global_options(CLI::App &app, GlobalOptions &g) {
  app.add_option("--config", g.config, "TOML-style run configuration file");
  app.add_option("--seed", g.seed, "Random seed");
  auto *deny = app.add_option("--header-denylist", g.header_denylist,
                              "Comma-separated header names to drop")
                   ->delimiter(',')
                   ->expected(0, -1);
  auto *allow = app.add_option("--header-allowlist", g.header_allowlist,
                               "Comma-separated header names to keep (all others dropped)")
                    ->delimiter(',');
  deny->excludes(allow);
  app.add_flag("--include-body,!--no-include-body", g.include_body,
               "Include the request body in the canonical text (default on)");
  app.add_option("--n-features", g.n_features, "Number of top-ranked features")
      ->check(CLI::PositiveNumber);
  app.add_option("--nu", g.nu, "OCSVM nu");
  app.add_option("--gamma", g.gamma, "RBF kernel width");
  app.add_option("--vector-scaling", g.vector_scaling, "none | binary | l2");
  app.add_option("--estimator", g.estimator, "MI estimator: presence | binned");
  app.add_option("--theta-policy", g.theta_policy, "max_youden | fpr_cap:<x>");
  app.add_option("--threads", g.threads, "Worker threads for the grid search");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"miwaf: mutual-information feature selection and one-class SVM "
               "anomaly detection for HTTP requests"};
  app.require_subcommand(1);
  GlobalOptions g;
  add_global_options(app, g);

  auto new_sub = [&app](const char *name, const char *help) {
    auto *s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // dict build
  auto *dict = new_sub("dict", "Token dictionary commands");
  dict->require_subcommand(1);
  auto *dict_build = dict->add_subcommand("build", "Build the token dictionary");
  dict_build->fallthrough();
  std::string normals_path, attacks_path, out_path;
  dict_build->add_option("--normals", normals_path, "Normal corpus (JSONL or CSV)");
  dict_build->add_option("--attacks", attacks_path, "Attack corpus (JSONL or CSV)");
  dict_build->add_option("--out", out_path, "Dictionary output file")->required();

  // features rank
  auto *features = new_sub("features", "Feature ranking commands");
  features->require_subcommand(1);
  auto *rank = features->add_subcommand("rank", "Rank dictionary tokens by mutual information");
  rank->fallthrough();
  rank->add_option("--normals", normals_path, "Normal corpus");
  rank->add_option("--attacks", attacks_path, "Attack corpus");
  rank->add_option("--out", out_path, "Ranking output (TSV)")->required();

  // train
  auto *train_cmd = new_sub("train", "Train a one-class SVM on normal requests");
  std::string ranking_path, features_path, val_normals_path, val_attacks_path, grid_out;
  bool use_grid = false;
  train_cmd->add_option("--normals", normals_path, "Training normals")->required();
  auto *train_rank = train_cmd->add_option("--ranking", ranking_path, "Feature ranking (TSV)");
  auto *train_feat =
      train_cmd->add_option("--features", features_path, "Explicit token list, one per line");
  train_rank->excludes(train_feat);
  train_cmd->add_option("--validation-normals", val_normals_path, "Validation normals");
  train_cmd->add_option("--validation-attacks", val_attacks_path, "Validation attacks");
  train_cmd->add_flag("--grid", use_grid, "Select nu and gamma by grid search");
  train_cmd->add_option("--grid-out", grid_out, "Write the grid table (CSV)");
  train_cmd->add_option("--out", out_path, "Model output (JSON)")->required();

  // grid
  auto *grid_cmd = new_sub("grid", "Grid search over nu and gamma");
  grid_cmd->add_option("--normals", normals_path, "Training normals")->required();
  grid_cmd->add_option("--validation-normals", val_normals_path, "Validation normals")
      ->required();
  grid_cmd->add_option("--attacks", attacks_path, "Attacks blended into the unlabeled mix")
      ->required();
  grid_cmd->add_option("--ranking", ranking_path, "Feature ranking (TSV)")->required();
  grid_cmd->add_option("--out", out_path, "Grid table output (CSV); stdout when omitted");

  // eval
  auto *eval_cmd = new_sub("eval", "Evaluate a model on labeled test data");
  std::string model_path, test_path, metrics_out, roc_out;
  eval_cmd->add_option("--model", model_path, "Model (JSON)")->required();
  eval_cmd->add_option("--test", test_path, "Labeled test corpus");
  eval_cmd->add_option("--normals", normals_path, "Test normals (label by role)");
  eval_cmd->add_option("--attacks", attacks_path, "Test attacks (label by role)");
  eval_cmd->add_option("--metrics", metrics_out, "Metrics output (JSON)");
  eval_cmd->add_option("--roc", roc_out, "ROC output (CSV)");

  // score
  auto *score_cmd = new_sub("score", "Score a JSONL request stream");
  std::string in_path;
  score_cmd->add_option("--model", model_path, "Model (JSON)")->required();
  score_cmd->add_option("--in", in_path, "Input JSONL (default stdin)");

  // split
  auto *split_cmd = new_sub("split", "Split corpora into train/validation/test files");
  std::string out_dir;
  double subsample = 1.0;
  split_cmd->add_option("--normals", normals_path, "Normal corpus");
  split_cmd->add_option("--attacks", attacks_path, "Attack corpus (optional)");
  split_cmd->add_option("--attack-subsample", subsample,
                        "Fraction of each attack category to keep")
      ->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  // synth
  auto *synth_cmd = new_sub("synth", "Generate a synthetic labeled corpus");
  SynthSpec spec;
  std::vector<std::string> families;
  std::string normal_out, attack_out;
  std::size_t noise_vocab = 0;
  synth_cmd->add_option("--n-normal", spec.n_normal, "Normal request count")->required();
  synth_cmd->add_option("--n-attack", spec.n_attack, "Attack request count")->required();
  synth_cmd->add_option("--families", families, "sqli,xss,cmdi,traversal")->delimiter(',');
  synth_cmd->add_option("--noise-vocabulary", noise_vocab, "Size of the noise token pool");
  synth_cmd->add_option("--noise-tokens", spec.noise_tokens_per_request,
                        "Noise tokens per request");
  synth_cmd->add_option("--out", out_path, "Combined JSONL output");
  synth_cmd->add_option("--normal-out", normal_out, "Normal-only JSONL output");
  synth_cmd->add_option("--attack-out", attack_out, "Attack-only JSONL output");

  // run
  auto *run_cmd = new_sub("run", "Full experiment: split, rank, train, evaluate");
  run_cmd->add_option("--normals", normals_path, "Normal corpus (overrides config)");
  run_cmd->add_option("--attacks", attacks_path, "Attack corpus (overrides config)");
  run_cmd->add_flag("--grid", use_grid, "Select nu and gamma by grid search");
  run_cmd->add_option("--out-dir", out_dir, "Artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? k_exit_ok : k_exit_usage;
  }

  try {
    RunConfig cfg = resolve_config(g);
    auto enable_grid = [&cfg] {
      if (cfg.nu_grid.empty())
        cfg.nu_grid = default_nu_grid();
      if (cfg.gamma_grid.empty())
        cfg.gamma_grid = default_gamma_grid();
    };

    if (dict_build->parsed()) {
      const Corpus normals = load_required(normals_path, cfg.normal_corpus, "normal");
      const Corpus attacks = load_required(attacks_path, cfg.attack_corpus, "attack");
      const TokenDictionary d = build_dictionary(attacks, normals, cfg.preprocess);
      d.save(out_path);
      std::printf("dictionary: %zu tokens -> %s\n", d.size(), out_path.c_str());
    } else if (rank->parsed()) {
      const Corpus normals = load_required(normals_path, cfg.normal_corpus, "normal");
      const Corpus attacks = load_required(attacks_path, cfg.attack_corpus, "attack");
      const FeatureRanking ranking = run_rank(cfg, normals, attacks);
      ranking.save(out_path);
      std::printf("ranking: %zu features -> %s\n", ranking.size(), out_path.c_str());
    } else if (train_cmd->parsed()) {
      if (use_grid)
        enable_grid();
      const Corpus normals = load_corpus(normals_path);
      const Corpus val_normals = load_optional(val_normals_path);
      const Corpus val_attacks = load_optional(val_attacks_path);
      TrainArtifacts out;
      if (!features_path.empty()) {
        out = run_train(cfg, read_token_list(features_path), normals, val_normals, val_attacks);
      } else {
        const fs::path rp = ranking_path;
        if (rp.empty())
          throw Error(ErrorKind::InvalidArgument, "train needs --ranking or --features");
        out = run_train(cfg, FeatureRanking::load(rp), normals, val_normals, val_attacks);
      }
      save_model(out.model, out_path);
      if (out.grid && !grid_out.empty()) {
        std::ostringstream buf;
        write_grid_csv(*out.grid, buf);
        write_text(grid_out, buf.str());
      }
      std::printf("model: nu=%g gamma=%g support_vectors=%zu rho=%.6g theta=%.6g "
                  "iterations=%zu -> %s\n",
                  out.model.nu, out.model.params.gamma, out.model.support_vectors.size(),
                  out.model.rho, out.model.theta, static_cast<std::size_t>(out.stats.iterations),
                  out_path.c_str());
    } else if (grid_cmd->parsed()) {
      enable_grid();
      const auto features = select_top(FeatureRanking::load(ranking_path), cfg.n_features);
      const RequestVectorizer vectorize(features, cfg.preprocess, cfg.scaling);
      auto vectors = [&vectorize](const Corpus &c) {
        std::vector<SparseVector> v;
        for (const auto &r : c.requests)
          v.push_back(vectorize(r));
        return v;
      };
      const Corpus val_normals = load_corpus(val_normals_path);
      const Corpus mix =
          blend_unlabeled(val_normals, load_corpus(attacks_path), cfg.unlabeled_ratio, cfg.seed);
      const auto result =
          grid_search(vectors(load_corpus(normals_path)), vectors(val_normals), vectors(mix),
                      cfg.nu_grid, cfg.gamma_grid, cfg.train_options, cfg.threads);
      std::ostringstream buf;
      write_grid_csv(result, buf);
      if (out_path.empty())
        std::cout << buf.str();
      else
        write_text(out_path, buf.str());
      std::fprintf(stderr, "best nu=%g gamma=%g\n", result.best_nu, result.best_gamma);
    } else if (eval_cmd->parsed()) {
      const OcsvmModel model = load_model(model_path);
      Corpus test;
      if (!test_path.empty())
        test = load_corpus(test_path);
      for (auto [path, label] : {std::pair{&normals_path, ClassLabel::Normal},
                                 std::pair{&attacks_path, ClassLabel::Attack}})
        if (!path->empty()) {
          const Corpus part = with_role(load_corpus(*path), label);
          test.requests.insert(test.requests.end(), part.requests.begin(), part.requests.end());
        }
      if (test.empty())
        throw Error(ErrorKind::InvalidArgument, "eval needs --test or --normals/--attacks");
      const EvalReport report = run_eval(model, test);
      if (!metrics_out.empty())
        write_text(metrics_out, metrics_to_json(report.metrics, model.provenance) + "\n");
      if (!roc_out.empty()) {
        std::ostringstream buf;
        write_roc_csv(report.roc, buf);
        write_text(roc_out, buf.str());
      }
      print_metrics(report.metrics);
    } else if (score_cmd->parsed()) {
      const OcsvmModel model = load_model(model_path);
      StreamStats stats;
      if (in_path.empty()) {
        stats = run_score_stream(model, std::cin, std::cout, std::cerr);
      } else {
        std::ifstream in(in_path, std::ios::binary);
        if (!in)
          throw Error(ErrorKind::IoError, "cannot open " + in_path);
        stats = run_score_stream(model, in, std::cout, std::cerr);
      }
      std::fprintf(stderr, "scored %zu of %zu lines (%zu errors)\n", stats.scored, stats.lines,
                   stats.errors);
    } else if (split_cmd->parsed()) {
      const fs::path dir = out_dir;
      fs::create_directories(dir);
      const fs::path np = normals_path.empty() ? cfg.normal_corpus : fs::path(normals_path);
      if (!np.empty()) {
        const NormalSplit s = split_normals(load_corpus(np), cfg.split, cfg.seed);
        save_corpus(s.train, dir / "train.jsonl");
        save_corpus(s.validation, dir / "validation.jsonl");
        save_corpus(s.test, dir / "test.jsonl");
        std::printf("normals: train=%zu validation=%zu test=%zu\n", s.train.size(),
                    s.validation.size(), s.test.size());
      }
      const fs::path ap = attacks_path.empty() ? cfg.attack_corpus : fs::path(attacks_path);
      if (!ap.empty()) {
        Corpus attacks = load_corpus(ap);
        if (subsample < 1.0)
          attacks = subsample_by_category(attacks, subsample, cfg.seed);
        auto [kept, held] = split_attacks(attacks, cfg.attack_holdout, cfg.seed + 1);
        save_corpus(kept, dir / "attacks_kept.jsonl");
        if (!held.empty())
          save_corpus(held, dir / "attacks_holdout.jsonl");
        std::printf("attacks: kept=%zu holdout=%zu\n", kept.size(), held.size());
      }
      if (np.empty() && ap.empty())
        throw Error(ErrorKind::InvalidArgument, "split needs --normals and/or --attacks");
    } else if (synth_cmd->parsed()) {
      spec.seed = cfg.seed;
      if (!families.empty()) {
        spec.families.clear();
        for (const auto &f : families) {
          const auto fam = parse_payload_family(f);
          if (!fam)
            throw Error(ErrorKind::InvalidArgument, "unknown payload family '" + f + "'");
          spec.families.push_back(*fam);
        }
      }
      for (std::size_t k = 0; k < noise_vocab; ++k)
        spec.noise_vocabulary.push_back("noise" + std::to_string(k));
      if (out_path.empty() && normal_out.empty() && attack_out.empty())
        throw Error(ErrorKind::InvalidArgument, "synth needs --out, --normal-out or --attack-out");
      const Corpus corpus = generate(spec);
      if (!out_path.empty())
        save_corpus(corpus, out_path);
      Corpus normals, attacks;
      for (const auto &r : corpus.requests)
        (r.label == ClassLabel::Attack ? attacks : normals).requests.push_back(r);
      if (!normal_out.empty())
        save_corpus(normals, normal_out);
      if (!attack_out.empty())
        save_corpus(attacks, attack_out);
      std::printf("synth: %zu normal, %zu attack\n", normals.size(), attacks.size());
    } else if (run_cmd->parsed()) {
      if (use_grid)
        enable_grid();
      const Corpus normals = load_required(normals_path, cfg.normal_corpus, "normal");
      const Corpus attacks = load_required(attacks_path, cfg.attack_corpus, "attack");
      const ExperimentResult result = run_experiment(cfg, normals, attacks);
      write_experiment(result, out_dir);
      print_metrics(result.evaluation.metrics);
    }
  } catch (const Error &e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.kind())).c_str(), e.what());
    switch (e.kind()) {
    case ErrorKind::NonConvergence:
      return k_exit_nonconvergence;
    case ErrorKind::InvalidArgument:
      return k_exit_usage;
    default:
      return k_exit_data;
    }
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return k_exit_data;
  }
  return k_exit_ok;
}
