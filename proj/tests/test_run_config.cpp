#include "miwaf/run_config.hpp"
#include "test_support.hpp"

#include <fstream>

using namespace miwaf;

TEST_SUITE("run_config") {

TEST_CASE("defaults") {
  const RunConfig cfg;
  CHECK(cfg.n_features == 100);
  CHECK(cfg.nu == 0.05);
  CHECK(cfg.gamma == 0.5);
  CHECK(cfg.preprocess.include_body);
  CHECK_FALSE(cfg.preprocess.filter.keeps("host"));
  CHECK(cfg.nu_grid.empty());
  CHECK(default_nu_grid() == std::vector<double>{0.01, 0.05, 0.1, 0.2});
  CHECK(default_gamma_grid() == std::vector<double>{0.1, 0.5, 1.0, 2.0});
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config text overrides fields") {
  RunConfig cfg;
  apply_config_text(cfg, R"(# comment
[model]
n_features = 25
nu = 0.1   # trailing comment
gamma = 2
nu_grid = [0.01, 0.2]
gamma_grid = [0.5]
header_allowlist = ["User-Agent", "cookie"]
include_body = false
seed = 7
split = [0.5, 0.25, 0.25]
vector_scaling = "binary"
theta_policy = "fpr_cap:0.01"
estimator = "binned"
attack_holdout = 0
tol = 1e-6
threads = 2
)");
  CHECK(cfg.n_features == 25);
  CHECK(cfg.nu == 0.1);
  CHECK(cfg.gamma == 2.0);
  CHECK(cfg.nu_grid == std::vector<double>{0.01, 0.2});
  CHECK(cfg.gamma_grid == std::vector<double>{0.5});
  CHECK(cfg.preprocess.filter.mode() == HeaderFilter::Mode::Allowlist);
  CHECK(cfg.preprocess.filter.keeps("user-agent"));
  CHECK_FALSE(cfg.preprocess.include_body);
  CHECK(cfg.seed == 7);
  CHECK(cfg.split.validation == 0.25);
  CHECK(cfg.scaling == VectorScaling::Binary);
  CHECK(cfg.theta_policy == ThetaPolicy::capped(0.01));
  CHECK(cfg.estimator == MiEstimator::EqualFrequencyBins);
  CHECK(cfg.attack_holdout == 0.0);
  CHECK(cfg.train_options.tol == 1e-6);
  CHECK(cfg.threads == 2);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("bad config text is rejected") {
  RunConfig cfg;
  CHECK_THROWS_KIND(apply_config_text(cfg, "colour = 1"), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(apply_config_text(cfg, "nu"), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(apply_config_text(cfg, "nu = abc"), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(apply_config_text(cfg, "split = [0.5, 0.5]"), ErrorKind::InvalidArgument);
  CHECK_THROWS_KIND(apply_config_text(cfg, "nu_grid = [0.1"), ErrorKind::InvalidArgument);
  try {
    apply_config_text(cfg, "\n\nbogus = 1");
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("validation of ranges") {
  auto bad = [](auto mutate) {
    RunConfig cfg;
    mutate(cfg);
    CHECK_THROWS_KIND(cfg.validate(), ErrorKind::InvalidArgument);
  };
  bad([](RunConfig &c) { c.n_features = 0; });
  bad([](RunConfig &c) { c.nu = 0; });
  bad([](RunConfig &c) { c.nu = 1.5; });
  bad([](RunConfig &c) { c.gamma = -1; });
  bad([](RunConfig &c) { c.split = {0.8, 0.2, 0.2}; });
  bad([](RunConfig &c) { c.split = {0.8, 0.0, 0.2}; });
  bad([](RunConfig &c) { c.nu_grid = {0.1, 0.0}; });
  bad([](RunConfig &c) { c.attack_holdout = 1.0; });
}

TEST_CASE("corpus paths are resolved against the config file") {
  test::TempDir dir;
  {
    std::ofstream out(dir / "run.toml");
    out << "normal_corpus = \"data/n.jsonl\"\nattack_corpus = \"/abs/a.jsonl\"\n";
  }
  const auto cfg = load_run_config(dir / "run.toml");
  CHECK(cfg.normal_corpus == dir.path() / "data/n.jsonl");
  CHECK(cfg.attack_corpus == "/abs/a.jsonl");
  CHECK_THROWS_KIND(load_run_config(dir / "missing.toml"), ErrorKind::IoError);
}

} // TEST_SUITE
