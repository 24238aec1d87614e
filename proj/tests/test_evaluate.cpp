#include "miwaf/evaluate.hpp"
#include "miwaf/rng.hpp"
#include "test_support.hpp"

#include <cmath>
#include <sstream>

using namespace miwaf;

namespace {

constexpr auto N = ClassLabel::Normal;
constexpr auto A = ClassLabel::Attack;

/// Fraction of (attack, normal) pairs ranked correctly (attack lower), ties 1/2.
double pairwise_auc(const std::vector<ScoredItem> &items) {
  double good = 0, pairs = 0;
  for (const auto &a : items)
    if (a.label == A)
      for (const auto &n : items)
        if (n.label == N) {
          pairs += 1;
          good += a.score < n.score ? 1.0 : (a.score == n.score ? 0.5 : 0.0);
        }
  return good / pairs;
}

OcsvmModel constant_model(double value) {
  // One support vector at the origin with gamma tiny: decision ~= 1 - rho.
  OcsvmModel m;
  m.support_vectors = {SparseVector(1)};
  m.alphas = {1.0};
  m.params.gamma = 1e-300;
  m.rho = 1.0 - value;
  m.nu = 1.0;
  m.training_size = 1;
  m.dim = 1;
  return m;
}

std::vector<SparseVector> points(std::initializer_list<double> xs) {
  std::vector<SparseVector> out;
  for (double x : xs)
    out.push_back(SparseVector::from_dense(std::vector<double>{x}));
  return out;
}

} // namespace

TEST_SUITE("evaluate") {

TEST_CASE("confusion counts") {
  const std::vector<ScoredItem> s{{-1, A}, {1, N}};
  auto c = confusion(s, 0.0);
  CHECK(c.tp == 1);
  CHECK(c.tn == 1);
  CHECK(c.accuracy() == 1.0);
  c = confusion(s, -5.0);
  CHECK(c.tpr() == 0.0);
  CHECK(c.fpr() == 0.0);
  c = confusion(s, 5.0);
  CHECK(c.tpr() == 1.0);
  CHECK(c.fpr() == 1.0);
  // Boundary: decision == theta is Normal.
  c = confusion(s, -1.0);
  CHECK(c.fn == 1);
  const std::vector<ScoredItem> only_attacks{{0.0, A}};
  CHECK(confusion(only_attacks, 1.0).fpr() == 0.0);
  const std::vector<ScoredItem> unlabeled{{0.0, ClassLabel::Unlabeled}};
  CHECK_THROWS_KIND(confusion(unlabeled, 0.0), ErrorKind::NoLabeledData);
}

TEST_CASE("tp and fp are monotone in theta") {
  Rng rng(1);
  std::vector<ScoredItem> s;
  for (int i = 0; i < 100; ++i)
    s.push_back({static_cast<double>(rng.below(20)), rng.below(2) ? A : N});
  std::size_t tp = 0, fp = 0;
  for (double t = -1; t <= 21; t += 0.5) {
    const auto c = confusion(s, t);
    CHECK(c.tp >= tp);
    CHECK(c.fp >= fp);
    tp = c.tp;
    fp = c.fp;
  }
}

TEST_CASE("roc of a perfectly separated set") {
  const std::vector<ScoredItem> s{{-3, A}, {-2, A}, {1, N}, {2, N}};
  const auto curve = roc(s);
  CHECK(curve.auc == 1.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.back().tpr == 1.0);
  CHECK(curve.points.back().fpr == 1.0);
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    CHECK(curve.points[k].theta > curve.points[k - 1].theta);
    CHECK(curve.points[k].tpr >= curve.points[k - 1].tpr);
    CHECK(curve.points[k].fpr >= curve.points[k - 1].fpr);
  }
  const double theta = pick_theta(curve, ThetaPolicy::max_youden());
  CHECK(theta > -2.0);
  CHECK(theta < 1.0);
  const auto c = confusion(s, theta);
  CHECK(c.tpr() == 1.0);
  CHECK(c.fpr() == 0.0);
}

TEST_CASE("four-point hand cases") {
  // N: +2, +1   A: -1, +0.5  -> every attack below every normal.
  const std::vector<ScoredItem> separated{{2, N}, {1, N}, {-1, A}, {0.5, A}};
  CHECK(roc(separated).auc == 1.0);
  // N: +2, +1   A: -1, +1 -> one tied pair: (3 + 0.5) / 4.
  const std::vector<ScoredItem> tied{{2, N}, {1, N}, {-1, A}, {1, A}};
  const auto curve = roc(tied);
  CHECK(curve.auc == doctest::Approx(0.875).epsilon(1e-15));
  const double theta = pick_theta(curve, ThetaPolicy::max_youden());
  const auto c = confusion(tied, theta);
  CHECK(c.tpr() - c.fpr() == doctest::Approx(0.5));
  CHECK(theta > -1.0);
  CHECK(theta < 1.0);
}

TEST_CASE("roc needs both classes") {
  const std::vector<ScoredItem> s{{1, N}, {2, N}, {0, ClassLabel::Unlabeled}};
  CHECK_THROWS_KIND(roc(s), ErrorKind::SingleClass);
}

TEST_CASE("trapezoid AUC equals the pairwise estimator") {
  Rng rng(42);
  for (int t = 0; t < 100; ++t) {
    std::vector<ScoredItem> s;
    const auto n = 2 + rng.below(199);
    for (std::size_t i = 0; i < n; ++i)
      s.push_back({static_cast<double>(rng.below(t % 2 ? 10 : 1000)) / 7.0, rng.below(2) ? A : N});
    s[0].label = A;
    s[1].label = N;
    CHECK(std::abs(roc(s).auc - pairwise_auc(s)) <= 1e-9);
  }
}

TEST_CASE("AUC is invariant under monotone transforms and ~0.5 for random labels") {
  Rng rng(8);
  std::vector<ScoredItem> s, t;
  for (int i = 0; i < 4000; ++i) {
    const double x = rng.uniform() * 4 - 2;
    const auto label = rng.below(2) ? A : N;
    s.push_back({x, label});
    t.push_back({std::exp(3 * x) + 7, label});
  }
  const double auc = roc(s).auc;
  CHECK(std::abs(auc - roc(t).auc) <= 1e-12);
  CHECK(std::abs(auc - 0.5) <= 0.05);
}

TEST_CASE("theta policies") {
  // Scores: attacks at 0..4, normals at 3..9.
  std::vector<ScoredItem> s;
  for (int i = 0; i < 5; ++i)
    s.push_back({static_cast<double>(i), A});
  for (int i = 3; i < 10; ++i)
    s.push_back({static_cast<double>(i), N});
  const auto curve = roc(s);
  // fpr_cap(0): flag only scores below 3 -> tpr 0.6.
  const double t0 = pick_theta(curve, ThetaPolicy::capped(0.0));
  CHECK(confusion(s, t0).fpr() == 0.0);
  CHECK(confusion(s, t0).tpr() == doctest::Approx(0.6));
  CHECK(t0 == doctest::Approx(2.5));
  const double t1 = pick_theta(curve, ThetaPolicy::capped(1.0));
  CHECK(confusion(s, t1).tpr() == 1.0);
  CHECK_THROWS_KIND(pick_theta(curve, ThetaPolicy::capped(-0.1)), ErrorKind::Infeasible);

  CHECK(parse_theta_policy("max_youden") == ThetaPolicy::max_youden());
  CHECK(parse_theta_policy("fpr_cap:0.05") == ThetaPolicy::capped(0.05));
  CHECK(parse_theta_policy(to_string(ThetaPolicy::capped(0.05))) == ThetaPolicy::capped(0.05));
  CHECK_THROWS_KIND(parse_theta_policy("best"), ErrorKind::InvalidArgument);
}

TEST_CASE("max_youden ties prefer smaller fpr then smaller theta") {
  RocCurve c;
  c.points = {{0, 0, 0}, {1, 0.5, 0.0}, {2, 0.5, 0.0}, {3, 0.75, 0.25}, {4, 1, 1}};
  CHECK(pick_theta(c, ThetaPolicy::max_youden()) == 1.0);
}

TEST_CASE("f_hat") {
  const auto normals = points({0, 0, 0, 0, 0, 0, 0, 0, 0, 1});
  auto accept_all = constant_model(1.0);
  CHECK(f_hat(accept_all, normals, normals) == 1.0);
  auto reject_all = constant_model(-1.0);
  CHECK(f_hat(reject_all, normals, normals) == 0.0);

  // A model accepting x < 0.5: r = 0.9 on normals, q = 0.5 on a half-attack mix.
  OcsvmModel m;
  m.support_vectors = points({0});
  m.alphas = {1.0};
  m.params.gamma = 1.0;
  m.rho = std::exp(-0.25);
  m.nu = 1.0;
  m.training_size = 1;
  m.dim = 1;
  const auto mix = points({0, 0, 1, 1});
  CHECK(f_hat(m, normals, mix) == doctest::Approx(0.81 / 0.5));
  // Duplicating both sets changes nothing.
  auto n2 = normals, mix2 = mix;
  n2.insert(n2.end(), normals.begin(), normals.end());
  mix2.insert(mix2.end(), mix.begin(), mix.end());
  CHECK(f_hat(m, n2, mix2) == f_hat(m, normals, mix));
  CHECK_THROWS_KIND(f_hat(m, {}, mix), ErrorKind::EmptySet);
}

TEST_CASE("grid search table order, tie-break and determinism across threads") {
  Rng rng(6);
  std::vector<SparseVector> train, val, mix;
  auto gauss = [&rng](double shift) {
    return SparseVector::from_dense(
        std::vector<double>{shift + rng.uniform() - 0.5, shift + rng.uniform() - 0.5});
  };
  for (int i = 0; i < 60; ++i)
    train.push_back(gauss(0));
  for (int i = 0; i < 20; ++i) {
    val.push_back(gauss(0));
    mix.push_back(gauss(0));
    mix.push_back(gauss(3));
  }
  const std::vector<double> nus{0.2, 0.05}, gammas{2.0, 0.5};
  const auto one = grid_search(train, val, mix, nus, gammas, {}, 1);
  const auto four = grid_search(train, val, mix, nus, gammas, {}, 4);
  REQUIRE(one.table.size() == 4);
  CHECK(one.table[0].nu == 0.05);
  CHECK(one.table[0].gamma == 0.5);
  CHECK(one.table[3].nu == 0.2);
  CHECK(one.table[3].gamma == 2.0);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(one.table[k].f_hat == four.table[k].f_hat);
  CHECK(one.best_nu == four.best_nu);
  CHECK(one.best_gamma == four.best_gamma);
  double best = -2;
  for (const auto &c : one.table)
    best = std::max(best, c.f_hat);
  for (const auto &c : one.table)
    if (c.f_hat == best) {
      CHECK(c.nu == one.best_nu);
      CHECK(c.gamma == one.best_gamma);
      break;
    }

  const std::vector<double> single_nu{0.1}, single_gamma{1.0};
  const auto single = grid_search(train, val, mix, single_nu, single_gamma);
  CHECK(single.best_nu == 0.1);
  CHECK(single.best_gamma == 1.0);

  // Identical rows make every cell accept everything: all ties, smallest wins.
  const std::vector<SparseVector> same(10, SparseVector(2));
  const auto ties = grid_search(same, same, same, nus, gammas);
  CHECK(ties.best_nu == 0.05);
  CHECK(ties.best_gamma == 0.5);

  // Failing cells are recorded as -1 instead of aborting the sweep.
  const std::vector<double> bad_nu{0.1, 2.0};
  const auto partial = grid_search(train, val, mix, bad_nu, single_gamma);
  CHECK(partial.table[1].f_hat == -1.0);
  CHECK(partial.best_nu == 0.1);

  const std::vector<double> empty;
  CHECK_THROWS_KIND(grid_search(train, val, mix, empty, gammas), ErrorKind::InvalidArgument);
}

TEST_CASE("report writers") {
  const std::vector<ScoredItem> s{{-1, A}, {1, N}};
  const auto m = compute_metrics(s, 0.0, 100);
  CHECK(m.acc == 1.0);
  CHECK(m.auc == 1.0);
  const std::string json = metrics_to_json(m, {{"seed", "1"}});
  for (const char *key : {"\"acc\"", "\"tpr\"", "\"fpr\"", "\"auc\"", "\"theta\"",
                          "\"n_features\": 100", "\"provenance\""})
    CHECK(json.find(key) != std::string::npos);

  std::ostringstream out;
  write_roc_csv(roc(s), out);
  const std::string csv = out.str();
  CHECK(csv.rfind("theta,tpr,fpr\n", 0) == 0);
  CHECK(csv.find("# auc=1\n") != std::string::npos);

  GridSearchResult g;
  g.table = {{0.05, 0.5, 1.25}};
  g.best_nu = 0.05;
  g.best_gamma = 0.5;
  std::ostringstream grid;
  write_grid_csv(g, grid);
  CHECK(grid.str().find("nu,gamma,f_hat\n0.050000000000000003,0.5,1.25\n") == 0);
  CHECK(grid.str().find("r^2/q") != std::string::npos);
}

} // TEST_SUITE
