#include "miwaf/feature_select.hpp"
#include "miwaf/rng.hpp"
#include "miwaf/tokenizer.hpp"
#include "miwaf/vectorizer.hpp"
#include "test_support.hpp"

#include <cmath>
#include <sstream>

using namespace miwaf;

namespace {

/// Brute-force plug-in MI: double sum over the joint support.
double mi_oracle(const std::vector<std::uint8_t> &x, const std::vector<std::uint8_t> &y) {
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b) {
      double nab = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        nab += (x[i] == a && y[i] == b);
        na += (x[i] == a);
        nb += (y[i] == b);
      }
      if (nab > 0)
        total += (nab / n) * std::log((nab / n) / ((na / n) * (nb / n)));
    }
  return total;
}

double entropy_oracle(const std::vector<std::uint8_t> &x) {
  double ones = 0;
  for (auto v : x)
    ones += v;
  const double n = static_cast<double>(x.size());
  double h = 0;
  for (double c : {ones, n - ones})
    if (c > 0)
      h -= c / n * std::log(c / n);
  return h;
}

FeatureMatrix presence_matrix(const std::vector<std::vector<int>> &columns,
                              const std::vector<std::string> &tokens) {
  FeatureMatrix m;
  m.vocab = Vocabulary(tokens);
  const std::size_t rows = columns.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    SparseVector v(tokens.size());
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j][i])
        v.push_back(j, 0.25 * columns[j][i]);
    m.rows.push_back(v);
  }
  return m;
}

std::vector<ClassLabel> labels_of(const std::vector<int> &y) {
  std::vector<ClassLabel> out;
  for (int v : y)
    out.push_back(v ? ClassLabel::Attack : ClassLabel::Normal);
  return out;
}

} // namespace

TEST_SUITE("feature_select") {

TEST_CASE("mi_binary examples") {
  using B = std::vector<std::uint8_t>;
  CHECK(mi_binary(B{0, 0, 1, 1}, B{0, 0, 1, 1}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(mi_binary(B{1, 1, 1, 1}, B{0, 1, 0, 1}) == 0.0);
  CHECK(mi_binary(B{0, 0, 1, 1}, B{0, 1, 0, 1}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_KIND(mi_binary(B{0, 1}, B{0}), ErrorKind::LengthMismatch);
  CHECK_THROWS_KIND(mi_binary(B{}, B{}), ErrorKind::LengthMismatch);
}

TEST_CASE("mi_from_counts matches the brute-force oracle on every small table") {
  for (int total = 1; total <= 12; ++total)
    for (int n00 = 0; n00 <= total; ++n00)
      for (int n01 = 0; n00 + n01 <= total; ++n01)
        for (int n10 = 0; n00 + n01 + n10 <= total; ++n10) {
          const int n11 = total - n00 - n01 - n10;
          std::vector<std::uint8_t> x, y;
          for (auto [a, b, c] : {std::tuple{0, 0, n00}, std::tuple{0, 1, n01},
                                 std::tuple{1, 0, n10}, std::tuple{1, 1, n11}})
            for (int k = 0; k < c; ++k) {
              x.push_back(static_cast<std::uint8_t>(a));
              y.push_back(static_cast<std::uint8_t>(b));
            }
          const double expect = mi_oracle(x, y);
          REQUIRE(std::abs(mi_binary(x, y) - expect) <= 1e-12);
          REQUIRE(std::abs(mi_from_counts(n00, n01, n10, n11) - expect) <= 1e-12);
        }
}

TEST_CASE("symmetry, non-negativity and entropy bound on random pairs") {
  Rng rng(77);
  for (int t = 0; t < 1000; ++t) {
    const auto n = 1 + rng.below(60);
    const auto px = rng.uniform(), py = rng.uniform();
    std::vector<std::uint8_t> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform() < px;
      y[i] = rng.below(3) == 0 ? x[i] : rng.uniform() < py;
    }
    const double xy = mi_binary(x, y), yx = mi_binary(y, x);
    CHECK(std::abs(xy - yx) <= 1e-12);
    CHECK(xy >= 0.0);
    CHECK(xy <= std::min(entropy_oracle(x), entropy_oracle(y)) + 1e-12);
  }
}

TEST_CASE("mi_discrete and entropy") {
  const std::vector<int> x{0, 1, 2, 0, 1, 2};
  CHECK(plugin_entropy(x) == doctest::Approx(std::log(3.0)));
  CHECK(mi_discrete(x, x) == doctest::Approx(std::log(3.0)));
  CHECK(mi_discrete(x, std::vector<int>{5, 5, 5, 5, 5, 5}) == 0.0);
  const std::vector<std::uint8_t> bx{0, 1, 1, 0, 1}, by{1, 1, 0, 0, 1};
  const std::vector<int> ix(bx.begin(), bx.end()), iy(by.begin(), by.end());
  CHECK(mi_discrete(ix, iy) == doctest::Approx(mi_binary(bx, by)).epsilon(1e-12));
}

TEST_CASE("rank_features ordering and tie-break") {
  //            perfect       everywhere    duplicate A   duplicate B
  const std::vector<std::vector<int>> cols{
      {1, 1, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1}, {1, 0, 1, 0, 0, 0}, {1, 0, 1, 0, 0, 0}};
  const auto m = presence_matrix(cols, {"zz_perfect", "all", "dup_b", "dup_a"});
  const auto labels = labels_of({1, 1, 0, 0, 0, 0});
  const auto r = rank_features(m, labels);
  REQUIRE(r.size() == 4);
  CHECK(r.entries[0].token == "zz_perfect");
  CHECK(r.entries[0].rank == 1);
  CHECK(r.entries[1].token == "dup_a");
  CHECK(r.entries[2].token == "dup_b");
  CHECK(r.entries[1].mi_score == r.entries[2].mi_score);
  CHECK(r.entries[3].token == "all");
  CHECK(r.entries[3].mi_score == 0.0);
  CHECK(r.estimator_id == "plugin-presence-nats");
  for (std::size_t k = 1; k < r.size(); ++k)
    CHECK(r.entries[k - 1].mi_score >= r.entries[k].mi_score);
}

TEST_CASE("rank_features guards") {
  const auto m = presence_matrix({{1, 0}}, {"a"});
  CHECK_THROWS_KIND(rank_features(m, labels_of({1, 1})), ErrorKind::SingleClass);
  CHECK_THROWS_KIND(rank_features(m, labels_of({1})), ErrorKind::LengthMismatch);
  const std::vector<ClassLabel> with_unlabeled{ClassLabel::Attack, ClassLabel::Unlabeled};
  CHECK_THROWS_KIND(rank_features(m, with_unlabeled), ErrorKind::InvalidArgument);
}

TEST_CASE("joint row permutation leaves scores unchanged") {
  Rng rng(4);
  std::vector<std::vector<int>> cols(6, std::vector<int>(40));
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    y[i] = i % 3 == 0;
    for (auto &c : cols)
      c[i] = rng.below(2) ? static_cast<int>(1 + rng.below(3)) : 0;
  }
  const std::vector<std::string> toks{"a", "b", "c", "d", "e", "f"};
  const auto base = rank_features(presence_matrix(cols, toks), labels_of(y));

  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<std::size_t>(perm));
  auto pcols = cols;
  std::vector<int> py(40);
  for (std::size_t i = 0; i < 40; ++i) {
    py[i] = y[perm[i]];
    for (std::size_t j = 0; j < cols.size(); ++j)
      pcols[j][i] = cols[j][perm[i]];
  }
  const auto shuffled = rank_features(presence_matrix(pcols, toks), labels_of(py));
  REQUIRE(shuffled.size() == base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(shuffled.entries[k].token == base.entries[k].token);
    CHECK(std::abs(shuffled.entries[k].mi_score - base.entries[k].mi_score) <= 1e-12);
  }
}

TEST_CASE("a token present in every attack and no normal ranks first") {
  std::vector<RawRequest> normals, attacks;
  for (int i = 0; i < 20; ++i)
    normals.push_back(test::make_request("GET", "/page" + std::to_string(i % 5)));
  for (int i = 0; i < 5; ++i)
    attacks.push_back(test::make_request("GET", "/page" + std::to_string(i) + "%20union"));
  const auto n = test::make_corpus(normals), a = test::make_corpus(attacks);
  const PreprocessConfig cfg;
  const auto dict = build_dictionary(a, n, cfg);
  std::vector<std::vector<std::string>> docs;
  std::vector<ClassLabel> labels;
  for (const auto &r : n.requests) {
    docs.push_back(request_tokens(r, cfg));
    labels.push_back(ClassLabel::Normal);
  }
  for (const auto &r : a.requests) {
    docs.push_back(request_tokens(r, cfg));
    labels.push_back(ClassLabel::Attack);
  }
  const auto ranking = rank_features(tfidf_matrix(docs, dict.vocabulary()), labels);
  CHECK(ranking.entries[0].token == "union");
  CHECK(select_top(ranking, 1) == std::vector<std::string>{"union"});
  CHECK(select_top(ranking, ranking.size()).size() == ranking.size());
  CHECK_THROWS_KIND(select_top(ranking, 0), ErrorKind::OutOfRange);
  CHECK_THROWS_KIND(select_top(ranking, ranking.size() + 1), ErrorKind::OutOfRange);
}

TEST_CASE("binned estimator is available but distinct") {
  const auto m = presence_matrix({{1, 2, 3, 4, 0, 0, 0, 0}}, {"a"});
  const auto labels = labels_of({1, 1, 1, 1, 0, 0, 0, 0});
  const auto r = rank_features(m, labels, MiEstimator::EqualFrequencyBins);
  CHECK(r.estimator_id == "plugin-eqfreq4-nats");
  CHECK(r.entries[0].mi_score == doctest::Approx(std::log(2.0)));
  CHECK(parse_estimator("binned") == MiEstimator::EqualFrequencyBins);
  CHECK(parse_estimator("plugin-presence-nats") == MiEstimator::Presence);
  CHECK_THROWS_KIND(parse_estimator("knn"), ErrorKind::InvalidArgument);
}

TEST_CASE("ranking file round trip") {
  FeatureRanking r;
  r.estimator_id = "plugin-presence-nats";
  r.metadata = {{"n_docs", "3"}, {"corpus_sha256", "abc"}};
  r.entries = {{"tab\tbed", 0.5, 1}, {"x", 0.123456789012345, 2}, {"y", 0.0, 3}};
  std::ostringstream out;
  r.write(out);
  const std::string text = out.str();
  CHECK(text.find("# estimator_id=plugin-presence-nats\n") == 0);
  CHECK(text.find("rank\ttoken\tmi_score\n") != std::string::npos);
  CHECK(text.find("2\tx\t0.123456789012\n") != std::string::npos);

  std::istringstream in(text);
  const auto back = FeatureRanking::read(in);
  CHECK(back.estimator_id == r.estimator_id);
  CHECK(back.metadata == r.metadata);
  REQUIRE(back.size() == 3);
  CHECK(back.entries[0].token == "tab\tbed");
  CHECK(back.entries[1].mi_score == doctest::Approx(0.123456789012));

  std::istringstream bad("# estimator_id=x\nrank\ttoken\tmi_score\n2\ta\t0.1\n");
  CHECK_THROWS_KIND(FeatureRanking::read(bad), ErrorKind::MalformedRecord);
}

} // TEST_SUITE
