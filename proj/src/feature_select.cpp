#include "miwaf/feature_select.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/escape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace miwaf {

namespace {

constexpr std::size_t k_bins = 4;

double mi_term(std::uint64_t n_xy, std::uint64_t n_x, std::uint64_t n_y, double n) {
  if (n_xy == 0)
    return 0.0;
  const double joint = static_cast<double>(n_xy);
  return (joint / n) *
         std::log(joint * n / (static_cast<double>(n_x) * static_cast<double>(n_y)));
}

// Equal-frequency bin index (1..k_bins) for each nonzero value; 0 stays 0.
std::vector<int> bin_column(const std::vector<double> &column) {
  std::vector<double> nonzero;
  for (double v : column)
    if (v != 0.0)
      nonzero.push_back(v);
  std::vector<int> out(column.size(), 0);
  if (nonzero.empty())
    return out;
  std::sort(nonzero.begin(), nonzero.end());

  // Upper edges of bins 1..k_bins-1 at the empirical quantiles.
  std::vector<double> edges;
  for (std::size_t b = 1; b < k_bins; ++b) {
    const std::size_t pos = (b * nonzero.size()) / k_bins;
    edges.push_back(nonzero[std::min(pos, nonzero.size() - 1)]);
  }
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column[i] == 0.0)
      continue;
    const auto bin = std::upper_bound(edges.begin(), edges.end(), column[i]) - edges.begin();
    out[i] = static_cast<int>(bin) + 1;
  }
  return out;
}

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace

std::string_view estimator_id(MiEstimator estimator) {
  switch (estimator) {
  case MiEstimator::Presence: return "plugin-presence-nats";
  case MiEstimator::EqualFrequencyBins: return "plugin-eqfreq4-nats";
  }
  return "plugin-presence-nats";
}

MiEstimator parse_estimator(std::string_view text) {
  if (text == "presence" || text == estimator_id(MiEstimator::Presence))
    return MiEstimator::Presence;
  if (text == "binned" || text == estimator_id(MiEstimator::EqualFrequencyBins))
    return MiEstimator::EqualFrequencyBins;
  throw Error(ErrorKind::InvalidArgument, "unknown MI estimator '" + std::string(text) + "'");
}

double mi_from_counts(std::uint64_t n00, std::uint64_t n01, std::uint64_t n10,
                      std::uint64_t n11) {
  const std::uint64_t total = n00 + n01 + n10 + n11;
  if (total == 0)
    return 0.0;
  const double n = static_cast<double>(total);
  const std::uint64_t x0 = n00 + n01, x1 = n10 + n11;
  const std::uint64_t y0 = n00 + n10, y1 = n01 + n11;
  const double mi = mi_term(n00, x0, y0, n) + mi_term(n01, x0, y1, n) +
                    mi_term(n10, x1, y0, n) + mi_term(n11, x1, y1, n);
  return std::max(mi, 0.0);
}

double mi_binary(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size() || x.empty())
    throw Error(ErrorKind::LengthMismatch, "mi_binary needs equal, non-zero lengths (" +
                                               std::to_string(x.size()) + " vs " +
                                               std::to_string(y.size()) + ")");
  std::uint64_t n[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < x.size(); ++i)
    ++n[x[i] != 0][y[i] != 0];
  return mi_from_counts(n[0][0], n[0][1], n[1][0], n[1][1]);
}

double mi_discrete(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size() || x.empty())
    throw Error(ErrorKind::LengthMismatch, "mi_discrete needs equal, non-zero lengths");
  std::map<std::pair<int, int>, std::uint64_t> joint;
  std::map<int, std::uint64_t> px, py;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++joint[{x[i], y[i]}];
    ++px[x[i]];
    ++py[y[i]];
  }
  const double n = static_cast<double>(x.size());
  double mi = 0.0;
  for (const auto &[xy, count] : joint)
    mi += mi_term(count, px[xy.first], py[xy.second], n);
  return std::max(mi, 0.0);
}

double plugin_entropy(std::span<const int> x) {
  if (x.empty())
    return 0.0;
  std::map<int, std::uint64_t> counts;
  for (int v : x)
    ++counts[v];
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (const auto &[value, count] : counts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log(p);
  }
  return h;
}

// ---------------------------------------------------------------------------

FeatureRanking rank_features(const FeatureMatrix &matrix, std::span<const ClassLabel> labels,
                             MiEstimator estimator) {
  if (matrix.rows.size() != labels.size())
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(matrix.rows.size()) + " rows but " +
                    std::to_string(labels.size()) + " labels");
  std::size_t n_attack = 0, n_normal = 0;
  for (auto label : labels) {
    if (label == ClassLabel::Unlabeled)
      throw Error(ErrorKind::InvalidArgument, "unlabeled request in MI ranking input");
    (label == ClassLabel::Attack ? n_attack : n_normal)++;
  }
  if (n_attack == 0 || n_normal == 0)
    throw Error(ErrorKind::SingleClass, "MI ranking needs both Normal and Attack requests");

  const std::size_t dim = matrix.vocab.size();
  std::vector<double> scores(dim, 0.0);

  if (estimator == MiEstimator::Presence) {
    std::vector<std::uint64_t> present_attack(dim, 0), present_normal(dim, 0);
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
      auto &counter = labels[i] == ClassLabel::Attack ? present_attack : present_normal;
      const auto &row = matrix.rows[i];
      for (std::size_t k = 0; k < row.nnz(); ++k)
        if (row.values()[k] > 0.0)
          ++counter[row.indices()[k]];
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const std::uint64_t n11 = present_attack[j];
      const std::uint64_t n10 = present_normal[j];
      scores[j] = mi_from_counts(n_normal - n10, n_attack - n11, n10, n11);
    }
  } else {
    // Column-major copy of the nonzero cells.
    std::vector<std::vector<std::pair<std::size_t, double>>> columns(dim);
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
      const auto &row = matrix.rows[i];
      for (std::size_t k = 0; k < row.nnz(); ++k)
        columns[row.indices()[k]].emplace_back(i, row.values()[k]);
    }
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      y[i] = labels[i] == ClassLabel::Attack ? 1 : 0;
    std::vector<double> dense(labels.size());
    for (std::size_t j = 0; j < dim; ++j) {
      if (columns[j].empty())
        continue;
      std::fill(dense.begin(), dense.end(), 0.0);
      for (const auto &[i, v] : columns[j])
        dense[i] = v;
      scores[j] = mi_discrete(bin_column(dense), y);
    }
  }

  std::vector<std::size_t> order(dim);
  for (std::size_t j = 0; j < dim; ++j)
    order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b])
      return scores[a] > scores[b];
    return matrix.vocab[a] < matrix.vocab[b];
  });

  FeatureRanking ranking;
  ranking.estimator_id = std::string(estimator_id(estimator));
  ranking.entries.reserve(dim);
  for (std::size_t r = 0; r < dim; ++r)
    ranking.entries.push_back({matrix.vocab[order[r]], scores[order[r]], r + 1});
  ranking.metadata.emplace_back("n_docs", std::to_string(labels.size()));
  ranking.metadata.emplace_back("n_attack", std::to_string(n_attack));
  ranking.metadata.emplace_back("n_normal", std::to_string(n_normal));
  return ranking;
}

std::vector<std::string> select_top(const FeatureRanking &ranking, std::size_t n) {
  if (n < 1 || n > ranking.size())
    throw Error(ErrorKind::OutOfRange, "cannot select " + std::to_string(n) + " of " +
                                           std::to_string(ranking.size()) + " ranked tokens");
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(ranking.entries[i].token);
  return out;
}

// ---------------------------------------------------------------------------
// Ranking file

void FeatureRanking::write(std::ostream &out) const {
  out << "# estimator_id=" << estimator_id << '\n';
  for (const auto &[key, value] : metadata)
    out << "# " << key << '=' << value << '\n';
  out << "rank\ttoken\tmi_score\n";
  for (const auto &e : entries)
    out << e.rank << '\t' << escape_bytes(e.token) << '\t' << format_score(e.mi_score) << '\n';
}

FeatureRanking FeatureRanking::read(std::istream &in) {
  FeatureRanking ranking;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    if (line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      if (key == "estimator_id")
        ranking.estimator_id = std::move(value);
      else
        ranking.metadata.emplace_back(std::move(key), std::move(value));
      continue;
    }
    if (!saw_header) {
      if (line != "rank\ttoken\tmi_score")
        throw MalformedRecord(line_no, "expected ranking header row");
      saw_header = true;
      continue;
    }
    std::istringstream fields(line);
    std::string rank, token, score;
    if (!std::getline(fields, rank, '\t') || !std::getline(fields, token, '\t') ||
        !std::getline(fields, score))
      throw MalformedRecord(line_no, "ranking row needs three tab-separated fields");
    auto decoded = unescape_bytes(token);
    if (!decoded)
      throw MalformedRecord(line_no, "invalid escape in token");
    RankedFeature e;
    e.token = std::move(*decoded);
    try {
      e.rank = std::stoul(rank);
      e.mi_score = std::stod(score);
    } catch (const std::exception &) {
      throw MalformedRecord(line_no, "non-numeric rank or score");
    }
    if (e.rank != ranking.entries.size() + 1)
      throw MalformedRecord(line_no, "ranks must be consecutive from 1");
    ranking.entries.push_back(std::move(e));
  }
  if (!saw_header)
    throw MalformedRecord(line_no, "ranking file has no header row");
  return ranking;
}

void FeatureRanking::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  write(out);
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

FeatureRanking FeatureRanking::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read(in);
}

} // namespace miwaf
