#ifndef MIWAF_FEATURE_SELECT_HPP
#define MIWAF_FEATURE_SELECT_HPP

#include "miwaf/request_model.hpp"
#include "miwaf/vectorizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace miwaf {

enum class MiEstimator {
  /// Plug-in MI between token presence (cell > 0) and the class label.
  Presence,
  /// Plug-in MI after equal-frequency binning of the nonzero cells into 4
  /// bins plus a separate zero bin. Sensitivity studies only.
  EqualFrequencyBins,
};

std::string_view estimator_id(MiEstimator estimator);
/// Accepts "presence", "binned" or a full estimator id.
MiEstimator parse_estimator(std::string_view text);

/// Plug-in mutual information in nats of a 2x2 contingency table, where
/// n_xy counts samples with X = x and Y = y. Zero cells contribute nothing.
double mi_from_counts(std::uint64_t n00, std::uint64_t n01, std::uint64_t n10, std::uint64_t n11);

/// Plug-in MI between two binary sequences. Throws LengthMismatch when the
/// lengths differ or are zero.
double mi_binary(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

/// Plug-in MI between two categorical sequences (arbitrary small ints).
double mi_discrete(std::span<const int> x, std::span<const int> y);

/// Plug-in entropy in nats.
double plugin_entropy(std::span<const int> x);

struct RankedFeature {
  std::string token;
  double mi_score = 0.0;
  std::size_t rank = 0; // 1-based

  bool operator==(const RankedFeature &) const = default;
};

/// Tokens sorted by MI descending, ties broken by token. metadata carries
/// provenance (corpus hashes, n_docs) and is written as comment lines.
struct FeatureRanking {
  std::vector<RankedFeature> entries;
  std::string estimator_id;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t size() const noexcept { return entries.size(); }

  /// TSV "rank\ttoken\tmi_score" preceded by "# key=value" comment lines.
  /// Scores use 12 significant digits.
  void write(std::ostream &out) const;
  static FeatureRanking read(std::istream &in);
  void save(const std::filesystem::path &path) const;
  static FeatureRanking load(const std::filesystem::path &path);
};

/// Scores every vocabulary column against the labels. Labels must be Normal
/// or Attack with both present.
FeatureRanking rank_features(const FeatureMatrix &matrix, std::span<const ClassLabel> labels,
                             MiEstimator estimator = MiEstimator::Presence);

/// First n tokens of the ranking. Throws OutOfRange unless 1 <= n <= size.
std::vector<std::string> select_top(const FeatureRanking &ranking, std::size_t n);

} // namespace miwaf

#endif
