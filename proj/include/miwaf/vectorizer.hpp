#ifndef MIWAF_VECTORIZER_HPP
#define MIWAF_VECTORIZER_HPP

#include "miwaf/tokenizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace miwaf {

/// Sparse real vector: strictly increasing indices, nonzero values.
class SparseVector {
public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Validates ordering and bounds; zero values are dropped.
  static SparseVector from_entries(std::size_t dim,
                                   const std::vector<std::pair<std::size_t, double>> &entries);
  static SparseVector from_dense(std::span<const double> values);

  /// Appends an entry past the current last index. Zero values are ignored.
  void push_back(std::size_t index, double value);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  const std::vector<std::uint32_t> &indices() const noexcept { return indices_; }
  const std::vector<double> &values() const noexcept { return values_; }

  double at(std::size_t index) const;
  double sum() const;
  double squared_norm() const;
  std::vector<double> to_dense() const;

  bool operator==(const SparseVector &) const = default;

private:
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

double dot(const SparseVector &a, const SparseVector &b);
/// ||a - b||^2. Throws DimMismatch when dims differ.
double squared_distance(const SparseVector &a, const SparseVector &b);

struct FeatureMatrix {
  std::vector<SparseVector> rows;
  Vocabulary vocab;
};

/// Entry j is the number of occurrences of vocab[j] in tokens.
SparseVector bow_vector(std::span<const std::string> tokens, const Vocabulary &vocab);
SparseVector bow_vector(std::span<const std::string> tokens, const std::vector<std::string> &vocab);

/// TF = count / |d|, IDF = ln(n_docs / df) (0 when df == 0), cell = TF * IDF.
/// df is taken over the documents passed in.
FeatureMatrix tfidf_matrix(const std::vector<std::vector<std::string>> &docs,
                           const Vocabulary &vocab);

enum class VectorScaling { None, Binary, L2 };

std::string_view to_string(VectorScaling scaling);
VectorScaling parse_vector_scaling(std::string_view text);

SparseVector apply_scaling(SparseVector v, VectorScaling scaling);

/// Dense CSV dump: header row of tokens, one row per document.
void write_matrix_csv(const FeatureMatrix &matrix, std::ostream &out);

} // namespace miwaf

#endif
