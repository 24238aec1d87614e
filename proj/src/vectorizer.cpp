#include "miwaf/vectorizer.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/escape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace miwaf {

SparseVector SparseVector::from_entries(std::size_t dim,
                                        const std::vector<std::pair<std::size_t, double>> &entries) {
  SparseVector v(dim);
  for (const auto &[index, value] : entries)
    v.push_back(index, value);
  return v;
}

SparseVector SparseVector::from_dense(std::span<const double> values) {
  SparseVector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    v.push_back(i, values[i]);
  return v;
}

void SparseVector::push_back(std::size_t index, double value) {
  if (index >= dim_)
    throw Error(ErrorKind::OutOfRange, "sparse index " + std::to_string(index) +
                                           " outside dimension " + std::to_string(dim_));
  if (!indices_.empty() && index <= indices_.back())
    throw Error(ErrorKind::InvalidArgument, "sparse indices must be strictly increasing");
  if (value == 0.0)
    return;
  indices_.push_back(static_cast<std::uint32_t>(index));
  values_.push_back(value);
}

double SparseVector::at(std::size_t index) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it == indices_.end() || *it != index)
    return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

double SparseVector::sum() const {
  double s = 0.0;
  for (double v : values_)
    s += v;
  return s;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_)
    s += v * v;
  return s;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k)
    out[indices_[k]] = values_[k];
  return out;
}

double dot(const SparseVector &a, const SparseVector &b) {
  if (a.dim() != b.dim())
    throw Error(ErrorKind::DimMismatch, "dot of vectors with dims " + std::to_string(a.dim()) +
                                            " and " + std::to_string(b.dim()));
  const auto &ai = a.indices();
  const auto &bi = b.indices();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ai.size() && j < bi.size()) {
    if (ai[i] == bi[j])
      s += a.values()[i++] * b.values()[j++];
    else if (ai[i] < bi[j])
      ++i;
    else
      ++j;
  }
  return s;
}

double squared_distance(const SparseVector &a, const SparseVector &b) {
  if (a.dim() != b.dim())
    throw Error(ErrorKind::DimMismatch, "distance between vectors with dims " +
                                            std::to_string(a.dim()) + " and " +
                                            std::to_string(b.dim()));
  // Merge walk rather than |a|^2 + |b|^2 - 2ab, which cancels badly for
  // nearby points.
  const auto &ai = a.indices();
  const auto &bi = b.indices();
  const auto &av = a.values();
  const auto &bv = b.values();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ai.size() || j < bi.size()) {
    double d;
    if (j == bi.size() || (i < ai.size() && ai[i] < bi[j])) {
      d = av[i++];
    } else if (i == ai.size() || bi[j] < ai[i]) {
      d = bv[j++];
    } else {
      d = av[i++] - bv[j++];
    }
    s += d * d;
  }
  return s;
}

SparseVector bow_vector(std::span<const std::string> tokens, const Vocabulary &vocab) {
  std::vector<std::size_t> hits;
  hits.reserve(tokens.size());
  for (const auto &t : tokens)
    if (auto idx = vocab.index_of(t))
      hits.push_back(*idx);
  std::sort(hits.begin(), hits.end());

  SparseVector v(vocab.size());
  for (std::size_t k = 0; k < hits.size();) {
    std::size_t run = k;
    while (run < hits.size() && hits[run] == hits[k])
      ++run;
    v.push_back(hits[k], static_cast<double>(run - k));
    k = run;
  }
  return v;
}

SparseVector bow_vector(std::span<const std::string> tokens,
                        const std::vector<std::string> &vocab) {
  if (vocab.empty())
    throw Error(ErrorKind::InvalidArgument, "bow_vector needs a non-empty vocabulary");
  return bow_vector(tokens, Vocabulary(vocab));
}

FeatureMatrix tfidf_matrix(const std::vector<std::vector<std::string>> &docs,
                           const Vocabulary &vocab) {
  if (docs.empty())
    throw Error(ErrorKind::EmptyCorpus, "tfidf_matrix needs at least one document");

  FeatureMatrix m;
  m.vocab = vocab;
  m.rows.reserve(docs.size());

  std::vector<std::size_t> df(vocab.size(), 0);
  std::vector<SparseVector> counts;
  counts.reserve(docs.size());
  for (const auto &doc : docs) {
    counts.push_back(bow_vector(doc, vocab));
    for (auto idx : counts.back().indices())
      ++df[idx];
  }

  const double n_docs = static_cast<double>(docs.size());
  std::vector<double> idf(vocab.size(), 0.0);
  for (std::size_t j = 0; j < vocab.size(); ++j)
    if (df[j] > 0)
      idf[j] = std::log(n_docs / static_cast<double>(df[j]));

  for (std::size_t i = 0; i < docs.size(); ++i) {
    SparseVector row(vocab.size());
    const double doc_len = static_cast<double>(docs[i].size());
    const auto &c = counts[i];
    for (std::size_t k = 0; k < c.nnz(); ++k) {
      const auto j = c.indices()[k];
      row.push_back(j, (c.values()[k] / doc_len) * idf[j]);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::string_view to_string(VectorScaling scaling) {
  switch (scaling) {
  case VectorScaling::None: return "none";
  case VectorScaling::Binary: return "binary";
  case VectorScaling::L2: return "l2";
  }
  return "none";
}

VectorScaling parse_vector_scaling(std::string_view text) {
  if (text == "none")
    return VectorScaling::None;
  if (text == "binary")
    return VectorScaling::Binary;
  if (text == "l2")
    return VectorScaling::L2;
  throw Error(ErrorKind::InvalidArgument, "unknown vector scaling '" + std::string(text) + "'");
}

SparseVector apply_scaling(SparseVector v, VectorScaling scaling) {
  if (scaling == VectorScaling::None || v.nnz() == 0)
    return v;
  SparseVector out(v.dim());
  const double norm = std::sqrt(v.squared_norm());
  for (std::size_t k = 0; k < v.nnz(); ++k) {
    const double x = v.values()[k];
    out.push_back(v.indices()[k], scaling == VectorScaling::Binary ? 1.0 : x / norm);
  }
  return out;
}

void write_matrix_csv(const FeatureMatrix &matrix, std::ostream &out) {
  auto quote = [](const std::string &s) {
    std::string q = "\"";
    for (char c : escape_bytes(s)) {
      if (c == '"')
        q += '"';
      q += c;
    }
    return q + "\"";
  };
  for (std::size_t j = 0; j < matrix.vocab.size(); ++j)
    out << (j ? "," : "") << quote(matrix.vocab[j]);
  out << '\n';
  char buf[32];
  for (const auto &row : matrix.rows) {
    const auto dense = row.to_dense();
    for (std::size_t j = 0; j < dense.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", dense[j]);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

} // namespace miwaf
