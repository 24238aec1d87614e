#ifndef MIWAF_OCSVM_HPP
#define MIWAF_OCSVM_HPP

#include "miwaf/preprocess.hpp"
#include "miwaf/request_model.hpp"
#include "miwaf/tokenizer.hpp"
#include "miwaf/vectorizer.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace miwaf {

struct KernelParams {
  double gamma = 0.5;

  bool operator==(const KernelParams &) const = default;
};

/// exp(-gamma * ||a - b||^2). Throws DimMismatch, or InvalidArgument for
/// gamma <= 0.
double rbf_kernel(const SparseVector &a, const SparseVector &b, double gamma);

struct TrainOptions {
  /// Stop once the maximal KKT violation drops below tol.
  double tol = 1e-4;
  /// 0 selects 100 * m.
  std::size_t max_iter = 0;
  /// Kernel rows kept in the LRU cache; 0 caches every row.
  std::size_t cache_rows = 0;
};

struct SolverStats {
  std::size_t iterations = 0;
  double objective = 0.0;
  double kkt_gap = 0.0;
  std::size_t free_support_vectors = 0;
  std::size_t bound_support_vectors = 0;
};

/// Trained nu-one-class SVM with RBF kernel plus the preprocessing and
/// operating threshold it is deployed with.
///
/// decision(x) = sum_i alphas[i] * K(support_vectors[i], x) - rho.
/// Dual variables are scaled so that sum(alphas) == 1 and each alpha lies
/// in (0, 1 / (nu * training_size)].
struct OcsvmModel {
  std::vector<SparseVector> support_vectors;
  std::vector<double> alphas;
  double rho = 0.0;
  KernelParams params;
  double nu = 0.05;
  std::size_t training_size = 0;
  std::size_t dim = 0;

  std::vector<std::string> selected_features;
  double theta = 0.0;
  PreprocessConfig preprocess;
  VectorScaling scaling = VectorScaling::None;
  /// Input digests and other provenance strings, e.g. "ranking_sha256".
  std::map<std::string, std::string> provenance;

  bool operator==(const OcsvmModel &) const = default;
};

struct TrainResult {
  OcsvmModel model;
  SolverStats stats;
};

/// Solves the nu-OCSVM dual
///
///   min 1/2 a^T K a   s.t.  0 <= a_i <= 1/(nu m),  sum a_i = 1
///
/// by SMO over maximal-violating pairs, starting from a_i = 1/m.
/// rho is the mean of K a over free support vectors, or the midpoint of the
/// feasible interval when every support vector sits at a bound.
///
/// Throws DegenerateInput (m < 2), DimMismatch, InvalidArgument (nu outside
/// (0, 1], gamma <= 0) and NonConvergence.
TrainResult train_detailed(std::span<const SparseVector> vectors, double nu, double gamma,
                           const TrainOptions &options = {});
OcsvmModel train(std::span<const SparseVector> vectors, double nu, double gamma,
                 const TrainOptions &options = {});

double decision(const OcsvmModel &model, const SparseVector &v);

/// Normal when decision >= theta, Attack otherwise.
ClassLabel predict(const OcsvmModel &model, const SparseVector &v);

/// Request -> canonical text -> tokens -> BoW over the selected features
/// -> scaling. Built once per model; safe for concurrent use.
class RequestVectorizer {
public:
  RequestVectorizer(std::vector<std::string> features, PreprocessConfig preprocess,
                    VectorScaling scaling);
  explicit RequestVectorizer(const OcsvmModel &model);

  SparseVector operator()(const RawRequest &req) const;
  std::size_t dim() const noexcept { return vocab_.size(); }

private:
  Vocabulary vocab_;
  PreprocessConfig preprocess_;
  VectorScaling scaling_;
};

std::string model_to_json(const OcsvmModel &model);
OcsvmModel model_from_json(std::string_view text);
void save_model(const OcsvmModel &model, const std::filesystem::path &path);
OcsvmModel load_model(const std::filesystem::path &path);

} // namespace miwaf

#endif
