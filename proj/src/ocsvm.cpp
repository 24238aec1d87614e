#include "miwaf/ocsvm.hpp"

#include "miwaf/errors.hpp"

#include <json.hpp>

#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <memory>
#include <sstream>
#include <unordered_map>

namespace miwaf {

namespace {

constexpr double k_tau = 1e-12;         // floor on the pair curvature
constexpr double k_alpha_epsilon = 1e-12; // alphas at or below are dropped
constexpr int k_model_version = 1;

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorKind::InvalidArgument, "gamma must be a positive finite number");
}

/// LRU cache of Gram matrix rows over a fixed training set.
class KernelCache {
public:
  using Row = std::shared_ptr<const std::vector<double>>;

  KernelCache(std::span<const SparseVector> x, double gamma, std::size_t capacity)
      : x_(x), gamma_(gamma), capacity_(std::max<std::size_t>(capacity, 2)) {}

  Row row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    auto values = std::make_shared<std::vector<double>>(x_.size());
    for (std::size_t j = 0; j < x_.size(); ++j)
      (*values)[j] = i == j ? 1.0 : std::exp(-gamma_ * squared_distance(x_[i], x_[j]));
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    lru_.emplace_front(i, values);
    index_[i] = lru_.begin();
    return values;
  }

private:
  std::span<const SparseVector> x_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, Row>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, Row>>::iterator> index_;
};

} // namespace

double rbf_kernel(const SparseVector &a, const SparseVector &b, double gamma) {
  check_gamma(gamma);
  return std::exp(-gamma * squared_distance(a, b));
}

TrainResult train_detailed(std::span<const SparseVector> vectors, double nu, double gamma,
                           const TrainOptions &options) {
  const std::size_t m = vectors.size();
  if (m < 2)
    throw Error(ErrorKind::DegenerateInput,
                "one-class training needs at least 2 vectors, got " + std::to_string(m));
  if (!(nu > 0.0 && nu <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "nu must lie in (0, 1]");
  check_gamma(gamma);
  if (!(options.tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const std::size_t dim = vectors.front().dim();
  for (const auto &v : vectors)
    if (v.dim() != dim)
      throw Error(ErrorKind::DimMismatch, "training vectors have differing dimensions");

  const double upper = 1.0 / (nu * static_cast<double>(m));
  const std::size_t max_iter = options.max_iter ? options.max_iter : 100 * m;
  KernelCache cache(vectors, gamma, options.cache_rows ? options.cache_rows : m);

  std::vector<double> alpha(m, 1.0 / static_cast<double>(m));
  if (alpha[0] >= upper) // nu == 1: the start is already at the bound
    std::fill(alpha.begin(), alpha.end(), upper);

  // grad = K alpha
  std::vector<double> grad(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = cache.row(i);
    for (std::size_t t = 0; t < m; ++t)
      grad[t] += alpha[i] * (*row)[t];
  }

  double objective = 0.0;
  for (std::size_t t = 0; t < m; ++t)
    objective += 0.5 * alpha[t] * grad[t];

  SolverStats stats;
  double gap = 0.0;
  std::size_t iter = 0;
  for (;; ++iter) {
    // i may grow (alpha_i < upper) and has the smallest gradient; j may
    // shrink (alpha_j > 0) and has the largest.
    std::size_t i = m, j = m;
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
      if (alpha[t] < upper && grad[t] < g_min) {
        g_min = grad[t];
        i = t;
      }
      if (alpha[t] > 0.0 && grad[t] > g_max) {
        g_max = grad[t];
        j = t;
      }
    }
    gap = (i == m || j == m) ? 0.0 : g_max - g_min;
    if (gap < options.tol)
      break;
    if (iter >= max_iter)
      throw NonConvergence(max_iter, gap);

    const auto row_i = cache.row(i);
    const auto row_j = cache.row(j);
    const double curvature = std::max((*row_i)[i] + (*row_j)[j] - 2.0 * (*row_i)[j], k_tau);
    double step = (grad[j] - grad[i]) / curvature;

    const double room_i = upper - alpha[i];
    const double room_j = alpha[j];
    bool i_hits_bound = false, j_hits_bound = false;
    if (step >= room_i) {
      step = room_i;
      i_hits_bound = true;
    }
    if (step >= room_j) {
      step = room_j;
      j_hits_bound = true;
      i_hits_bound = step >= room_i;
    }

    const double delta_objective =
        step * (grad[i] - grad[j]) + 0.5 * step * step * ((*row_i)[i] + (*row_j)[j] - 2.0 * (*row_i)[j]);
    assert(delta_objective <= 1e-14 && "dual objective must not increase");
    objective += delta_objective;

    alpha[i] = i_hits_bound ? upper : alpha[i] + step;
    alpha[j] = j_hits_bound ? 0.0 : alpha[j] - step;
    for (std::size_t t = 0; t < m; ++t)
      grad[t] += step * ((*row_i)[t] - (*row_j)[t]);
  }

  // rho from the KKT conditions: free SVs sit on the hyperplane, alpha == 0
  // points lie on or above it, alpha == upper points on or below.
  double free_sum = 0.0;
  std::size_t n_free = 0, n_bound = 0;
  double lower_rho = -std::numeric_limits<double>::infinity();
  double upper_rho = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < m; ++t) {
    if (alpha[t] >= upper) {
      ++n_bound;
      lower_rho = std::max(lower_rho, grad[t]);
    } else if (alpha[t] <= 0.0) {
      upper_rho = std::min(upper_rho, grad[t]);
    } else {
      ++n_free;
      free_sum += grad[t];
    }
  }
  double rho;
  if (n_free > 0)
    rho = free_sum / static_cast<double>(n_free);
  else if (std::isfinite(lower_rho) && std::isfinite(upper_rho))
    rho = 0.5 * (lower_rho + upper_rho);
  else
    rho = std::isfinite(lower_rho) ? lower_rho : upper_rho;

  TrainResult result;
  auto &model = result.model;
  model.rho = rho;
  model.params.gamma = gamma;
  model.nu = nu;
  model.training_size = m;
  model.dim = dim;
  for (std::size_t t = 0; t < m; ++t) {
    if (alpha[t] > k_alpha_epsilon) {
      model.support_vectors.push_back(vectors[t]);
      model.alphas.push_back(alpha[t]);
    }
  }

  stats.iterations = iter;
  stats.objective = objective;
  stats.kkt_gap = gap;
  stats.free_support_vectors = n_free;
  stats.bound_support_vectors = n_bound;
  result.stats = stats;
  return result;
}

OcsvmModel train(std::span<const SparseVector> vectors, double nu, double gamma,
                 const TrainOptions &options) {
  return train_detailed(vectors, nu, gamma, options).model;
}

double decision(const OcsvmModel &model, const SparseVector &v) {
  if (v.dim() != model.dim)
    throw Error(ErrorKind::DimMismatch, "vector dim " + std::to_string(v.dim()) +
                                            " does not match model dim " +
                                            std::to_string(model.dim));
  double s = 0.0;
  for (std::size_t k = 0; k < model.support_vectors.size(); ++k)
    s += model.alphas[k] *
         std::exp(-model.params.gamma * squared_distance(model.support_vectors[k], v));
  return s - model.rho;
}

ClassLabel predict(const OcsvmModel &model, const SparseVector &v) {
  return decision(model, v) >= model.theta ? ClassLabel::Normal : ClassLabel::Attack;
}

// ---------------------------------------------------------------------------

RequestVectorizer::RequestVectorizer(std::vector<std::string> features,
                                     PreprocessConfig preprocess, VectorScaling scaling)
    : vocab_(std::move(features)), preprocess_(std::move(preprocess)), scaling_(scaling) {
  if (vocab_.empty())
    throw Error(ErrorKind::InvalidArgument, "no selected features");
}

RequestVectorizer::RequestVectorizer(const OcsvmModel &model)
    : RequestVectorizer(model.selected_features, model.preprocess, model.scaling) {}

SparseVector RequestVectorizer::operator()(const RawRequest &req) const {
  return apply_scaling(bow_vector(request_tokens(req, preprocess_), vocab_), scaling_);
}

// ---------------------------------------------------------------------------
// Model file

std::string model_to_json(const OcsvmModel &model) {
  if (model.selected_features.empty())
    throw Error(ErrorKind::InvalidArgument, "model has no selected features");
  if (model.selected_features.size() != model.dim)
    throw Error(ErrorKind::DimMismatch, "selected features do not match model dimension");
  if (!std::isfinite(model.theta) || !std::isfinite(model.rho))
    throw Error(ErrorKind::InvalidArgument, "theta and rho must be finite");

  nlohmann::ordered_json j;
  j["format"] = "miwaf-ocsvm";
  j["version"] = k_model_version;
  j["kernel"] = "rbf";
  j["gamma"] = model.params.gamma;
  j["nu"] = model.nu;
  j["rho"] = model.rho;
  j["theta"] = model.theta;
  j["training_size"] = model.training_size;
  j["dim"] = model.dim;
  j["vector_scaling"] = std::string(to_string(model.scaling));

  nlohmann::ordered_json pre;
  pre["header_filter_mode"] =
      model.preprocess.filter.mode() == HeaderFilter::Mode::Allowlist ? "allowlist" : "denylist";
  pre["header_names"] = model.preprocess.filter.names();
  pre["include_body"] = model.preprocess.include_body;
  j["preprocess"] = std::move(pre);

  j["selected_features"] = model.selected_features;
  j["alphas"] = model.alphas;
  auto svs = nlohmann::ordered_json::array();
  for (const auto &sv : model.support_vectors) {
    nlohmann::ordered_json e;
    e["indices"] = sv.indices();
    e["values"] = sv.values();
    svs.push_back(std::move(e));
  }
  j["support_vectors"] = std::move(svs);
  j["provenance"] = model.provenance;
  try {
    return j.dump(1);
  } catch (const nlohmann::json::type_error &e) {
    throw Error(ErrorKind::InvalidArgument, std::string("model is not serializable: ") + e.what());
  }
}

OcsvmModel model_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "miwaf-ocsvm")
      throw MalformedRecord(1, "not a miwaf model file");
    if (j.at("version").get<int>() != k_model_version)
      throw MalformedRecord(1, "unsupported model version");
    if (j.at("kernel").get<std::string>() != "rbf")
      throw MalformedRecord(1, "unsupported kernel");

    OcsvmModel model;
    model.params.gamma = j.at("gamma").get<double>();
    model.nu = j.at("nu").get<double>();
    model.rho = j.at("rho").get<double>();
    model.theta = j.at("theta").get<double>();
    model.training_size = j.at("training_size").get<std::size_t>();
    model.dim = j.at("dim").get<std::size_t>();
    model.scaling = parse_vector_scaling(j.at("vector_scaling").get<std::string>());

    const auto &pre = j.at("preprocess");
    const auto names = pre.at("header_names").get<std::set<std::string>>();
    model.preprocess.filter = pre.at("header_filter_mode").get<std::string>() == "allowlist"
                                  ? HeaderFilter::allowlist(names)
                                  : HeaderFilter::denylist(names);
    model.preprocess.include_body = pre.at("include_body").get<bool>();

    model.selected_features = j.at("selected_features").get<std::vector<std::string>>();
    model.alphas = j.at("alphas").get<std::vector<double>>();
    for (const auto &e : j.at("support_vectors")) {
      const auto idx = e.at("indices").get<std::vector<std::size_t>>();
      const auto val = e.at("values").get<std::vector<double>>();
      if (idx.size() != val.size())
        throw MalformedRecord(1, "support vector index/value length mismatch");
      SparseVector sv(model.dim);
      for (std::size_t k = 0; k < idx.size(); ++k)
        sv.push_back(idx[k], val[k]);
      model.support_vectors.push_back(std::move(sv));
    }
    if (auto it = j.find("provenance"); it != j.end())
      model.provenance = it->get<std::map<std::string, std::string>>();
    if (model.alphas.size() != model.support_vectors.size())
      throw MalformedRecord(1, "alphas and support vectors differ in length");
    if (model.selected_features.size() != model.dim)
      throw MalformedRecord(1, "selected_features does not match dim");
    check_gamma(model.params.gamma);
    return model;
  } catch (const nlohmann::json::exception &e) {
    throw MalformedRecord(1, std::string("invalid model JSON: ") + e.what());
  }
}

void save_model(const OcsvmModel &model, const std::filesystem::path &path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << text << '\n';
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

OcsvmModel load_model(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

} // namespace miwaf
