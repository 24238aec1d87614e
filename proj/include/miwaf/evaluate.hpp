#ifndef MIWAF_EVALUATE_HPP
#define MIWAF_EVALUATE_HPP

#include "miwaf/ocsvm.hpp"
#include "miwaf/request_model.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace miwaf {

/// A decision value paired with the true class. Attack is the positive
/// class and a request is flagged as Attack when its score is below theta.
struct ScoredItem {
  double score = 0.0;
  ClassLabel label = ClassLabel::Unlabeled;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double tpr() const noexcept;
  double fpr() const noexcept;
  double accuracy() const noexcept;

  bool operator==(const ConfusionCounts &) const = default;
};

/// Unlabeled items are ignored. Throws NoLabeledData if nothing is left.
ConfusionCounts confusion(std::span<const ScoredItem> scores, double theta);

struct RocPoint {
  double theta = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;

  bool operator==(const RocPoint &) const = default;
};

/// Points sorted by increasing theta, starting at (0, 0) below every score
/// and ending at (1, 1) above every score.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// One threshold per gap between consecutive distinct scores (midpoints),
/// plus sentinels at min - 1 and max + 1. AUC by the trapezoid rule over
/// (fpr, tpr). Throws SingleClass unless both classes are present.
RocCurve roc(std::span<const ScoredItem> scores);

struct ThetaPolicy {
  enum class Kind { MaxYouden, FprCap };

  Kind kind = Kind::MaxYouden;
  double fpr_cap = 0.0;

  static ThetaPolicy max_youden() { return {}; }
  static ThetaPolicy capped(double max_fpr) { return {Kind::FprCap, max_fpr}; }

  bool operator==(const ThetaPolicy &) const = default;
};

/// "max_youden" or "fpr_cap:<x>".
ThetaPolicy parse_theta_policy(std::string_view text);
std::string to_string(const ThetaPolicy &policy);

/// max_youden maximizes tpr - fpr; fpr_cap maximizes tpr subject to
/// fpr <= cap. Ties go to the smaller fpr, then the smaller theta.
/// Throws Infeasible when no point satisfies the cap.
double pick_theta(const RocCurve &curve, const ThetaPolicy &policy);

/// Positive-unlabeled selection score r^2 / q where r is the fraction of
/// validation normals accepted (decision >= theta) and q the accepted
/// fraction of the unlabeled mix. q == 0 gives 0.
double f_hat(const OcsvmModel &model, std::span<const SparseVector> validation_normals,
             std::span<const SparseVector> unlabeled_mix);

inline constexpr std::string_view k_f_hat_formula = "r^2/q";

struct GridCell {
  double nu = 0.0;
  double gamma = 0.0;
  /// -1 marks a cell whose training failed.
  double f_hat = 0.0;
};

struct GridSearchResult {
  std::vector<GridCell> table; // ordered by (nu, gamma)
  double best_nu = 0.0;
  double best_gamma = 0.0;
};

/// Trains one model per (nu, gamma) on train_normals, scores it with f_hat
/// at theta = 0 and returns the table plus the argmax (ties: smaller nu,
/// then smaller gamma). Cells run on up to `threads` workers.
GridSearchResult grid_search(std::span<const SparseVector> train_normals,
                             std::span<const SparseVector> validation_normals,
                             std::span<const SparseVector> unlabeled_mix,
                             std::span<const double> nu_grid, std::span<const double> gamma_grid,
                             const TrainOptions &options = {}, unsigned threads = 1);

/// Detection summary at one operating point.
struct Metrics {
  double acc = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double auc = 0.0;
  double theta = 0.0;
  std::size_t n_features = 0;
  ConfusionCounts counts;
};

Metrics compute_metrics(std::span<const ScoredItem> scores, double theta, std::size_t n_features);

/// "theta,tpr,fpr" rows followed by "# auc=<value>".
void write_roc_csv(const RocCurve &curve, std::ostream &out);
std::string metrics_to_json(const Metrics &metrics,
                            const std::map<std::string, std::string> &provenance = {});
void write_grid_csv(const GridSearchResult &result, std::ostream &out);

} // namespace miwaf

#endif
