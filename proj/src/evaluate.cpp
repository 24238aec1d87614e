#include "miwaf/evaluate.hpp"

#include "miwaf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>
#include <thread>

namespace miwaf {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

double ConfusionCounts::tpr() const noexcept { return ratio(tp, tp + fn); }
double ConfusionCounts::fpr() const noexcept { return ratio(fp, fp + tn); }
double ConfusionCounts::accuracy() const noexcept { return ratio(tp + tn, total()); }

ConfusionCounts confusion(std::span<const ScoredItem> scores, double theta) {
  ConfusionCounts c;
  for (const auto &s : scores) {
    if (s.label == ClassLabel::Unlabeled)
      continue;
    const bool flagged = s.score < theta;
    if (s.label == ClassLabel::Attack)
      (flagged ? c.tp : c.fn)++;
    else
      (flagged ? c.fp : c.tn)++;
  }
  if (c.total() == 0)
    throw Error(ErrorKind::NoLabeledData, "no Normal or Attack items to evaluate");
  return c;
}

RocCurve roc(std::span<const ScoredItem> scores) {
  std::vector<ScoredItem> items;
  std::size_t n_attack = 0, n_normal = 0;
  for (const auto &s : scores) {
    if (s.label == ClassLabel::Unlabeled)
      continue;
    items.push_back(s);
    (s.label == ClassLabel::Attack ? n_attack : n_normal)++;
  }
  if (n_attack == 0 || n_normal == 0)
    throw Error(ErrorKind::SingleClass, "ROC needs both Normal and Attack items");
  std::sort(items.begin(), items.end(),
            [](const ScoredItem &a, const ScoredItem &b) { return a.score < b.score; });

  RocCurve curve;
  curve.points.push_back({items.front().score - 1.0, 0.0, 0.0});

  // Sweep theta upward; each tie group of scores becomes flagged at once.
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < items.size();) {
    const double score = items[k].score;
    while (k < items.size() && items[k].score == score) {
      (items[k].label == ClassLabel::Attack ? tp : fp)++;
      ++k;
    }
    const double theta = k < items.size() ? score + 0.5 * (items[k].score - score) : score + 1.0;
    curve.points.push_back({theta, ratio(tp, n_attack), ratio(fp, n_normal)});
  }

  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto &a = curve.points[k - 1];
    const auto &b = curve.points[k];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  curve.auc = area;
  return curve;
}

ThetaPolicy parse_theta_policy(std::string_view text) {
  if (text == "max_youden")
    return ThetaPolicy::max_youden();
  constexpr std::string_view prefix = "fpr_cap:";
  if (text.starts_with(prefix)) {
    try {
      return ThetaPolicy::capped(std::stod(std::string(text.substr(prefix.size()))));
    } catch (const std::exception &) {
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown theta policy '" + std::string(text) + "'");
}

std::string to_string(const ThetaPolicy &policy) {
  if (policy.kind == ThetaPolicy::Kind::MaxYouden)
    return "max_youden";
  return "fpr_cap:" + format_number(policy.fpr_cap);
}

double pick_theta(const RocCurve &curve, const ThetaPolicy &policy) {
  if (curve.points.empty())
    throw Error(ErrorKind::InvalidArgument, "empty ROC curve");

  const RocPoint *best = nullptr;
  double best_value = 0.0;
  for (const auto &p : curve.points) {
    double value;
    if (policy.kind == ThetaPolicy::Kind::MaxYouden) {
      value = p.tpr - p.fpr;
    } else {
      if (p.fpr > policy.fpr_cap)
        continue;
      value = p.tpr;
    }
    const bool better = !best || value > best_value ||
                        (value == best_value &&
                         (p.fpr < best->fpr || (p.fpr == best->fpr && p.theta < best->theta)));
    if (better) {
      best = &p;
      best_value = value;
    }
  }
  if (!best)
    throw Error(ErrorKind::Infeasible,
                "no ROC point has fpr <= " + format_number(policy.fpr_cap));
  return best->theta;
}

double f_hat(const OcsvmModel &model, std::span<const SparseVector> validation_normals,
             std::span<const SparseVector> unlabeled_mix) {
  if (validation_normals.empty() || unlabeled_mix.empty())
    throw Error(ErrorKind::EmptySet, "f_hat needs validation normals and an unlabeled mix");
  auto accepted = [&model](std::span<const SparseVector> vs) {
    std::size_t n = 0;
    for (const auto &v : vs)
      if (decision(model, v) >= model.theta)
        ++n;
    return ratio(n, vs.size());
  };
  const double r = accepted(validation_normals);
  const double q = accepted(unlabeled_mix);
  return q == 0.0 ? 0.0 : r * r / q;
}

GridSearchResult grid_search(std::span<const SparseVector> train_normals,
                             std::span<const SparseVector> validation_normals,
                             std::span<const SparseVector> unlabeled_mix,
                             std::span<const double> nu_grid, std::span<const double> gamma_grid,
                             const TrainOptions &options, unsigned threads) {
  if (nu_grid.empty() || gamma_grid.empty())
    throw Error(ErrorKind::InvalidArgument, "grid search needs non-empty nu and gamma grids");
  if (train_normals.empty() || validation_normals.empty() || unlabeled_mix.empty())
    throw Error(ErrorKind::EmptySet, "grid search needs non-empty data sets");

  std::vector<double> nus(nu_grid.begin(), nu_grid.end());
  std::vector<double> gammas(gamma_grid.begin(), gamma_grid.end());
  std::sort(nus.begin(), nus.end());
  std::sort(gammas.begin(), gammas.end());

  GridSearchResult result;
  for (double nu : nus)
    for (double gamma : gammas)
      result.table.push_back({nu, gamma, 0.0});

  auto run_cell = [&](GridCell &cell) {
    try {
      OcsvmModel model = train(train_normals, cell.nu, cell.gamma, options);
      model.theta = 0.0;
      cell.f_hat = f_hat(model, validation_normals, unlabeled_mix);
    } catch (const Error &) {
      cell.f_hat = -1.0;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, result.table.size()));
  if (workers == 1) {
    for (auto &cell : result.table)
      run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < result.table.size(); k = next++)
          run_cell(result.table[k]);
      });
    for (auto &t : pool)
      t.join();
  }

  // Table order is (nu, gamma) ascending, so the first maximum wins ties.
  const GridCell *best = &result.table.front();
  for (const auto &cell : result.table)
    if (cell.f_hat > best->f_hat)
      best = &cell;
  result.best_nu = best->nu;
  result.best_gamma = best->gamma;
  return result;
}

Metrics compute_metrics(std::span<const ScoredItem> scores, double theta, std::size_t n_features) {
  Metrics m;
  m.counts = confusion(scores, theta);
  m.acc = m.counts.accuracy();
  m.tpr = m.counts.tpr();
  m.fpr = m.counts.fpr();
  m.auc = roc(scores).auc;
  m.theta = theta;
  m.n_features = n_features;
  return m;
}

void write_roc_csv(const RocCurve &curve, std::ostream &out) {
  out << "theta,tpr,fpr\n";
  for (const auto &p : curve.points)
    out << format_number(p.theta) << ',' << format_number(p.tpr) << ',' << format_number(p.fpr)
        << '\n';
  out << "# auc=" << format_number(curve.auc) << '\n';
}

std::string metrics_to_json(const Metrics &metrics,
                            const std::map<std::string, std::string> &provenance) {
  nlohmann::ordered_json j;
  j["n_features"] = metrics.n_features;
  j["acc"] = metrics.acc;
  j["tpr"] = metrics.tpr;
  j["fpr"] = metrics.fpr;
  j["auc"] = metrics.auc;
  j["theta"] = metrics.theta;
  j["tp"] = metrics.counts.tp;
  j["fp"] = metrics.counts.fp;
  j["tn"] = metrics.counts.tn;
  j["fn"] = metrics.counts.fn;
  if (!provenance.empty())
    j["provenance"] = provenance;
  return j.dump(2);
}

void write_grid_csv(const GridSearchResult &result, std::ostream &out) {
  out << "nu,gamma,f_hat\n";
  for (const auto &c : result.table)
    out << format_number(c.nu) << ',' << format_number(c.gamma) << ',' << format_number(c.f_hat)
        << '\n';
  out << "# best_nu=" << format_number(result.best_nu)
      << " best_gamma=" << format_number(result.best_gamma) << " f_hat=" << k_f_hat_formula
      << '\n';
}

} // namespace miwaf
