#include "synthqa/feature_filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <json.hpp>

#include "synthqa/error.hpp"
#include "synthqa/gate.hpp"
#include "synthqa/parallel.hpp"
#include "synthqa/quantile.hpp"

namespace synthqa {

std::string_view to_string(FpsMetric m) {
  return m == FpsMetric::euclidean ? "euclidean" : "mahalanobis";
}

std::optional<FpsMetric> parse_fps_metric(std::string_view s) {
  if (s == "euclidean") return FpsMetric::euclidean;
  if (s == "mahalanobis") return FpsMetric::mahalanobis;
  return std::nullopt;
}

LedoitWolfResult ledoit_wolf(const Eigen::MatrixXd& centered) {
  const auto n = static_cast<double>(centered.rows());
  const auto p = static_cast<double>(centered.cols());
  if (centered.rows() < 1 || centered.cols() < 1) throw ValidationError("ledoit_wolf: empty input");

  const Eigen::MatrixXd S = centered.transpose() * centered / n;
  const double trace = S.trace();
  const double mu = trace / p;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(S.rows(), S.cols());

  LedoitWolfResult out;
  if (!(mu > 0.0)) {
    // All samples coincide: nothing to estimate, fall back to the unit sphere.
    out.covariance = identity;
    out.shrinkage = 1.0;
    return out;
  }
  // b^2 = (1/n^2) sum_i ||x_i x_i^T - S||_F^2 = (sum_i ||x_i||^4 / n - ||S||_F^2) / n
  // d^2 = ||S - mu I||_F^2; both divided by p below, which cancels in the ratio.
  const Eigen::VectorXd sq_norms = centered.rowwise().squaredNorm();
  const double fourth = sq_norms.squaredNorm();
  const double s_frob = S.squaredNorm();
  double b2 = (fourth / n - s_frob) / (n * p);
  const double d2 = (s_frob - 2.0 * mu * trace + p * mu * mu) / p;
  b2 = std::min(b2, d2);
  double shrinkage = d2 > 0.0 ? b2 / d2 : 0.0;
  shrinkage = std::clamp(shrinkage, 0.0, 1.0);

  out.shrinkage = shrinkage;
  out.covariance = (1.0 - shrinkage) * S + shrinkage * mu * identity;
  return out;
}

StratumFilterModel::StratumFilterModel(Eigen::VectorXd mean, Eigen::MatrixXd basis,
                                       Eigen::MatrixXd covariance, double shrinkage)
    : mean_(std::move(mean)), basis_(std::move(basis)), shrinkage_(shrinkage) {
  if (basis_.rows() != mean_.size()) throw ValidationError("filter model: basis/mean mismatch");
  set_covariance(std::move(covariance));
}

void StratumFilterModel::set_covariance(Eigen::MatrixXd covariance) {
  if (covariance.rows() != basis_.cols() || covariance.cols() != basis_.cols())
    throw ValidationError("filter model: covariance must be k x k");
  covariance_ = std::move(covariance);
  factor_.compute(covariance_);
  if (factor_.info() != Eigen::Success)
    throw DataError("filter model: covariance is not positive definite");
}

void StratumFilterModel::calibrate(std::vector<double> real_d2, double q) {
  std::sort(real_d2.begin(), real_d2.end());
  real_d2_ = std::move(real_d2);
  quantile_ = q;
  threshold_ = quantile_linear_sorted(real_d2_, q);
}

double StratumFilterModel::threshold_at(double q) const {
  return quantile_linear_sorted(real_d2_, q);
}

Eigen::VectorXd StratumFilterModel::project(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size())
    throw ValidationError("feature dim " + std::to_string(x.size()) + " does not match model dim " +
                          std::to_string(mean_.size()));
  return basis_.transpose() * (x - mean_);
}

Eigen::VectorXd StratumFilterModel::project(std::span<const float> x) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
  return project(v);
}

Eigen::VectorXd StratumFilterModel::whiten(const Eigen::VectorXd& projected) const {
  return factor_.matrixL().solve(projected);
}

namespace {

Eigen::MatrixXd to_eigen(const FeatureMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.dim(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
  }
  return out;
}

// Top-k principal directions of the centred rows, as orthonormal columns.
Eigen::MatrixXd principal_basis(const Eigen::MatrixXd& centered, Eigen::Index k) {
  const Eigen::Index n = centered.rows();
  const Eigen::Index d = centered.cols();
  if (d <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
    // Eigenvalues ascend; take the last k columns, largest first.
    return eig.eigenvectors().rightCols(k).rowwise().reverse();
  }
  // Fewer samples than dimensions: decompose the n x n Gram matrix and map
  // its eigenvectors back; QR keeps the columns orthonormal even when the
  // trailing eigenvalues vanish.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered * centered.transpose());
  const Eigen::MatrixXd top = eig.eigenvectors().rightCols(k).rowwise().reverse();
  const Eigen::MatrixXd directions = centered.transpose() * top;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(directions);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  // Orient each column along its source direction.
  for (Eigen::Index c = 0; c < k; ++c)
    if (q.col(c).dot(directions.col(c)) < 0.0) q.col(c) = -q.col(c);
  return q;
}

}  // namespace

StratumFilterModel fit_filter(const Eigen::MatrixXd& real, const FilterConfig& config) {
  const Eigen::Index n = real.rows();
  const Eigen::Index d = real.cols();
  if (n < 2) throw DataError("fit_filter: need at least 2 real rows, got " + std::to_string(n));
  if (d < 1) throw ValidationError("fit_filter: zero-dimensional features");
  if (config.max_components == 0) throw ValidationError("fit_filter: max_components must be > 0");

  const Eigen::Index k =
      std::min({static_cast<Eigen::Index>(config.max_components), n - 1, d});
  const Eigen::VectorXd mean = real.colwise().mean().transpose();
  const Eigen::MatrixXd centered = real.rowwise() - mean.transpose();
  Eigen::MatrixXd basis = principal_basis(centered, k);
  const Eigen::MatrixXd projected = centered * basis;

  LedoitWolfResult lw = ledoit_wolf(projected);
  Eigen::LLT<Eigen::MatrixXd> check(lw.covariance);
  if (check.info() != Eigen::Success) {
    // Singular sample covariance with zero optimal shrinkage: shrink fully.
    const double mu = lw.covariance.trace() / static_cast<double>(k);
    lw.covariance = Eigen::MatrixXd::Identity(k, k) * (mu > 0.0 ? mu : 1.0);
    lw.shrinkage = 1.0;
  }

  StratumFilterModel model(mean, std::move(basis), std::move(lw.covariance), lw.shrinkage);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    d2[static_cast<std::size_t>(i)] = model.whiten(projected.row(i).transpose()).squaredNorm();
  model.calibrate(std::move(d2), config.quantile);
  return model;
}

StratumFilterModel fit_filter(const FeatureMatrix& real, const FilterConfig& config) {
  return fit_filter(to_eigen(real), config);
}

double mahalanobis_sq(const StratumFilterModel& model, const Eigen::VectorXd& x) {
  return model.whiten(model.project(x)).squaredNorm();
}

double mahalanobis_sq(const StratumFilterModel& model, std::span<const float> x) {
  return model.whiten(model.project(x)).squaredNorm();
}

std::vector<std::string> FilterReport::passing_ids() const {
  std::vector<std::string> out;
  for (const auto& c : candidates)
    if (c.pass) out.push_back(c.id);
  return out;
}

void FilterReport::set_selection(std::vector<std::string> order) {
  std::map<std::string_view, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i + 1);
  for (auto& c : candidates) {
    auto it = rank.find(c.id);
    c.selection_rank = it == rank.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  }
  selection_order = std::move(order);
}

std::string FilterReport::to_csv(bool with_header) const {
  std::string out = with_header ? "id,d2,pass,selection_rank\n" : "";
  char buf[64];
  for (const auto& c : candidates) {
    std::snprintf(buf, sizeof buf, "%.17g", c.d2);
    out += c.id + ',' + buf + ',' + (c.pass ? "1" : "0") + ',';
    if (c.selection_rank) out += std::to_string(*c.selection_rank);
    out += '\n';
  }
  return out;
}

FilterReport filter_candidates(const StratumFilterModel& model, const FeatureMatrix& candidates) {
  if (candidates.rows() > 0 && candidates.dim() != model.dim())
    throw ValidationError("filter_candidates: candidate dim does not match model");
  FilterReport report;
  report.threshold = model.threshold();
  report.candidates.resize(candidates.rows());
  for (std::size_t i = 0; i < candidates.rows(); ++i) {
    auto& c = report.candidates[i];
    c.id = candidates.ids()[i];
    c.d2 = mahalanobis_sq(model, candidates.row(i));
    c.pass = c.d2 <= model.threshold();
    if (!c.pass) ++report.rejected_count;
  }
  return report;
}

std::vector<std::string> farthest_point_select(const StratumFilterModel& model,
                                               const FeatureMatrix& passing, std::size_t m,
                                               FpsMetric metric) {
  const std::size_t n = passing.rows();
  if (m > n) {
    throw DataError("farthest_point_select: requested " + std::to_string(m) + " but only " +
                    std::to_string(n) + " candidates available (shortfall " +
                    std::to_string(m - n) + ")");
  }
  if (m == 0) return {};

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return passing.ids()[a] < passing.ids()[b]; });

  const auto k = static_cast<Eigen::Index>(model.components());
  Eigen::MatrixXd points(k, static_cast<Eigen::Index>(n));  // one column per candidate, id order
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd y = model.project(passing.row(order[i]));
    if (metric == FpsMetric::mahalanobis) y = model.whiten(y);
    points.col(static_cast<Eigen::Index>(i)) = y;
  }

  const Eigen::VectorXd centroid = points.rowwise().mean();
  std::size_t seed = 0;
  double seed_dist = (points.col(0) - centroid).squaredNorm();
  for (std::size_t i = 1; i < n; ++i) {
    const double dist = (points.col(static_cast<Eigen::Index>(i)) - centroid).squaredNorm();
    if (dist < seed_dist) {
      seed_dist = dist;
      seed = i;
    }
  }

  std::vector<double> nearest(n);
  std::vector<char> taken(n, 0);
  std::vector<std::string> selected;
  selected.reserve(m);
  auto take = [&](std::size_t idx) {
    taken[idx] = 1;
    selected.push_back(passing.ids()[order[idx]]);
    const auto chosen = points.col(static_cast<Eigen::Index>(idx));
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double dist = (points.col(static_cast<Eigen::Index>(i)) - chosen).squaredNorm();
      if (selected.size() == 1 || dist < nearest[i]) nearest[i] = dist;
    }
  };
  take(seed);
  while (selected.size() < m) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best == n || nearest[i] > nearest[best]) best = i;
    }
    take(best);
  }
  return selected;
}

std::vector<ThresholdAuditRow> threshold_audit(const StratumFilterModel& model,
                                               const FilterReport& report,
                                               std::span<const double> quantiles) {
  std::vector<ThresholdAuditRow> rows;
  for (double q : quantiles) {
    ThresholdAuditRow row{q, model.threshold_at(q), 0};
    for (const auto& c : report.candidates)
      if (c.d2 > row.threshold) ++row.rejected;
    rows.push_back(row);
  }
  return rows;
}

FilteredSets build_filtered_sets(const Manifest& real, const FeatureMatrix& real_features,
                                 const Manifest& pool, const FeatureMatrix& pool_features,
                                 const std::vector<double>& ratios, const FilterConfig& config,
                                 unsigned threads) {
  if (ratios.empty()) throw ValidationError("build_filtered_sets: no ratios given");
  for (double r : ratios)
    if (!(r > 0.0)) throw ValidationError("build_filtered_sets: ratios must be positive");
  const double max_ratio = *std::max_element(ratios.begin(), ratios.end());

  std::map<Stratum, std::vector<std::string>> real_ids, pool_ids;
  for (const auto& r : real.records()) real_ids[r.stratum()].push_back(r.id);
  for (const auto& r : pool.records()) pool_ids[r.stratum()].push_back(r.id);
  std::vector<Stratum> strata;
  for (const auto& [s, ids] : real_ids) strata.push_back(s);

  struct Work {
    StratumFilterOutcome outcome;
    std::optional<std::string> shortfall;
  };
  std::vector<Work> work(strata.size());
  parallel_for(strata.size(), threads, [&](std::size_t si) {
    const Stratum s = strata[si];
    Work& w = work[si];
    w.outcome.stratum = s;
    const auto& rid = real_ids[s];
    const auto pit = pool_ids.find(s);
    const std::vector<std::string> empty;
    const auto& pid = pit == pool_ids.end() ? empty : pit->second;
    w.outcome.real_count = rid.size();
    w.outcome.candidate_count = pid.size();

    const StratumFilterModel model = fit_filter(real_features.select(rid), config);
    w.outcome.components = model.components();
    w.outcome.shrinkage = model.shrinkage();
    const FeatureMatrix candidates = pool_features.select(pid);
    w.outcome.report = filter_candidates(model, candidates);
    w.outcome.audit = threshold_audit(model, w.outcome.report, kAuditQuantiles);

    const auto needed = static_cast<std::size_t>(
        round_half_even(max_ratio * static_cast<double>(rid.size())));
    const auto passing = w.outcome.report.passing_ids();
    if (passing.size() < needed) {
      w.shortfall = to_string(s) + " needs " + std::to_string(needed) + " but " +
                    std::to_string(passing.size()) + " passed (deficit " +
                    std::to_string(needed - passing.size()) + ")";
      return;
    }
    w.outcome.report.set_selection(
        farthest_point_select(model, candidates.select(passing), needed, config.fps_metric));
  });

  std::string shortfalls;
  for (const auto& w : work)
    if (w.shortfall) shortfalls += (shortfalls.empty() ? "" : "; ") + *w.shortfall;
  if (!shortfalls.empty()) throw DataError("filtered set shortfall: " + shortfalls);

  FilteredSets out;
  for (double ratio : ratios) {
    std::vector<ImageRecord> records;
    for (const auto& w : work) {
      const auto m = static_cast<std::size_t>(
          round_half_even(ratio * static_cast<double>(w.outcome.real_count)));
      for (std::size_t i = 0; i < m; ++i) {
        ImageRecord rec = *pool.find(w.outcome.report.selection_order[i]);
        rec.source = Source::synthetic;
        records.push_back(std::move(rec));
      }
    }
    out.sets.push_back({ratio, Manifest(std::move(records))});
  }
  for (auto& w : work) out.strata.push_back(std::move(w.outcome));
  return out;
}

std::string FilteredSets::threshold_audit_json() const {
  nlohmann::ordered_json j;
  std::map<double, std::size_t> totals;
  std::size_t candidates = 0;
  j["strata"] = nlohmann::ordered_json::array();
  for (const auto& s : strata) {
    nlohmann::ordered_json row;
    row["stratum"] = to_string(s.stratum);
    row["real"] = s.real_count;
    row["candidates"] = s.candidate_count;
    row["components"] = s.components;
    row["shrinkage"] = s.shrinkage;
    row["audit"] = nlohmann::ordered_json::array();
    for (const auto& a : s.audit) {
      row["audit"].push_back({{"quantile", a.quantile}, {"threshold", a.threshold}, {"rejected", a.rejected}});
      totals[a.quantile] += a.rejected;
    }
    candidates += s.candidate_count;
    j["strata"].push_back(row);
  }
  j["candidates"] = candidates;
  j["totals"] = nlohmann::ordered_json::array();
  for (const auto& [q, n] : totals)
    j["totals"].push_back({{"quantile", q},
                           {"rejected", n},
                           {"fraction", candidates ? static_cast<double>(n) / candidates : 0.0}});
  return j.dump(2) + "\n";
}

}  // namespace synthqa
