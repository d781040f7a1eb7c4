#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "synthqa/feature_matrix.hpp"
#include "synthqa/manifest.hpp"

namespace synthqa {

enum class FpsMetric { euclidean, mahalanobis };

std::string_view to_string(FpsMetric m);
std::optional<FpsMetric> parse_fps_metric(std::string_view s);

struct FilterConfig {
  std::size_t max_components = 200;
  double quantile = 0.975;
  FpsMetric fps_metric = FpsMetric::euclidean;
};

struct LedoitWolfResult {
  Eigen::MatrixXd covariance;
  double shrinkage = 0.0;
};

// Ledoit-Wolf shrinkage towards (tr S / p) I with the closed-form optimal
// intensity. `centered` holds one centred sample per row; S uses 1/n.
LedoitWolfResult ledoit_wolf(const Eigen::MatrixXd& centered);

// Feature-space model of one stratum's real images: mean, unwhitened PCA
// basis, Ledoit-Wolf covariance of the projections, and the empirical
// quantile of the real images' own squared Mahalanobis distances.
class StratumFilterModel {
 public:
  StratumFilterModel(Eigen::VectorXd mean, Eigen::MatrixXd basis, Eigen::MatrixXd covariance,
                     double shrinkage);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }           // d x k
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; } // k x k
  double shrinkage() const noexcept { return shrinkage_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  std::size_t components() const noexcept { return static_cast<std::size_t>(basis_.cols()); }

  double threshold() const noexcept { return threshold_; }
  double quantile() const noexcept { return quantile_; }
  // Squared distances of the real images the model was fitted on, ascending.
  const std::vector<double>& real_distances() const noexcept { return real_d2_; }
  double threshold_at(double q) const;

  // Replaces the covariance (tests and what-if analysis); keeps the threshold.
  void set_covariance(Eigen::MatrixXd covariance);
  void calibrate(std::vector<double> real_d2, double q);

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;  // basis^T (x - mean)
  Eigen::VectorXd project(std::span<const float> x) const;
  // L^{-1} y for the covariance factor L L^T; Euclidean norms of whitened
  // vectors are Mahalanobis distances.
  Eigen::VectorXd whiten(const Eigen::VectorXd& projected) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double shrinkage_ = 0.0;
  double threshold_ = 0.0;
  double quantile_ = 0.0;
  std::vector<double> real_d2_;
};

// Requires at least two real rows. k = min(max_components, n - 1, d).
StratumFilterModel fit_filter(const Eigen::MatrixXd& real, const FilterConfig& config = {});
StratumFilterModel fit_filter(const FeatureMatrix& real, const FilterConfig& config = {});

double mahalanobis_sq(const StratumFilterModel& model, const Eigen::VectorXd& x);
double mahalanobis_sq(const StratumFilterModel& model, std::span<const float> x);

struct CandidateScore {
  std::string id;
  double d2 = 0.0;
  bool pass = false;
  std::optional<std::size_t> selection_rank;  // 1-based
};

struct FilterReport {
  std::vector<CandidateScore> candidates;
  double threshold = 0.0;
  std::size_t rejected_count = 0;
  std::vector<std::string> selection_order;

  std::vector<std::string> passing_ids() const;
  // Records selection ranks on the matching candidates.
  void set_selection(std::vector<std::string> order);
  std::string to_csv(bool with_header = true) const;  // id,d2,pass,selection_rank
};

// pass <=> d2 <= threshold.
FilterReport filter_candidates(const StratumFilterModel& model, const FeatureMatrix& candidates);

// Greedy k-centre order over `passing`, seeded with the point nearest the
// centroid, ties to the lowest id. Returns the first m ids. Throws DataError
// if m exceeds the number of rows.
std::vector<std::string> farthest_point_select(const StratumFilterModel& model,
                                               const FeatureMatrix& passing, std::size_t m,
                                               FpsMetric metric = FpsMetric::euclidean);

struct ThresholdAuditRow {
  double quantile = 0.0;
  double threshold = 0.0;
  std::size_t rejected = 0;
};

std::vector<ThresholdAuditRow> threshold_audit(const StratumFilterModel& model,
                                               const FilterReport& report,
                                               std::span<const double> quantiles);

struct StratumFilterOutcome {
  Stratum stratum;
  std::size_t real_count = 0;
  std::size_t candidate_count = 0;
  std::size_t components = 0;
  double shrinkage = 0.0;
  FilterReport report;
  std::vector<ThresholdAuditRow> audit;
};

struct FilteredSet {
  double ratio = 0.0;
  Manifest manifest;
};

struct FilteredSets {
  std::vector<FilteredSet> sets;               // in the order ratios were given
  std::vector<StratumFilterOutcome> strata;    // in stratum order

  std::string threshold_audit_json() const;
};

inline constexpr double kAuditQuantiles[] = {0.95, 0.975, 0.99};

// Per stratum: fit on the real rows, gate the pool rows, then take the first
// round_half_even(ratio * n_real) ids of one greedy order, so sets are nested
// across ratios. Throws DataError naming every stratum that falls short.
FilteredSets build_filtered_sets(const Manifest& real, const FeatureMatrix& real_features,
                                 const Manifest& pool, const FeatureMatrix& pool_features,
                                 const std::vector<double>& ratios, const FilterConfig& config = {},
                                 unsigned threads = 0);

}  // namespace synthqa
