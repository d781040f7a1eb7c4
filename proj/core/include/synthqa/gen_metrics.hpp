#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "synthqa/feature_matrix.hpp"

namespace synthqa {

Eigen::MatrixXd to_matrix(const FeatureMatrix& m);

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased (n - 1)
};

GaussianFit fit_gaussian(const Eigen::MatrixXd& rows);

// |mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1 S2)^{1/2}). The trace of the product
// root is taken from the symmetric S1^{1/2} S2 S1^{1/2}; negative
// eigenvalues from round-off are clamped to zero.
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

// Throws ValidationError unless both sets have >= 2 rows and equal dims,
// DataError on non-finite values.
double fid(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen);
double fid(const FeatureMatrix& real, const FeatureMatrix& gen);

// Unbiased MMD^2 with kernel k(x, y) = (x.y / d + 1)^3 between row sets.
double mmd2_cubic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct KidConfig {
  std::size_t subsets = 100;
  std::size_t subset_max = 1000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

struct KidResult {
  double kid = 0.0;          // mean over subsets
  double std_error = 0.0;    // sample sd of subset values / sqrt(subsets)
  std::size_t real_subset = 0;
  std::size_t gen_subset = 0;
  std::vector<double> subset_values;
};

// Subset size per side is min(subset_max, n_side); each subset is drawn
// without replacement from its own seeded stream.
KidResult kid(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, const KidConfig& config = {});
KidResult kid(const FeatureMatrix& real, const FeatureMatrix& gen, const KidConfig& config = {});

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// k-NN manifold estimate. Radii are distances to the k-th nearest other
// point of the same set; membership is inclusive (distance <= radius).
PrecisionRecall precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen,
                                 std::size_t k = 3, unsigned threads = 0);
PrecisionRecall precision_recall(const FeatureMatrix& real, const FeatureMatrix& gen,
                                 std::size_t k = 3, unsigned threads = 0);

enum class FidTier { extraordinary, excellent, good, fair };

std::string_view to_string(FidTier t);
// [0, 30) extraordinary, [30, 50) excellent, [50, 75) good, otherwise fair.
FidTier fid_tier(double fid);

struct SnapshotMetrics {
  std::string generator;
  std::int64_t kimg = 0;
  double fid = 0.0;
  double kid = 0.0;
  double precision = 0.0;
  double recall = 0.0;

  double composite() const { return 0.5 * precision + 0.5 * recall; }
  FidTier tier() const { return fid_tier(fid); }
};

struct CheckpointSelection {
  std::size_t index = 0;               // into the input list
  FidTier tier = FidTier::fair;
  std::vector<std::size_t> eligible;   // best-tier snapshots, ranked
  bool recall_tiebreak = false;        // top-two gap was within the margin
};

inline constexpr double kCompositeTieMargin = 0.005;

// Best FID tier only; rank by composite score; if the top two differ by
// <= margin the higher recall wins; remaining ties go to the lower kimg.
CheckpointSelection select_checkpoint(std::span<const SnapshotMetrics> snapshots,
                                      double tie_margin = kCompositeTieMargin);

inline constexpr std::string_view kSnapshotHeader = "generator,kimg,fid,kid,precision,recall";
inline constexpr std::string_view kSnapshotReportHeader =
    "generator,kimg,fid,kid,precision,recall,tier,S,selected";

// Reads "generator,kimg,fid,kid,precision,recall" rows; extra trailing
// columns (tier, S, selected) are ignored.
std::vector<SnapshotMetrics> parse_snapshot_table(std::string_view text,
                                                  const std::string& source = "<snapshots>");
std::vector<SnapshotMetrics> load_snapshot_table(const std::filesystem::path& path);

// Selects per generator and renders the report table, generators in
// ascending order and snapshots by kimg.
std::string format_snapshot_report(const std::vector<SnapshotMetrics>& snapshots,
                                   double tie_margin = kCompositeTieMargin);

}  // namespace synthqa
