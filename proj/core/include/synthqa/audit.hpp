#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "synthqa/feature_matrix.hpp"
#include "synthqa/manifest.hpp"
#include "synthqa/phash.hpp"

namespace synthqa {

enum class Evidence { path, basename, sha256, pixel_exact, pixel_hash };

std::string_view to_string(Evidence e);

struct ExactMatch {
  std::string train_id;
  std::string test_id;
  Evidence evidence;

  bool operator==(const ExactMatch&) const = default;
};

struct PHashNeighbour {
  std::string train_id;
  std::string test_id;
  int distance = 0;

  bool operator==(const PHashNeighbour&) const = default;
};

struct FeatureNeighbour {
  std::string train_id;
  std::string test_id;
  double cosine_distance = 0.0;

  bool operator==(const FeatureNeighbour&) const = default;
};

struct RecordError {
  std::string id;
  std::string message;

  bool operator==(const RecordError&) const = default;
};

struct AuditReport {
  std::vector<ExactMatch> exact_duplicates;      // sorted by (train, test, evidence)
  std::vector<PHashNeighbour> phash_neighbours;  // sorted by (train, test)
  std::vector<FeatureNeighbour> feature_neighbours;
  std::vector<std::string> removed;  // train ids with pixel_exact evidence, ascending
  std::map<TumourClass, std::size_t> removed_by_class;
  std::map<Plane, std::size_t> removed_by_plane;
  std::vector<RecordError> errors;

  bool has_exact_overlap() const { return !exact_duplicates.empty(); }
  std::string to_json() const;
  std::string removal_list() const;  // one id per line
};

struct AuditOptions {
  int phash_max_distance = 6;
  double cosine_threshold = 0.01;  // flag when cosine distance < threshold
  PHashOptions phash;
  std::filesystem::path image_root;  // prefix for relative manifest paths
  unsigned threads = 0;
};

// Cosine distance 1 - x.y / (|x||y|) with double accumulation; 1 when either
// vector is zero.
double cosine_distance(std::span<const float> x, std::span<const float> y);

// Exhaustive train/test comparison. Unreadable images are reported in
// `errors` and skipped. Feature neighbours are computed only when both
// feature matrices are given; rows are matched to records by id.
AuditReport audit(const Manifest& train, const Manifest& test, const AuditOptions& options = {},
                  const FeatureMatrix* train_features = nullptr,
                  const FeatureMatrix* test_features = nullptr);

// Drops the report's removal ids from `train`. Throws DataError when an id
// is not present.
Manifest remove_duplicates(const Manifest& train, const AuditReport& report);

}  // namespace synthqa
