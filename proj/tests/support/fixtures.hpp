#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "synthqa/feature_matrix.hpp"
#include "synthqa/image.hpp"
#include "synthqa/manifest.hpp"
#include "synthqa/prediction_cube.hpp"

namespace synthqa::fx {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Axial-like slice: textured elliptical head on a near-black background,
// with a bright lesion and a thin skull rim. Deterministic in `seed`.
GrayImage synthetic_slice(std::uint64_t seed, std::size_t width = 160, std::size_t height = 160);

struct Corpus {
  std::filesystem::path manifest_path;
  Manifest manifest;
};

// Writes `n` slices as PNGs under dir/<prefix>/ and a manifest with paths
// relative to `dir`. Classes and planes cycle so every stratum is present.
Corpus write_corpus(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed,
                    Split split = Split::train, const std::string& prefix = "img",
                    Source source = Source::real);

// n x d standard normal rows, then scaled and shifted.
Eigen::MatrixXd gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed, double shift = 0.0,
                              double scale = 1.0);

FeatureMatrix to_features(const Eigen::MatrixXd& rows, const std::string& id_prefix,
                          const std::string& feature = "test");

// Random cube with per-prediction accuracy `accuracy`; wrong guesses are
// uniform over the other classes (planes likewise).
PredictionCube random_cube(const std::string& condition, std::size_t seeds, std::size_t images,
                           double accuracy, std::uint64_t seed, bool planes = true);

std::string id_for(const std::string& prefix, std::size_t i);

// Uniform 8-bit noise.
GrayImage noise_image(std::uint64_t seed, std::size_t w = 64, std::size_t h = 64);

// Train/test layout under `root` with planted leaks:
//   c0 byte copy of t0, c1 t1 re-encoded, c2 shares t2's basename only,
//   c3 t3 with 20 pixels nudged, c4 t4's pixels under other dimensions,
//   t_shared lists the same path as test q5.
// t1 is pituitary and t0 coronal; everything else meningioma axial.
struct AuditPlant {
  Manifest train;
  Manifest test;
};
AuditPlant write_audit_plant(const std::filesystem::path& root);

}  // namespace synthqa::fx
