#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthqa/manifest.hpp"

namespace synthqa {

// Predictions of one condition over (seed, held-out image). Seeds and image
// ids are sorted ascending; prediction matrices are seed-major.
struct PredictionCube {
  std::string condition;
  std::vector<std::int64_t> seeds;
  std::vector<std::string> image_ids;
  std::vector<TumourClass> true_class;
  std::optional<std::vector<Plane>> true_plane;
  std::vector<TumourClass> pred_class;              // seeds.size() * image_ids.size()
  std::optional<std::vector<Plane>> pred_plane;     // same shape when present

  std::size_t num_seeds() const noexcept { return seeds.size(); }
  std::size_t num_images() const noexcept { return image_ids.size(); }

  TumourClass predicted_class(std::size_t seed_index, std::size_t image) const {
    return pred_class[seed_index * image_ids.size() + image];
  }
  Plane predicted_plane(std::size_t seed_index, std::size_t image) const {
    return (*pred_plane)[seed_index * image_ids.size() + image];
  }
  bool has_planes() const noexcept { return true_plane.has_value() && pred_plane.has_value(); }

  // Index of `seed` in seeds, or throws ValidationError.
  std::size_t seed_index(std::int64_t seed) const;

  // Throws DataError when shapes are inconsistent.
  void validate() const;
};

// Throws ValidationError unless both cubes share image ids and seeds.
void require_paired(const PredictionCube& a, const PredictionCube& b);

inline constexpr std::string_view kCubeHeader =
    "condition,seed,image_id,true_class,pred_class,true_plane,pred_plane";

// A cube file may hold several conditions; the result is keyed by condition.
std::map<std::string, PredictionCube> parse_prediction_cubes(std::string_view text,
                                                             const std::string& source = "<cube>");
std::map<std::string, PredictionCube> load_prediction_cubes(const std::filesystem::path& path);

std::string format_prediction_cube(const PredictionCube& cube, bool with_header = true);
void write_prediction_cubes(const std::vector<PredictionCube>& cubes,
                            const std::filesystem::path& path);

}  // namespace synthqa
