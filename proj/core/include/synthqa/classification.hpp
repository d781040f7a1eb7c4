#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "synthqa/manifest.hpp"
#include "synthqa/prediction_cube.hpp"

namespace synthqa {

enum class Metric {
  tumour_accuracy,
  macro_f1,
  weighted_f1,
  f1_glioma,
  f1_meningioma,
  f1_no_tumour,
  f1_pituitary,
  plane_accuracy,
};

inline constexpr std::array<Metric, 8> kAllMetrics = {
    Metric::tumour_accuracy, Metric::macro_f1,      Metric::weighted_f1,  Metric::f1_glioma,
    Metric::f1_meningioma,   Metric::f1_no_tumour,  Metric::f1_pituitary, Metric::plane_accuracy};

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view s);

struct MetricVector {
  double tumour_accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::array<double, kNumClasses> per_class_f1{};
  std::optional<double> plane_accuracy;  // absent when the cube has no planes

  // Throws ValidationError for plane_accuracy on a cube without planes.
  double get(Metric m) const;
};

// Weighted tallies for one (condition, seed). Weights are per-image
// multiplicities, so bootstrap resamples reuse the same arithmetic.
struct ConfusionCounts {
  std::array<std::array<double, kNumClasses>, kNumClasses> cells{};  // [true][pred]
  double plane_correct = 0.0;
  double total = 0.0;
  bool has_planes = false;

  void add(TumourClass truth, TumourClass pred, double weight = 1.0);
};

// Macro F1 averages over classes present in either truth or predictions;
// F1 with no true and no predicted examples is 0.
MetricVector metrics_from_counts(const ConfusionCounts& counts);

// Empty `weights` means every image counts once.
ConfusionCounts tally(const PredictionCube& cube, std::size_t seed_index,
                      std::span<const double> weights = {});

MetricVector metrics(const PredictionCube& cube, std::int64_t seed);

// Metric averaged over the cube's seeds.
double seed_mean(const PredictionCube& cube, Metric metric, std::span<const double> weights = {});

struct SeedStability {
  std::vector<double> per_seed;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator
};

// Throws ValidationError with fewer than two seeds.
SeedStability seed_stability(const PredictionCube& cube, Metric metric = Metric::tumour_accuracy);

struct ConfusionSummary {
  // Row-normalised percentages: mean over seeds and 1.96 sd / sqrt(seeds).
  std::array<std::array<double, kNumClasses>, kNumClasses> mean{};
  std::array<std::array<double, kNumClasses>, kNumClasses> half_ci{};
  std::array<bool, kNumClasses> empty_row{};
  std::size_t seeds = 0;
};

ConfusionSummary confusion(const PredictionCube& cube);

}  // namespace synthqa
