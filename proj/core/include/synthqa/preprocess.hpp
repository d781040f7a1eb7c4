#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthqa/image.hpp"
#include "synthqa/resample.hpp"

namespace synthqa {

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayImage& img);

// Threshold t maximising between-class variance of {v <= t} vs {v > t};
// the lowest maximiser wins. Throws ValidationError on an all-zero histogram.
int otsu_threshold(std::span<const std::uint64_t, 256> hist);

enum class MaskTier { otsu_050, otsu_075, otsu_100, otsu_125, otsu_150, closest_to_50, full_image };

inline constexpr std::size_t kMaskAttempts = 5;

std::string_view to_string(MaskTier tier);
bool is_otsu_tier(MaskTier tier);

struct MaskConfig {
  std::array<double, kMaskAttempts> scales = {0.50, 0.75, 1.00, 1.25, 1.50};
  // Closing iterations (3x3 square) applied to each thresholded attempt.
  std::array<int, kMaskAttempts> closing_iterations = {6, 6, 6, 6, 6};
  int final_closing_iterations = 3;
  std::size_t min_fragment_pixels = 500;
  double min_area_fraction = 0.15;
  double max_area_fraction = 0.85;
};

struct MaskResult {
  BinaryMask mask;
  MaskTier accepted_tier = MaskTier::full_image;
  double area_fraction = 1.0;
  std::array<double, kMaskAttempts> attempt_fractions{};
};

// Morphology helpers. Closing = dilation then erosion, `iterations` times
// each, with a 3x3 square. Pixels outside the frame count as background for
// dilation and as foreground for erosion, so closing never shrinks a mask.
BinaryMask binary_dilate(const BinaryMask& mask, int iterations);
BinaryMask binary_erode(const BinaryMask& mask, int iterations);
BinaryMask binary_close(const BinaryMask& mask, int iterations);

// Everything not reachable from a 1-pixel zero border through background
// pixels (4-connectivity).
BinaryMask fill_from_border(const BinaryMask& mask);

// Largest 4-connected component; the first in raster order wins ties.
BinaryMask largest_component(const BinaryMask& mask);

// One cascade attempt: threshold (> threshold), close, border fill, largest
// component, fragment removal, final closing.
BinaryMask mask_attempt(const GrayImage& img, double threshold, int closing_iterations,
                        const MaskConfig& config);

MaskResult extract_brain_mask(const GrayImage& img, const MaskConfig& config = {});

struct NormalizeResult {
  GrayImage image;
  bool constant_region = false;  // masked p1 == p99; output is all zeros
  double low = 0.0;
  double high = 0.0;
};

// Clips masked pixels to their [p1, p99] and rescales linearly to [0, 255];
// pixels outside the mask become 0.
NormalizeResult normalize_intensity(const GrayImage& img, const BinaryMask& mask);

struct CropConfig {
  std::size_t output_size = 128;
  double pad_fraction = 0.05;
  std::size_t min_pad = 4;
  double sharpen_min_scale = 1.2;
  double sharpen_max_scale = 3.0;
  UnsharpParams sharpen_low = {1.0, 80.0, 4.0};
  UnsharpParams sharpen_high = {2.5, 200.0, 1.0};
  std::uint8_t floor_intensity = 5;
};

// Linear interpolation of the unsharp parameters over the upscale factor,
// clamped at both ends.
UnsharpParams unsharp_params_for_scale(double upscale, const CropConfig& config = {});

struct CropResult {
  GrayImage image;
  BinaryMask mask;
  double upscale = 1.0;
  bool sharpened = false;
  UnsharpParams sharpen{};
};

// Throws ValidationError on an empty mask.
CropResult crop_resize_sharpen(const GrayImage& img, const BinaryMask& mask,
                               const CropConfig& config = {});

struct PreprocessConfig {
  MaskConfig mask;
  CropConfig crop;
};

struct PreprocessResult {
  GrayImage image;
  MaskResult mask;
  bool constant_region = false;
  double upscale = 1.0;
  bool sharpened = false;
};

PreprocessResult preprocess_image(const GrayImage& img, const PreprocessConfig& config = {});

// Preprocesses every image; output order follows input order regardless of
// thread count.
std::vector<PreprocessResult> preprocess_batch(std::span<const GrayImage> images,
                                               const PreprocessConfig& config, unsigned threads);

struct TelemetryRecord {
  std::string id;
  MaskTier tier = MaskTier::full_image;
  double area_fraction = 0.0;
  std::array<double, kMaskAttempts> attempt_fractions{};
  bool constant_region = false;
  double upscale = 1.0;
  bool sharpened = false;
};

struct PreprocessTelemetry {
  std::vector<TelemetryRecord> records;

  std::map<MaskTier, std::size_t> tier_counts() const;
  double mean_accepted_coverage() const;
  std::string to_jsonl() const;
  std::string summary_json() const;
};

TelemetryRecord make_telemetry(std::string id, const PreprocessResult& result);

}  // namespace synthqa
