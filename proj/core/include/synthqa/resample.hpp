#pragma once

#include <cstddef>

#include "synthqa/image.hpp"

namespace synthqa {

// Separable Lanczos (a = 3) resampling. When downscaling, the kernel is
// stretched by the scale factor so it acts as an antialiasing filter.
// Equal input and output sizes reproduce the input exactly.
GrayImage resize_lanczos(const GrayImage& img, std::size_t out_width, std::size_t out_height);

// Nearest-neighbour resize sampling at output pixel centres.
BinaryMask resize_nearest(const BinaryMask& mask, std::size_t out_width, std::size_t out_height);

// Separable Gaussian blur (standard deviation `sigma`, support 3 sigma,
// clamped edges), rounded to 8 bits.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

struct UnsharpParams {
  double radius = 0.0;
  double percent = 0.0;
  double threshold = 0.0;
};

// out = in + (in - blur(in)) * percent / 100 where |in - blur(in)| >= threshold.
GrayImage unsharp_mask(const GrayImage& img, const UnsharpParams& params);

}  // namespace synthqa
