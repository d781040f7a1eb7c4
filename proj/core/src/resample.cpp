#include "synthqa/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "synthqa/error.hpp"

namespace synthqa {

namespace {

constexpr double kLanczosSupport = 3.0;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  x *= std::numbers::pi;
  return std::sin(x) / x;
}

double lanczos(double x) {
  if (x <= -kLanczosSupport || x >= kLanczosSupport) return 0.0;
  return sinc(x) * sinc(x / kLanczosSupport);
}

struct Taps {
  std::size_t first = 0;
  std::vector<double> weights;
};

std::vector<Taps> lanczos_taps(std::size_t in_size, std::size_t out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double filter_scale = std::max(scale, 1.0);
  const double support = kLanczosSupport * filter_scale;
  std::vector<Taps> taps(out_size);
  for (std::size_t x = 0; x < out_size; ++x) {
    const double center = (static_cast<double>(x) + 0.5) * scale;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(center - support + 0.5));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(center + support + 0.5));
    const std::size_t first = static_cast<std::size_t>(std::max<std::ptrdiff_t>(lo, 0));
    const std::size_t last =
        static_cast<std::size_t>(std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(in_size)));
    Taps t;
    t.first = first;
    double total = 0.0;
    for (std::size_t i = first; i < last; ++i) {
      const double w = lanczos((static_cast<double>(i) - center + 0.5) / filter_scale);
      t.weights.push_back(w);
      total += w;
    }
    if (total != 0.0)
      for (double& w : t.weights) w /= total;
    taps[x] = std::move(t);
  }
  return taps;
}

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

GrayImage resize_lanczos(const GrayImage& img, std::size_t out_width, std::size_t out_height) {
  if (img.empty() || out_width == 0 || out_height == 0)
    throw ValidationError("resize_lanczos: empty input or output size");
  const auto htaps = lanczos_taps(img.width, out_width);
  const auto vtaps = lanczos_taps(img.height, out_height);

  std::vector<double> horizontal(out_width * img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    const std::uint8_t* row = img.pixels.data() + y * img.width;
    for (std::size_t x = 0; x < out_width; ++x) {
      const Taps& t = htaps[x];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) acc += t.weights[k] * row[t.first + k];
      horizontal[y * out_width + x] = acc;
    }
  }
  GrayImage out(out_width, out_height);
  for (std::size_t y = 0; y < out_height; ++y) {
    const Taps& t = vtaps[y];
    for (std::size_t x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k)
        acc += t.weights[k] * horizontal[(t.first + k) * out_width + x];
      out.at(x, y) = clamp_round(acc);
    }
  }
  return out;
}

BinaryMask resize_nearest(const BinaryMask& mask, std::size_t out_width, std::size_t out_height) {
  if (mask.size() == 0 || out_width == 0 || out_height == 0)
    throw ValidationError("resize_nearest: empty input or output size");
  BinaryMask out(out_width, out_height);
  auto source_index = [](std::size_t dst, std::size_t in, std::size_t outn) {
    const auto s = static_cast<std::size_t>(
        std::floor((static_cast<double>(dst) + 0.5) * static_cast<double>(in) / static_cast<double>(outn)));
    return std::min(s, in - 1);
  };
  for (std::size_t y = 0; y < out_height; ++y) {
    const std::size_t sy = source_index(y, mask.height, out_height);
    for (std::size_t x = 0; x < out_width; ++x)
      out.at(x, y) = mask.at(source_index(x, mask.width, out_width), sy);
  }
  return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const auto W = static_cast<std::ptrdiff_t>(img.width);
  const auto H = static_cast<std::ptrdiff_t>(img.height);
  std::vector<double> tmp(img.size());
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::ptrdiff_t sx = std::clamp<std::ptrdiff_t>(x + k, 0, W - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * img.pixels[static_cast<std::size_t>(y * W + sx)];
      }
      tmp[static_cast<std::size_t>(y * W + x)] = acc;
    }
  }
  GrayImage out(img.width, img.height);
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::ptrdiff_t sy = std::clamp<std::ptrdiff_t>(y + k, 0, H - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(sy * W + x)];
      }
      out.pixels[static_cast<std::size_t>(y * W + x)] = clamp_round(acc);
    }
  }
  return out;
}

GrayImage unsharp_mask(const GrayImage& img, const UnsharpParams& params) {
  const GrayImage blurred = gaussian_blur(img, params.radius);
  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double diff = static_cast<double>(img.pixels[i]) - static_cast<double>(blurred.pixels[i]);
    if (std::abs(diff) >= params.threshold) {
      out.pixels[i] = clamp_round(img.pixels[i] + diff * params.percent / 100.0);
    } else {
      out.pixels[i] = img.pixels[i];
    }
  }
  return out;
}

}  // namespace synthqa
