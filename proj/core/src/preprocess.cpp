#include "synthqa/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <json.hpp>

#include "synthqa/error.hpp"
#include "synthqa/parallel.hpp"

namespace synthqa {

Histogram histogram(const GrayImage& img) {
  Histogram h{};
  for (auto v : img.pixels) ++h[v];
  return h;
}

int otsu_threshold(std::span<const std::uint64_t, 256> hist) {
  std::uint64_t total = 0;
  double total_sum = 0.0;
  for (int v = 0; v < 256; ++v) {
    total += hist[v];
    total_sum += static_cast<double>(v) * static_cast<double>(hist[v]);
  }
  if (total == 0) throw ValidationError("otsu_threshold: empty histogram");

  int best_t = 0;
  double best_var = -1.0;
  std::uint64_t n0 = 0;
  double s0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[t];
    s0 += static_cast<double>(t) * static_cast<double>(hist[t]);
    const std::uint64_t n1 = total - n0;
    double var = 0.0;
    if (n0 != 0 && n1 != 0) {
      const double mu0 = s0 / static_cast<double>(n0);
      const double mu1 = (total_sum - s0) / static_cast<double>(n1);
      var = static_cast<double>(n0) * static_cast<double>(n1) * (mu0 - mu1) * (mu0 - mu1);
    }
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

std::string_view to_string(MaskTier tier) {
  switch (tier) {
    case MaskTier::otsu_050: return "otsu_050";
    case MaskTier::otsu_075: return "otsu_075";
    case MaskTier::otsu_100: return "otsu_100";
    case MaskTier::otsu_125: return "otsu_125";
    case MaskTier::otsu_150: return "otsu_150";
    case MaskTier::closest_to_50: return "closest_to_50";
    case MaskTier::full_image: return "full_image";
  }
  return "?";
}

bool is_otsu_tier(MaskTier tier) {
  return tier != MaskTier::closest_to_50 && tier != MaskTier::full_image;
}

namespace {

// Square dilation/erosion with Chebyshev radius r, as two separable passes.
// Windows are clipped to the frame, so dilation sees background beyond the
// border and erosion sees foreground.
BinaryMask square_filter(const BinaryMask& mask, std::size_t r, bool dilate) {
  if (r == 0) return mask;
  const std::size_t W = mask.width, H = mask.height;
  BinaryMask tmp(W, H), out(W, H);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const std::size_t lo = x >= r ? x - r : 0;
      const std::size_t hi = std::min(W - 1, x + r);
      std::uint8_t v = dilate ? 0 : 1;
      for (std::size_t k = lo; k <= hi; ++k) {
        if (dilate ? mask.at(k, y) != 0 : mask.at(k, y) == 0) {
          v = dilate ? 1 : 0;
          break;
        }
      }
      tmp.at(x, y) = v;
    }
  }
  for (std::size_t y = 0; y < H; ++y) {
    const std::size_t lo = y >= r ? y - r : 0;
    const std::size_t hi = std::min(H - 1, y + r);
    for (std::size_t x = 0; x < W; ++x) {
      std::uint8_t v = dilate ? 0 : 1;
      for (std::size_t k = lo; k <= hi; ++k) {
        if (dilate ? tmp.at(x, k) != 0 : tmp.at(x, k) == 0) {
          v = dilate ? 1 : 0;
          break;
        }
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

}  // namespace

BinaryMask binary_dilate(const BinaryMask& mask, int iterations) {
  return square_filter(mask, static_cast<std::size_t>(std::max(iterations, 0)), true);
}

BinaryMask binary_erode(const BinaryMask& mask, int iterations) {
  return square_filter(mask, static_cast<std::size_t>(std::max(iterations, 0)), false);
}

BinaryMask binary_close(const BinaryMask& mask, int iterations) {
  return binary_erode(binary_dilate(mask, iterations), iterations);
}

BinaryMask fill_from_border(const BinaryMask& mask) {
  const std::size_t W = mask.width + 2, H = mask.height + 2;
  std::vector<std::uint8_t> reached(W * H, 0);
  auto foreground = [&](std::size_t x, std::size_t y) {
    if (x == 0 || y == 0 || x == W - 1 || y == H - 1) return false;
    return mask.at(x - 1, y - 1) != 0;
  };
  std::vector<std::size_t> stack{0};
  reached[0] = 1;
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    const std::size_t x = idx % W, y = idx / W;
    auto visit = [&](std::size_t nx, std::size_t ny) {
      const std::size_t n = ny * W + nx;
      if (!reached[n] && !foreground(nx, ny)) {
        reached[n] = 1;
        stack.push_back(n);
      }
    };
    if (x > 0) visit(x - 1, y);
    if (x + 1 < W) visit(x + 1, y);
    if (y > 0) visit(x, y - 1);
    if (y + 1 < H) visit(x, y + 1);
  }
  BinaryMask out(mask.width, mask.height);
  for (std::size_t y = 0; y < mask.height; ++y)
    for (std::size_t x = 0; x < mask.width; ++x)
      out.at(x, y) = reached[(y + 1) * W + (x + 1)] ? 0 : 1;
  return out;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const std::size_t W = mask.width, H = mask.height;
  std::vector<std::int32_t> label(mask.size(), -1);
  std::int32_t best_label = -1;
  std::size_t best_size = 0;
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask.bits[start] || label[start] >= 0) continue;
    std::size_t size = 0;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t x = idx % W, y = idx / W;
      auto visit = [&](std::size_t n) {
        if (mask.bits[n] && label[n] < 0) {
          label[n] = next;
          stack.push_back(n);
        }
      };
      if (x > 0) visit(idx - 1);
      if (x + 1 < W) visit(idx + 1);
      if (y > 0) visit(idx - W);
      if (y + 1 < H) visit(idx + W);
    }
    if (size > best_size) {
      best_size = size;
      best_label = next;
    }
    ++next;
  }
  BinaryMask out(W, H);
  if (best_label < 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out.bits[i] = label[i] == best_label ? 1 : 0;
  return out;
}

BinaryMask mask_attempt(const GrayImage& img, double threshold, int closing_iterations,
                        const MaskConfig& config) {
  BinaryMask fg(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i)
    fg.bits[i] = static_cast<double>(img.pixels[i]) > threshold ? 1 : 0;
  BinaryMask candidate = largest_component(fill_from_border(binary_close(fg, closing_iterations)));
  if (candidate.count() < config.min_fragment_pixels) return BinaryMask(img.width, img.height);
  return binary_close(candidate, config.final_closing_iterations);
}

MaskResult extract_brain_mask(const GrayImage& img, const MaskConfig& config) {
  if (img.empty()) throw ValidationError("extract_brain_mask: empty image");
  const Histogram hist = histogram(img);
  const int otsu = otsu_threshold(hist);
  const double total = static_cast<double>(img.size());

  MaskResult result;
  std::array<BinaryMask, kMaskAttempts> attempts;
  for (std::size_t a = 0; a < kMaskAttempts; ++a) {
    attempts[a] = mask_attempt(img, config.scales[a] * otsu, config.closing_iterations[a], config);
    result.attempt_fractions[a] = static_cast<double>(attempts[a].count()) / total;
  }
  for (std::size_t a = 0; a < kMaskAttempts; ++a) {
    const double f = result.attempt_fractions[a];
    if (f >= config.min_area_fraction && f <= config.max_area_fraction) {
      result.mask = std::move(attempts[a]);
      result.accepted_tier = static_cast<MaskTier>(a);
      result.area_fraction = f;
      return result;
    }
  }
  // No attempt in range: closest to half coverage among plausible
  // (non-empty, not full-frame) candidates, earliest on ties.
  std::ptrdiff_t best = -1;
  double best_gap = 2.0;
  for (std::size_t a = 0; a < kMaskAttempts; ++a) {
    const double f = result.attempt_fractions[a];
    if (f <= 0.0 || f >= 1.0) continue;
    const double gap = std::abs(f - 0.5);
    if (gap < best_gap) {
      best_gap = gap;
      best = static_cast<std::ptrdiff_t>(a);
    }
  }
  if (best >= 0) {
    result.mask = std::move(attempts[static_cast<std::size_t>(best)]);
    result.accepted_tier = MaskTier::closest_to_50;
    result.area_fraction = result.attempt_fractions[static_cast<std::size_t>(best)];
    return result;
  }
  result.mask = BinaryMask(img.width, img.height, true);
  result.accepted_tier = MaskTier::full_image;
  result.area_fraction = 1.0;
  return result;
}

namespace {

// Linear-interpolated percentile from a histogram of n samples.
double histogram_quantile(const Histogram& h, std::uint64_t n, double q) {
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::uint64_t>(std::floor(pos));
  const std::uint64_t hi = std::min(lo + 1, n - 1);
  auto order_stat = [&](std::uint64_t k) {
    std::uint64_t seen = 0;
    for (int v = 0; v < 256; ++v) {
      seen += h[v];
      if (seen > k) return static_cast<double>(v);
    }
    return 255.0;
  };
  const double a = order_stat(lo);
  const double b = order_stat(hi);
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

}  // namespace

NormalizeResult normalize_intensity(const GrayImage& img, const BinaryMask& mask) {
  if (img.width != mask.width || img.height != mask.height)
    throw ValidationError("normalize_intensity: mask shape mismatch");
  NormalizeResult result;
  result.image = GrayImage(img.width, img.height);
  Histogram h{};
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mask.bits[i]) {
      ++h[img.pixels[i]];
      ++n;
    }
  }
  if (n == 0) {
    result.constant_region = true;
    return result;
  }
  result.low = histogram_quantile(h, n, 0.01);
  result.high = histogram_quantile(h, n, 0.99);
  if (!(result.high > result.low)) {
    result.constant_region = true;
    return result;
  }
  const double span = result.high - result.low;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!mask.bits[i]) continue;
    const double v = std::clamp(static_cast<double>(img.pixels[i]), result.low, result.high);
    result.image.pixels[i] =
        static_cast<std::uint8_t>(std::clamp(std::floor((v - result.low) / span * 255.0 + 0.5), 0.0, 255.0));
  }
  return result;
}

UnsharpParams unsharp_params_for_scale(double upscale, const CropConfig& config) {
  const double t = std::clamp((upscale - config.sharpen_min_scale) /
                                  (config.sharpen_max_scale - config.sharpen_min_scale),
                              0.0, 1.0);
  auto lerp = [t](double a, double b) { return a + t * (b - a); };
  return {lerp(config.sharpen_low.radius, config.sharpen_high.radius),
          lerp(config.sharpen_low.percent, config.sharpen_high.percent),
          lerp(config.sharpen_low.threshold, config.sharpen_high.threshold)};
}

CropResult crop_resize_sharpen(const GrayImage& img, const BinaryMask& mask, const CropConfig& config) {
  if (img.width != mask.width || img.height != mask.height)
    throw ValidationError("crop_resize_sharpen: mask shape mismatch");
  std::size_t x0 = img.width, y0 = img.height, x1 = 0, y1 = 0;
  bool any = false;
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      any = true;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!any) throw ValidationError("crop_resize_sharpen: empty mask");

  const std::size_t larger = std::max(x1 - x0 + 1, y1 - y0 + 1);
  const auto pad = std::max(config.min_pad,
                            static_cast<std::size_t>(std::lround(config.pad_fraction * static_cast<double>(larger))));
  x0 = x0 >= pad ? x0 - pad : 0;
  y0 = y0 >= pad ? y0 - pad : 0;
  x1 = std::min(img.width - 1, x1 + pad);
  y1 = std::min(img.height - 1, y1 + pad);
  const std::size_t cw = x1 - x0 + 1, ch = y1 - y0 + 1;

  GrayImage crop(cw, ch);
  BinaryMask crop_mask(cw, ch);
  for (std::size_t y = 0; y < ch; ++y) {
    for (std::size_t x = 0; x < cw; ++x) {
      crop.at(x, y) = img.at(x0 + x, y0 + y);
      crop_mask.at(x, y) = mask.at(x0 + x, y0 + y);
    }
  }

  const std::size_t n = config.output_size;
  CropResult result;
  result.upscale = static_cast<double>(n) / static_cast<double>(std::max(cw, ch));
  result.image = resize_lanczos(crop, n, n);
  result.mask = resize_nearest(crop_mask, n, n);
  if (result.upscale >= config.sharpen_min_scale) {
    result.sharpened = true;
    result.sharpen = unsharp_params_for_scale(result.upscale, config);
    result.image = unsharp_mask(result.image, result.sharpen);
  }
  for (std::size_t i = 0; i < result.image.size(); ++i) {
    if (!result.mask.bits[i] || result.image.pixels[i] < config.floor_intensity)
      result.image.pixels[i] = 0;
  }
  return result;
}

PreprocessResult preprocess_image(const GrayImage& img, const PreprocessConfig& config) {
  PreprocessResult result;
  result.mask = extract_brain_mask(img, config.mask);
  NormalizeResult norm = normalize_intensity(img, result.mask.mask);
  result.constant_region = norm.constant_region;
  CropResult crop = crop_resize_sharpen(norm.image, result.mask.mask, config.crop);
  result.image = std::move(crop.image);
  result.upscale = crop.upscale;
  result.sharpened = crop.sharpened;
  return result;
}

std::vector<PreprocessResult> preprocess_batch(std::span<const GrayImage> images,
                                               const PreprocessConfig& config, unsigned threads) {
  std::vector<PreprocessResult> out(images.size());
  parallel_for(images.size(), threads,
               [&](std::size_t i) { out[i] = preprocess_image(images[i], config); });
  return out;
}

TelemetryRecord make_telemetry(std::string id, const PreprocessResult& result) {
  TelemetryRecord r;
  r.id = std::move(id);
  r.tier = result.mask.accepted_tier;
  r.area_fraction = result.mask.area_fraction;
  r.attempt_fractions = result.mask.attempt_fractions;
  r.constant_region = result.constant_region;
  r.upscale = result.upscale;
  r.sharpened = result.sharpened;
  return r;
}

std::map<MaskTier, std::size_t> PreprocessTelemetry::tier_counts() const {
  std::map<MaskTier, std::size_t> counts;
  for (const auto& r : records) ++counts[r.tier];
  return counts;
}

double PreprocessTelemetry::mean_accepted_coverage() const {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) sum += r.area_fraction;
  return sum / static_cast<double>(records.size());
}

std::string PreprocessTelemetry::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["tier"] = to_string(r.tier);
    j["area_fraction"] = r.area_fraction;
    j["attempt_fractions"] = r.attempt_fractions;
    j["constant_region"] = r.constant_region;
    j["upscale"] = r.upscale;
    j["sharpened"] = r.sharpened;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string PreprocessTelemetry::summary_json() const {
  nlohmann::ordered_json j;
  j["images"] = records.size();
  nlohmann::ordered_json tiers = nlohmann::ordered_json::object();
  const auto counts = tier_counts();
  for (int t = 0; t <= static_cast<int>(MaskTier::full_image); ++t) {
    const auto tier = static_cast<MaskTier>(t);
    auto it = counts.find(tier);
    tiers[std::string(to_string(tier))] = it == counts.end() ? 0 : it->second;
  }
  j["tier_counts"] = tiers;
  j["mean_accepted_coverage"] = mean_accepted_coverage();
  return j.dump(2) + "\n";
}

}  // namespace synthqa
