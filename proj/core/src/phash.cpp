#include "synthqa/phash.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "synthqa/error.hpp"
#include "synthqa/resample.hpp"

namespace synthqa {

namespace {

constexpr std::size_t kSide = 32;
constexpr std::size_t kBlock = 8;

// Unnormalised DCT-II basis: y[k] = 2 * sum_n x[n] cos(pi k (2n + 1) / 2N).
const std::array<double, kBlock * kSide>& dct_basis() {
  static const auto basis = [] {
    std::array<double, kBlock * kSide> b{};
    for (std::size_t k = 0; k < kBlock; ++k)
      for (std::size_t n = 0; n < kSide; ++n)
        b[k * kSide + n] =
            2.0 * std::cos(std::numbers::pi * static_cast<double>(k) *
                           (2.0 * static_cast<double>(n) + 1.0) / (2.0 * kSide));
    return b;
  }();
  return basis;
}

}  // namespace

PHash phash(const GrayImage& img, const PHashOptions& options) {
  if (img.empty()) throw ValidationError("phash: empty image");
  const GrayImage small = resize_lanczos(img, kSide, kSide);
  const auto& basis = dct_basis();

  // Columns first (axis 0), then rows; only the low-frequency 8x8 corner.
  std::array<double, kBlock * kSide> by_column{};  // [k_row][x]
  for (std::size_t k = 0; k < kBlock; ++k)
    for (std::size_t x = 0; x < kSide; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < kSide; ++y) acc += basis[k * kSide + y] * small.at(x, y);
      by_column[k * kSide + x] = acc;
    }
  std::array<double, kBlock * kBlock> block{};
  for (std::size_t r = 0; r < kBlock; ++r)
    for (std::size_t c = 0; c < kBlock; ++c) {
      double acc = 0.0;
      for (std::size_t x = 0; x < kSide; ++x) acc += basis[c * kSide + x] * by_column[r * kSide + x];
      block[r * kBlock + c] = acc;
    }

  std::vector<double> sample(block.begin() + (options.include_dc ? 0 : 1), block.end());
  std::sort(sample.begin(), sample.end());
  const std::size_t m = sample.size();
  const double median = m % 2 ? sample[m / 2] : 0.5 * (sample[m / 2 - 1] + sample[m / 2]);

  PHash h;
  for (std::size_t i = 0; i < block.size(); ++i)
    if (block[i] > median) h.bits |= std::uint64_t{1} << (63 - i);
  return h;
}

std::string to_hex(PHash h) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[static_cast<std::size_t>(i)] = kHex[(h.bits >> (60 - 4 * i)) & 0xF];
  return out;
}

}  // namespace synthqa
