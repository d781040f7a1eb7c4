#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "synthqa/image.hpp"

namespace synthqa {

// 64-bit DCT perceptual hash. Bit i (row-major over the 8x8 low-frequency
// block) is stored at position 63 - i, so the hex form reads in block order.
struct PHash {
  std::uint64_t bits = 0;

  bool operator==(const PHash&) const = default;
  auto operator<=>(const PHash&) const = default;
};

struct PHashOptions {
  // Include the DC coefficient when taking the median of the 8x8 block.
  bool include_dc = true;
};

// Resize to 32x32 (Lanczos), 2-D type-II DCT, 8x8 low-frequency block,
// bit = coefficient > block median.
PHash phash(const GrayImage& img, const PHashOptions& options = {});

inline int hamming(PHash a, PHash b) { return std::popcount(a.bits ^ b.bits); }

std::string to_hex(PHash h);

}  // namespace synthqa
