#pragma once

#include <cstdint>
#include <random>

namespace synthqa {

// Independent engine for stream `index` under a run seed. Resampling loops
// draw one stream per resample so results do not depend on thread count.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Unbiased integer in [0, bound). Implemented here rather than with
// std::uniform_int_distribution, whose output differs between standard
// libraries.
inline std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw = engine();
  while (draw >= limit) draw = engine();
  return draw % bound;
}

inline bool coin_flip(std::mt19937_64& engine) { return (engine() >> 63) != 0; }

}  // namespace synthqa
