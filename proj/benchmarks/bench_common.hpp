#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "synthqa/image.hpp"
#include "synthqa/random.hpp"

namespace synthqa::bench {

// Bright disc with noise on a dark background.
inline GrayImage disc_image(std::size_t side, std::uint64_t seed) {
  auto rng = stream_engine(seed, 0);
  GrayImage img(side, side);
  const double c = side / 2.0, r2 = (side * 0.4) * (side * 0.4);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      const double dx = x - c, dy = y - c;
      const auto noise = static_cast<int>(uniform_index(rng, 40));
      img.at(x, y) = static_cast<std::uint8_t>(dx * dx + dy * dy < r2 ? 90 + noise : noise / 8);
    }
  return img;
}

inline Eigen::MatrixXd normal_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  auto rng = stream_engine(seed, 1);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  return m;
}

}  // namespace synthqa::bench
