#pragma once

#include <cstdint>

namespace synthqa {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion.
Interval wilson_ci(std::int64_t successes, std::int64_t trials, double level = 0.95);

// Exact two-sided binomial test: total probability of outcomes no more
// likely than the observed one.
double binomial_test(std::int64_t successes, std::int64_t trials, double p0 = 0.5);

}  // namespace synthqa
