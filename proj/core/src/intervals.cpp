#include "synthqa/intervals.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "synthqa/error.hpp"

namespace synthqa {

namespace {

void check_counts(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) throw ValidationError("trials must be positive");
  if (successes < 0 || successes > trials) throw ValidationError("successes must lie in [0, trials]");
}

}  // namespace

Interval wilson_ci(std::int64_t successes, std::int64_t trials, double level) {
  check_counts(successes, trials);
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must be in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (successes == 0) out.low = 0.0;
  if (successes == trials) out.high = 1.0;
  return out;
}

double binomial_test(std::int64_t successes, std::int64_t trials, double p0) {
  check_counts(successes, trials);
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("p0 must be in (0, 1)");
  const boost::math::binomial dist(static_cast<double>(trials), p0);
  const double observed = boost::math::pdf(dist, static_cast<double>(successes));
  const double cutoff = observed * (1.0 + 1e-7);
  double total = 0.0;
  for (std::int64_t k = 0; k <= trials; ++k) {
    const double pk = boost::math::pdf(dist, static_cast<double>(k));
    if (pk <= cutoff) total += pk;
  }
  return std::min(1.0, total);
}

}  // namespace synthqa
