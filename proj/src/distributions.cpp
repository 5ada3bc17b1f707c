#include "invartest/distributions.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>

#include "invartest/error.hpp"

namespace invartest {

double f_quantile(double prob, double d1, double d2) {
  if (!(prob > 0.0) || !(prob < 1.0)) {
    throw Error(Errc::OutOfRange, "probability must lie in (0, 1)");
  }
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw Error(Errc::OutOfRange, "degrees of freedom must be positive");
  }
  return boost::math::quantile(boost::math::fisher_f_distribution<double>(d1, d2),
                               prob);
}

double t2_critical_from_f(double alpha, long n, long p) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(Errc::OutOfRange, "alpha must lie in (0, 1)");
  }
  if (n <= p || p < 1) {
    throw Error(Errc::OutOfRange, "need n > p >= 1");
  }
  const double dn = static_cast<double>(n), dp = static_cast<double>(p);
  return (dn - 1.0) * dp / (dn - dp) *
         f_quantile(1.0 - alpha, dp, dn - dp);
}

WilsonInterval wilson_interval(long successes, long trials, double z) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw Error(Errc::OutOfRange, "need 0 <= successes <= trials, trials >= 1");
  }
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval out;
  // The interval always contains the point estimate; the min/max guards
  // remove the last-ulp rounding at 0 and n successes.
  out.low = std::min(std::max(0.0, center - half), phat);
  out.high = std::max(std::min(1.0, center + half), phat);
  return out;
}

}  // namespace invartest
