#ifndef INVARTEST_DISTRIBUTIONS_HPP
#define INVARTEST_DISTRIBUTIONS_HPP

namespace invartest {

// Quantile of the F distribution with (d1, d2) degrees of freedom.
// Serves as the closed-form cross-check for Monte Carlo calibrated critical
// values; it never feeds back into the calibration itself.
double f_quantile(double prob, double d1, double d2);

// Exact null critical value of the omnibus statistic n(n-1) xbar' S^-1 xbar
// at level alpha: (n-1) p / (n-p) times the F(p, n-p) upper quantile.
double t2_critical_from_f(double alpha, long n, long p);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval for a binomial proportion (default 95%).  Chosen over
// the Wald interval for sane coverage near 0 and 1.
WilsonInterval wilson_interval(long successes, long trials,
                               double z = 1.959963984540054);

}  // namespace invartest

#endif  // INVARTEST_DISTRIBUTIONS_HPP
