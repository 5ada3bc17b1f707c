#ifndef INVARTEST_INVARIANT_TESTS_HPP
#define INVARTEST_INVARIANT_TESTS_HPP

#include "invartest/matrix_core.hpp"

namespace invartest {

// Sample mean and (unnormalized) scatter matrix of a dataset, together with
// the declared partition.  The scatter is the centered cross-product matrix
// sum_i (x_i - xbar)(x_i - xbar)', not divided by n - 1; every statistic
// below carries the n(n-1) factor explicitly to match.
struct SufficientStats {
  long n = 0;
  Vector xbar;
  PartitionedSpdMatrix scatter;
};

// Builds SufficientStats from an n x p data matrix.  Throws TOO_FEW_ROWS for
// n < 2, NON_FINITE for NaN/inf entries, SINGULAR_SCATTER when the scatter
// fails the positive-definite check (always the case when n < p + 1).
SufficientStats sufficient_stats(const Matrix& data, Index split);

// Assembles SufficientStats from precomputed pieces (used by the simulation
// and verification layers, which synthesize (xbar, scatter) pairs directly).
SufficientStats make_sufficient_stats(long n, Vector xbar,
                                      PartitionedSpdMatrix scatter);

// The four test statistics of one dataset, all nonnegative:
//   t2 = n(n-1) xbar' S^-1 xbar                  (omnibus quadratic form)
//   u  = n(n-1) x_{1:2}' S_{11:2}^-1 x_{1:2}     (covariate-adjusted form)
//   m  = n(n-1) x_2' S_22^-1 x_2                 (covariate block form)
//   w  = u / (1 + m)
// Identities t2 = u + m and w (1 + m) = u hold to roundoff; l aliases w so
// the maximal-invariant pair (l (1+m), m) is recoverable from the fields.
struct TestStatistics {
  double t2 = 0.0;
  double u = 0.0;
  double w = 0.0;
  double m = 0.0;
  double l = 0.0;
};

// Computes every statistic; u is evaluated both through the Schur-complement
// route and through the adjusted-precision kernel, and the two must agree to
// 1e-10 relative or SINGULAR_SCATTER is raised.
TestStatistics compute_statistics(const SufficientStats& stats);

// Noncentrality quantities of a population (theta, sigma) at sample size n:
//   delta1 = n theta_{1:2}' Sigma_{11:2}^-1 theta_{1:2}
//   delta2 = n theta_2' Sigma_22^-1 theta_2
//   delta_star = delta1 + delta2
//   delta  = n theta_1' Sigma_{11:2}^-1 theta_1
struct InvariantParams {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta_star = 0.0;
  double delta = 0.0;
};

InvariantParams invariant_params(const Vector& theta,
                                 const PartitionedSpdMatrix& sigma, long n);

// Closed acceptance predicates (statistic <= k); k must be >= 0.
bool accept_u(const SufficientStats& stats, double k);
bool accept_t2(const SufficientStats& stats, double k);
bool accept_w(const SufficientStats& stats, double k);

// Maps a threshold on the x'(S + n xbar xbar')^-1 x form of the omnibus
// statistic onto the equivalent x'S^-1 x threshold: k*/(1 - k*) on [0, 1).
double threshold_map(double k_star);

// Block upper-triangular group element [[g11, g12], [0, g22]]; both diagonal
// blocks must be nonsingular.
struct GroupElement {
  Matrix g11;
  Matrix g12;
  Matrix g22;

  Matrix assemble() const;
};

// Group action on sufficient statistics: (xbar, S) -> (g xbar, g S g').
// All four test statistics are invariant under this action.
SufficientStats group_act(const GroupElement& g, const SufficientStats& stats);

struct WhitenedStats {
  Vector z;
  Matrix s0;
};

// Applies the covariate-whitening element g = [[I, -Sigma12 Sigma22^-1],
// [0, I]] to (xbar, S).  With sigma_tilde = diag(Sigma_{11:2}, Sigma_22),
// the trace identity tr Sigma^-1 (S + n xbar xbar') =
// tr sigma_tilde^-1 (s0 + n z z') holds to roundoff.
WhitenedStats whiten_covariates(const SufficientStats& stats,
                                const PartitionedSpdMatrix& sigma);

}  // namespace invartest

#endif  // INVARTEST_INVARIANT_TESTS_HPP
