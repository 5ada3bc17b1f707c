#ifndef INVARTEST_CONE_PROBE_HPP
#define INVARTEST_CONE_PROBE_HPP

#include <cstdint>
#include <string>

#include "invartest/invariant_tests.hpp"
#include "invartest/verifiers.hpp"  // Region

namespace invartest {

enum class HalfSpaceVariant {
  Star,      // n theta' Sigma^-1 xbar - tr(Sigma^-1 S) / 2            > c
  Adjusted,  // n theta' Sigma^-1 xbar - tr(Sigma^-1 (S + n xbar xbar')) / 2 > c
};

struct HalfSpaceSpec {
  Vector theta;
  PartitionedSpdMatrix sigma;
  double c = 0.0;
  HalfSpaceVariant variant = HalfSpaceVariant::Star;
};

// Evaluates the defining inequality of the chosen half-space variant.
// Membership in the Adjusted variant implies membership in Star at the same
// (theta, sigma, c), since the extra trace term is nonnegative.
bool half_space_membership(const HalfSpaceSpec& spec,
                           const SufficientStats& stats);

// Sampling probe of the dual cone of {Sigma^-1 theta : theta_2 = 0}: maps w
// through wtilde = (w_1 - Sigma12 Sigma22^-1 w_2, w_2) and demands
// theta_1' Sigma_{11:2}^-1 wtilde_1 <= 0 for `samples` random theta_1 of both
// signs.  Accepts exactly the w with wtilde_1 = 0 (up to solve roundoff); the
// accepted set is the embedded copy of R^{p2}, which is unbounded.
bool dual_cone_membership(const Vector& w, const PartitionedSpdMatrix& sigma,
                          long samples, std::uint64_t seed = 0);

struct ConeProbeResult {
  Vector direction;       // unit vector
  double exit_radius = 0.0;  // +infinity when the ray never leaves the region
  Region region = Region::T2;
};

inline bool is_infinite_radius(const ConeProbeResult& r) {
  return std::isinf(r.exit_radius);
}

// Largest t with xbar = t * direction still inside {statistic <= k} for
// fixed scatter s.  Both statistics are quadratic along a ray, so the exit
// radius is sqrt(k / (n(n-1) q)) with q the relevant quadratic form of the
// direction; q = 0 yields an infinite radius (the adjusted statistic
// vanishes identically on the p2-dimensional subspace with zero adjusted
// first block).
ConeProbeResult region_exit_radius(Region region, const Vector& direction,
                                   const PartitionedSpdMatrix& s, long n,
                                   double k);

// {"region":...,"direction":[...],"exit_radius":...|"inf"}
std::string to_json_line(const ConeProbeResult& result);

}  // namespace invartest

#endif  // INVARTEST_CONE_PROBE_HPP
