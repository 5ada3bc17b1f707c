#ifndef INVARTEST_VERIFIERS_HPP
#define INVARTEST_VERIFIERS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "invartest/matrix_core.hpp"

namespace invartest {

// Randomized numerical certification of the matrix inequalities and
// acceptance-region geometry behind the adjusted test statistic.
//
// Every verifier is a pure function of its config: trial i draws from
// SplitMix64::substream(seed, block * 2^40 + i), so reports are identical
// across runs, platforms and worker counts.  Margins are normalized by the
// spectral scale of the compared quantities; an inequality verifier PASSes
// iff its worst normalized margin stays above -tol.  A FAIL is not a bug in
// the verifier: it reports a numerical counterexample to the inequality it
// probes, and the witness field carries the offending instance.

enum class LemmaId {
  L1BplusConvex,      // chord test: convexity of the adjusted-precision map
  L2Penrose,          // four Moore-Penrose conditions for the kernel pair
  L4BConcave,         // chord test: concavity of its pseudo-inverse map
  L6QuadConvex,       // subadditivity of x'A^+x for compatible p.s.d. pairs
  Eq28Chain,          // ordering of pinv of mixtures vs mixture of kernels
  Eq29Chain,          // two-step scalar chain through the mixture pinv
  Thm1AuConvex,       // convexity of the adjusted-statistic acceptance region
  T2RegionConvex,     // convexity of the omnibus-statistic acceptance region
  WRegionNonconvex,   // witness search: ratio-statistic region is not convex
};

enum class Verdict { Pass, Fail, WitnessFound };

struct VerifierConfig {
  std::uint64_t seed = 0;
  long trials = 1000;
  Index dim = 3;
  Index split = 1;
  double tol = 1e-8;
  double step = 1e-3;  // finite-difference step for scalar curvature checks
  int threads = 1;     // reports are identical for any worker count
};

struct VerifierReport {
  LemmaId lemma_id = LemmaId::L2Penrose;
  std::uint64_t seed = 0;
  long trials_run = 0;
  double worst_violation = 0.0;  // most negative normalized margin seen
  double scalar_worst = 0.0;     // worst normalized curvature margin, when
                                 // the verifier runs a scalar cross-check
  double tol = 0.0;
  Verdict verdict = Verdict::Pass;
  std::string witness;           // JSON object for the worst instance, if any
};

const char* to_string(LemmaId id);
const char* to_string(Verdict v);
std::optional<LemmaId> parse_lemma_id(const std::string& name);

// One JSON record per report:
// {"lemma_id":...,"seed":...,"trials":...,"worst_violation":...,"tol":...,
//  "verdict":...,"witness":{...}}
std::string to_json_line(const VerifierReport& rep);

VerifierReport verify_bplus_convex(const VerifierConfig& cfg);
VerifierReport verify_penrose(const VerifierConfig& cfg);
VerifierReport verify_b_concave(const VerifierConfig& cfg);
VerifierReport verify_quad_convex(const VerifierConfig& cfg);
VerifierReport verify_chain_eq28(const VerifierConfig& cfg);
VerifierReport verify_chain_eq29(const VerifierConfig& cfg);

enum class Region { T2, U };

VerifierReport verify_region_convex(const VerifierConfig& cfg, Region region);

// Searches for two points inside the ratio-statistic acceptance region at
// threshold k whose midpoint falls outside.  The canonical seed instance
// (p1 = p2 = 1, xbar = (1, +-1), S = I, n = 2) is probed on every run before
// the randomized search.
VerifierReport find_w_nonconvexity(const VerifierConfig& cfg, double k = 1.0);

VerifierReport run_verifier(LemmaId id, const VerifierConfig& cfg);

void validate(const VerifierConfig& cfg);

}  // namespace invartest

#endif  // INVARTEST_VERIFIERS_HPP
