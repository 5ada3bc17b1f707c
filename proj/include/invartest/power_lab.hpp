#ifndef INVARTEST_POWER_LAB_HPP
#define INVARTEST_POWER_LAB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "invartest/invariant_tests.hpp"
#include "invartest/rng.hpp"

namespace invartest {

enum class TestId { T2, U, W };

const char* to_string(TestId id);

// Monte Carlo experiment description.  theta_grid entries are population
// means; each yields one power row per test.  Replicates are keyed to
// counter-derived substreams, so results are bit-identical for any number of
// worker threads.
struct SimConfig {
  std::uint64_t seed = 0;
  long reps = 10000;
  long n = 20;
  Index dim = 3;
  Index split = 1;
  double alpha = 0.05;
  PartitionedSpdMatrix sigma;
  std::vector<Vector> theta_grid;
  int threads = 1;
};

void validate(const SimConfig& cfg);

struct PowerRow {
  TestId test = TestId::T2;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double power_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  long reps = 0;
  double critical_value = 0.0;
  long resamples = 0;
};

// n i.i.d. rows theta + L z, with L the lower Cholesky factor of sigma and
// z standard normal from the supplied stream.
Matrix sample_dataset(SplitMix64& rng, long n, const Vector& theta,
                      const PartitionedSpdMatrix& sigma);

// Empirical upper (1 - alpha) quantile of the statistic under theta = 0:
// the ceil((1-alpha) * reps)-th order statistic of reps null replicates.
// Each test draws from its own substream block.
double calibrate_critical(const SimConfig& cfg, TestId test);

// Rejection frequencies {statistic > critical_value} over the theta grid,
// with Wilson 95% intervals and noncentrality coordinates per row.  Rows are
// sorted by delta1.  Replicates whose scatter fails the positive-definite
// check are redrawn and counted in PowerRow::resamples.
std::vector<PowerRow> estimate_power(const SimConfig& cfg, TestId test,
                                     double critical_value);

// Calibrates each test at cfg.alpha on an independent substream, then runs
// estimate_power; rows sorted by (test, delta1).
std::vector<PowerRow> power_table(const SimConfig& cfg);

// Tab-separated output, one row per PowerRow.  Floats carry 17 significant
// digits so output round-trips exactly.
std::string tsv_header();
std::string to_tsv_row(const PowerRow& row, const SimConfig& cfg);

}  // namespace invartest

#endif  // INVARTEST_POWER_LAB_HPP
