#include "invartest/power_lab.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "invartest/distributions.hpp"
#include "invartest/parallel.hpp"

namespace invartest {

namespace {

constexpr std::uint64_t kBlockStride = 1ull << 40;

// Substream blocks: calibration of test t uses block t; power estimation of
// test t at grid point j uses block 3 + t * grid_size + j.  Calibration and
// evaluation never share a stream.
std::uint64_t calibration_block(TestId test) {
  return static_cast<std::uint64_t>(test);
}

std::uint64_t power_block(TestId test, std::size_t grid_size, std::size_t j) {
  return 3 + static_cast<std::uint64_t>(test) * grid_size + j;
}

SplitMix64 replicate_stream(std::uint64_t seed, std::uint64_t block, long r) {
  return SplitMix64::substream(seed, block * kBlockStride +
                                         static_cast<std::uint64_t>(r));
}

double statistic(TestId test, const TestStatistics& ts) {
  switch (test) {
    case TestId::T2: return ts.t2;
    case TestId::U: return ts.u;
    case TestId::W: return ts.w;
  }
  return 0.0;
}

Matrix sample_rows(SplitMix64& rng, long n, const Vector& theta,
                   const Matrix& chol_lower) {
  const Index p = theta.size();
  Matrix data(n, p);
  Vector z(p);
  for (long i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z[j] = rng.next_gaussian();
    data.row(i) = (theta + chol_lower * z).transpose();
  }
  return data;
}

// One replicate: simulate, redraw on a singular scatter (counted), and
// return the statistic.  The decomposition identity t2 = u + m is asserted
// on every replicate; it costs nothing extra and pins the statistic
// implementations together.
double one_replicate(SplitMix64& rng, const SimConfig& cfg,
                     const Vector& theta, const Matrix& chol_lower,
                     TestId test, long* resamples) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Matrix data = sample_rows(rng, cfg.n, theta, chol_lower);
    try {
      const SufficientStats stats = sufficient_stats(data, cfg.split);
      const TestStatistics ts = compute_statistics(stats);
      if (std::abs(ts.t2 - (ts.u + ts.m)) >
          1e-10 * std::max(std::abs(ts.t2), 1.0)) {
        throw Error(Errc::SingularScatter,
                    "statistic decomposition identity violated");
      }
      return statistic(test, ts);
    } catch (const Error& err) {
      if (err.code() != Errc::SingularScatter) throw;
      ++*resamples;
    }
  }
  throw Error(Errc::SingularScatter,
              "replicate kept producing singular scatter matrices");
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

const char* to_string(TestId id) {
  switch (id) {
    case TestId::T2: return "T2";
    case TestId::U: return "U";
    case TestId::W: return "W";
  }
  return "UNKNOWN";
}

void validate(const SimConfig& cfg) {
  if (cfg.reps < 1) throw Error(Errc::OutOfRange, "reps must be >= 1");
  if (cfg.n < cfg.dim + 1) {
    throw Error(Errc::TooFewRows, "need n >= p + 1");
  }
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) {
    throw Error(Errc::OutOfRange, "alpha must lie in (0, 1)");
  }
  if (cfg.sigma.dim() != cfg.dim || cfg.sigma.split() != cfg.split) {
    throw Error(Errc::DimMismatch, "sigma does not match dim/split");
  }
  for (const Vector& theta : cfg.theta_grid) {
    if (theta.size() != cfg.dim) {
      throw Error(Errc::DimMismatch, "theta grid entry has wrong length");
    }
  }
  if (cfg.threads < 1) throw Error(Errc::OutOfRange, "threads must be >= 1");
}

Matrix sample_dataset(SplitMix64& rng, long n, const Vector& theta,
                      const PartitionedSpdMatrix& sigma) {
  if (theta.size() != sigma.dim()) {
    throw Error(Errc::DimMismatch, "theta length does not match sigma");
  }
  if (n < 1) throw Error(Errc::OutOfRange, "need n >= 1");
  Eigen::LLT<Matrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "sigma is not positive definite");
  }
  return sample_rows(rng, n, theta, Matrix(llt.matrixL()));
}

double calibrate_critical(const SimConfig& cfg, TestId test) {
  validate(cfg);
  Eigen::LLT<Matrix> llt(cfg.sigma.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "sigma is not positive definite");
  }
  const Matrix chol_lower = llt.matrixL();
  const Vector theta0 = Vector::Zero(cfg.dim);
  const std::uint64_t block = calibration_block(test);

  std::vector<double> values(static_cast<std::size_t>(cfg.reps));
  std::vector<long> resamples(static_cast<std::size_t>(cfg.reps), 0);
  parallel_for(cfg.reps, cfg.threads, [&](long r) {
    SplitMix64 rng = replicate_stream(cfg.seed, block, r);
    values[static_cast<std::size_t>(r)] = one_replicate(
        rng, cfg, theta0, chol_lower, test, &resamples[static_cast<std::size_t>(r)]);
  });

  std::sort(values.begin(), values.end());
  const double pos = std::ceil((1.0 - cfg.alpha) * static_cast<double>(cfg.reps));
  const long idx = std::clamp<long>(static_cast<long>(pos) - 1, 0, cfg.reps - 1);
  return values[static_cast<std::size_t>(idx)];
}

std::vector<PowerRow> estimate_power(const SimConfig& cfg, TestId test,
                                     double critical_value) {
  validate(cfg);
  if (!(critical_value >= 0.0)) {
    throw Error(Errc::OutOfRange, "critical value must be >= 0");
  }
  Eigen::LLT<Matrix> llt(cfg.sigma.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "sigma is not positive definite");
  }
  const Matrix chol_lower = llt.matrixL();

  std::vector<PowerRow> rows;
  rows.reserve(cfg.theta_grid.size());
  for (std::size_t j = 0; j < cfg.theta_grid.size(); ++j) {
    const Vector& theta = cfg.theta_grid[j];
    const std::uint64_t block = power_block(test, cfg.theta_grid.size(), j);

    std::vector<unsigned char> reject(static_cast<std::size_t>(cfg.reps), 0);
    std::vector<long> resamples(static_cast<std::size_t>(cfg.reps), 0);
    parallel_for(cfg.reps, cfg.threads, [&](long r) {
      SplitMix64 rng = replicate_stream(cfg.seed, block, r);
      const double value =
          one_replicate(rng, cfg, theta, chol_lower, test,
                        &resamples[static_cast<std::size_t>(r)]);
      reject[static_cast<std::size_t>(r)] = value > critical_value ? 1 : 0;
    });

    long rejections = 0, redraws = 0;
    for (long r = 0; r < cfg.reps; ++r) {
      rejections += reject[static_cast<std::size_t>(r)];
      redraws += resamples[static_cast<std::size_t>(r)];
    }

    const InvariantParams ip = invariant_params(theta, cfg.sigma, cfg.n);
    const WilsonInterval ci = wilson_interval(rejections, cfg.reps);
    PowerRow row;
    row.test = test;
    row.delta1 = ip.delta1;
    row.delta2 = ip.delta2;
    row.power_hat =
        static_cast<double>(rejections) / static_cast<double>(cfg.reps);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    row.reps = cfg.reps;
    row.critical_value = critical_value;
    row.resamples = redraws;
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PowerRow& a, const PowerRow& b) {
                     return a.delta1 < b.delta1;
                   });
  return rows;
}

std::vector<PowerRow> power_table(const SimConfig& cfg) {
  validate(cfg);
  std::vector<PowerRow> all;
  for (TestId test : {TestId::T2, TestId::U, TestId::W}) {
    const double critical = calibrate_critical(cfg, test);
    std::vector<PowerRow> rows = estimate_power(cfg, test, critical);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

std::string tsv_header() {
  return "test\tn\tp1\tp2\tdelta1\tdelta2\tcritical\tpower\tci_low\tci_high"
         "\treps\tresamples";
}

std::string to_tsv_row(const PowerRow& row, const SimConfig& cfg) {
  std::string out;
  out += to_string(row.test);
  out += "\t" + std::to_string(cfg.n);
  out += "\t" + std::to_string(cfg.split);
  out += "\t" + std::to_string(cfg.dim - cfg.split);
  out += "\t" + fmt17(row.delta1);
  out += "\t" + fmt17(row.delta2);
  out += "\t" + fmt17(row.critical_value);
  out += "\t" + fmt17(row.power_hat);
  out += "\t" + fmt17(row.ci_low);
  out += "\t" + fmt17(row.ci_high);
  out += "\t" + std::to_string(row.reps);
  out += "\t" + std::to_string(row.resamples);
  return out;
}

}  // namespace invartest
