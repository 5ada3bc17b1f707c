#include "invartest/cone_probe.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>

#include "invartest/rng.hpp"

namespace invartest {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

bool half_space_membership(const HalfSpaceSpec& spec,
                           const SufficientStats& stats) {
  if (spec.theta.size() != stats.scatter.dim() ||
      spec.sigma.dim() != stats.scatter.dim()) {
    throw Error(Errc::DimMismatch, "half-space spec does not match stats");
  }
  Eigen::LLT<Matrix> llt(spec.sigma.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "sigma is not positive definite");
  }
  const double dn = static_cast<double>(stats.n);
  const double linear = dn * spec.theta.dot(llt.solve(stats.xbar));
  Matrix inner = stats.scatter.matrix();
  if (spec.variant == HalfSpaceVariant::Adjusted) {
    inner += dn * stats.xbar * stats.xbar.transpose();
  }
  const double trace = llt.solve(inner).trace();
  return linear - 0.5 * trace > spec.c;
}

bool dual_cone_membership(const Vector& w, const PartitionedSpdMatrix& sigma,
                          long samples, std::uint64_t seed) {
  if (w.size() != sigma.dim()) {
    throw Error(Errc::DimMismatch, "w length does not match sigma");
  }
  if (samples < 1) throw Error(Errc::OutOfRange, "samples must be >= 1");

  const Index p1 = sigma.split(), p2 = sigma.coSplit();
  Eigen::LLT<Matrix> llt22(Matrix(sigma.block22()));
  if (llt22.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "sigma block 2 is not positive definite");
  }
  const Vector wtilde1 =
      w.head(p1) - sigma.block12() * llt22.solve(w.tail(p2));

  const Matrix schur = schur_complement(sigma);
  Eigen::LLT<Matrix> llt_schur(schur);
  const Vector v = llt_schur.solve(wtilde1);

  // Probe threshold scales with |w| (the accepted set is a cone) and with
  // the conditioning of the adjusted block.
  const double bound =
      1e-10 * std::max(w.norm(), 1e-300) * spectral_norm(schur.inverse());

  SplitMix64 rng = SplitMix64::substream(seed, 0);
  for (long s = 0; s < samples; ++s) {
    Vector theta1(p1);
    double norm = 0.0;
    do {
      for (Index i = 0; i < p1; ++i) theta1[i] = rng.next_gaussian();
      norm = theta1.norm();
    } while (norm < 1e-12);
    theta1 /= norm;
    const double inner = theta1.dot(v);
    if (inner > bound || -inner > bound) return false;
  }
  return true;
}

ConeProbeResult region_exit_radius(Region region, const Vector& direction,
                                   const PartitionedSpdMatrix& s, long n,
                                   double k) {
  if (direction.size() != s.dim()) {
    throw Error(Errc::DimMismatch, "direction length does not match scatter");
  }
  if (!(k > 0.0)) throw Error(Errc::OutOfRange, "k must be > 0");
  if (n < 2) throw Error(Errc::OutOfRange, "need n >= 2");
  const double norm = direction.norm();
  if (!(norm > 0.0)) throw Error(Errc::OutOfRange, "direction must be nonzero");

  ConeProbeResult result;
  result.direction = direction / norm;
  result.region = region;

  double q = 0.0;
  double qscale = 0.0;
  if (region == Region::T2) {
    Eigen::LLT<Matrix> llt(s.matrix());
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::NonPd, "scatter is not positive definite");
    }
    q = result.direction.dot(llt.solve(result.direction));
    qscale = spectral_norm(llt.solve(Matrix::Identity(s.dim(), s.dim())));
  } else {
    const Vector d12 = adjusted_mean(result.direction, s);
    const Matrix schur = schur_complement(s);
    Eigen::LLT<Matrix> llt(schur);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::NonPd, "adjusted block-1 scatter not p.d.");
    }
    q = d12.dot(llt.solve(d12));
    qscale = spectral_norm(llt.solve(Matrix::Identity(schur.rows(), schur.rows())));
  }

  const double nn1 = static_cast<double>(n) * static_cast<double>(n - 1);
  if (q <= 1e-12 * qscale) {
    result.exit_radius = std::numeric_limits<double>::infinity();
  } else {
    result.exit_radius = std::sqrt(k / (nn1 * q));
  }
  return result;
}

std::string to_json_line(const ConeProbeResult& result) {
  std::string out = "{\"region\":\"";
  out += result.region == Region::T2 ? "t2" : "u";
  out += "\",\"direction\":[";
  for (Index i = 0; i < result.direction.size(); ++i) {
    if (i) out += ",";
    out += fmt17(result.direction[i]);
  }
  out += "],\"exit_radius\":";
  out += is_infinite_radius(result) ? "\"inf\"" : fmt17(result.exit_radius);
  out += "}";
  return out;
}

}  // namespace invartest
