#include "invartest/matrix_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace invartest {

namespace {

constexpr double kSymmetryRelTol = 1e-12;
constexpr double kPsdRelTol = 1e-10;

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "eigendecomposition failed to converge");
  }
  return es;
}

double rank_cutoff(const Vector& eigenvalues) {
  const double lmax = eigenvalues.cwiseAbs().maxCoeff();
  return static_cast<double>(eigenvalues.size()) *
         std::numeric_limits<double>::epsilon() * lmax;
}

}  // namespace

Matrix require_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(Errc::DimMismatch, "matrix is not square");
  }
  const double scale = std::max(max_abs(a), 1e-300);
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryRelTol * scale) {
    throw Error(Errc::NotSymmetric,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  return (a + a.transpose()) / 2.0;
}

bool PartitionedSpdMatrix::is_positive_definite(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    // LLT can "succeed" on some near-singular inputs; insist on a strictly
    // positive diagonal of the factor.
    if (Matrix(llt.matrixL()).diagonal().minCoeff() > 0.0) return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
}

PartitionedSpdMatrix::PartitionedSpdMatrix(Matrix entries, Index split,
                                           Definiteness req)
    : m_(std::move(entries)), split_(split) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw Error(Errc::DimMismatch, "entries must be a nonempty square matrix");
  }
  if (split_ <= 0 || split_ >= m_.rows()) {
    throw Error(Errc::DimMismatch, "block split must satisfy 0 < p1 < p");
  }
  m_ = require_symmetric(m_);
  if (req == Definiteness::PositiveDefinite) {
    if (!is_positive_definite(m_)) {
      throw Error(Errc::NonPd, "matrix is not positive definite");
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw Error(Errc::NonPd, "eigendecomposition failed");
    }
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    if (lmin < -kPsdRelTol * lmax) {
      throw Error(Errc::NonPd, "matrix is not positive semidefinite");
    }
  }
}

Matrix schur_complement(const PartitionedSpdMatrix& m) {
  Eigen::LLT<Matrix> llt22(Matrix(m.block22()));
  if (llt22.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "block 2 is not positive definite");
  }
  const Matrix s21 = m.block21();
  Matrix out = Matrix(m.block11()) - m.block12() * llt22.solve(s21);
  return (out + out.transpose()) / 2.0;
}

Vector adjusted_mean(const Vector& xbar, const PartitionedSpdMatrix& m) {
  if (xbar.size() != m.dim()) {
    throw Error(Errc::DimMismatch, "mean vector length does not match matrix");
  }
  Eigen::LLT<Matrix> llt22(Matrix(m.block22()));
  if (llt22.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "block 2 is not positive definite");
  }
  return xbar.head(m.split()) -
         m.block12() * llt22.solve(xbar.tail(m.coSplit()));
}

Matrix pseudo_inverse(const Matrix& a) {
  const Matrix sym = require_symmetric(a);
  const auto es = eigen_of(sym);
  const Vector& w = es.eigenvalues();
  const double lmax = std::max(w.cwiseAbs().maxCoeff(), 0.0);
  if (lmax == 0.0) return Matrix::Zero(sym.rows(), sym.cols());
  if (w.minCoeff() < -kLoewnerDefaultTol * std::max(lmax, 1.0)) {
    throw Error(Errc::NonPd, "matrix is not positive semidefinite");
  }
  const double cutoff = rank_cutoff(w);
  Vector winv = Vector::Zero(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] > cutoff) winv[i] = 1.0 / w[i];
  }
  Matrix out = es.eigenvectors() * winv.asDiagonal() *
               es.eigenvectors().transpose();
  return (out + out.transpose()) / 2.0;
}

Index symmetric_rank(const Matrix& a) {
  const Matrix sym = require_symmetric(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "eigendecomposition failed to converge");
  }
  const Vector& w = es.eigenvalues();
  if (w.cwiseAbs().maxCoeff() == 0.0) return 0;
  const double cutoff = rank_cutoff(w);
  Index r = 0;
  for (Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > cutoff) ++r;
  }
  return r;
}

Matrix adjusted_precision(const PartitionedSpdMatrix& m) {
  const Index p1 = m.split(), p2 = m.coSplit();
  Eigen::LLT<Matrix> llt22(Matrix(m.block22()));
  if (llt22.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "block 2 is not positive definite");
  }
  Matrix c(m.dim(), p1);
  c.topRows(p1) = Matrix::Identity(p1, p1);
  c.bottomRows(p2) = -llt22.solve(Matrix(m.block21()));
  Eigen::LLT<Matrix> llt_schur(schur_complement(m));
  if (llt_schur.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "adjusted block-1 covariance not p.d.");
  }
  Matrix out = c * llt_schur.solve(c.transpose());
  return (out + out.transpose()) / 2.0;
}

Matrix adjusted_precision_from_inverse(const PartitionedSpdMatrix& m) {
  Eigen::LLT<Matrix> llt(m.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "matrix is not positive definite");
  }
  Matrix out = llt.solve(Matrix::Identity(m.dim(), m.dim()));
  Eigen::LLT<Matrix> llt22(Matrix(m.block22()));
  if (llt22.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "block 2 is not positive definite");
  }
  out.bottomRightCorner(m.coSplit(), m.coSplit()) -=
      llt22.solve(Matrix::Identity(m.coSplit(), m.coSplit()));
  return (out + out.transpose()) / 2.0;
}

Matrix adjusted_precision_pinv(const PartitionedSpdMatrix& m) {
  const Index p1 = m.split(), p2 = m.coSplit();
  Eigen::LLT<Matrix> llt22(Matrix(m.block22()));
  if (llt22.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "block 2 is not positive definite");
  }
  Matrix c(m.dim(), p1);
  c.topRows(p1) = Matrix::Identity(p1, p1);
  c.bottomRows(p2) = -llt22.solve(Matrix(m.block21()));
  const Matrix ctc = c.transpose() * c;  // I + (S22^-1 S21)'(S22^-1 S21)
  Eigen::LLT<Matrix> llt_ctc(ctc);
  const Matrix mid = llt_ctc.solve(
      Matrix(llt_ctc.solve(schur_complement(m)).transpose()));
  Matrix out = c * mid * c.transpose();
  return (out + out.transpose()) / 2.0;
}

double spectral_norm(const Matrix& a) {
  const Matrix sym = (a + a.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "eigendecomposition failed to converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LoewnerReport loewner_compare(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw Error(Errc::DimMismatch, "comparands must be square and same size");
  }
  Matrix diff = a - b;
  diff = (diff + diff.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::NonPd, "eigendecomposition failed to converge");
  }
  LoewnerReport rep;
  rep.min_eig = es.eigenvalues().minCoeff();
  rep.scale = spectral_norm(a) + spectral_norm(b);
  rep.tol = tol;
  rep.verdict = rep.min_eig >= -tol * std::max(rep.scale, 1.0)
                    ? LoewnerVerdict::Psd
                    : LoewnerVerdict::NotPsd;
  return rep;
}

SimDiagResult simultaneous_diagonalize(const Matrix& a1, const Matrix& a2) {
  const Matrix s1 = require_symmetric(a1);
  const Matrix s2 = require_symmetric(a2);
  if (s1.rows() != s2.rows()) {
    throw Error(Errc::DimMismatch, "inputs must have equal dimensions");
  }
  const Index p = s1.rows();
  const Index r1 = symmetric_rank(s1);
  const Index r2 = symmetric_rank(s2);
  if (r1 != r2) {
    throw Error(Errc::RankMismatch,
                "ranks differ: " + std::to_string(r1) + " vs " +
                    std::to_string(r2));
  }
  const Index r = r1;

  SimDiagResult res;
  if (r == 0) {
    res.g = Matrix::Identity(p, p);
    res.d = Vector::Zero(0);
    res.rank = 0;
    return res;
  }

  auto es1 = eigen_of(s1);
  // Reorder eigenpairs descending so the range basis comes first.
  Matrix v(p, p);
  Vector w(p);
  for (Index i = 0; i < p; ++i) {
    v.col(i) = es1.eigenvectors().col(p - 1 - i);
    w[i] = es1.eigenvalues()[p - 1 - i];
  }
  if (w[r - 1] <= 0.0) {
    throw Error(Errc::NonPd, "first input is not positive semidefinite");
  }

  // Column-space agreement: the projector onto range(a1) must reproduce a2.
  const Matrix vr = v.leftCols(r);
  const Matrix proj = vr * vr.transpose();
  const double s2norm = std::max(spectral_norm(s2), 1e-300);
  if ((proj * s2 - s2).cwiseAbs().maxCoeff() > 1e-8 * s2norm) {
    throw Error(Errc::RangeMismatch, "inputs do not share a column space");
  }

  // f puts a1 in the form f * diag(I_r, 0) * f'.
  Matrix f(p, p);
  f.leftCols(r) = vr * w.head(r).cwiseSqrt().asDiagonal();
  f.rightCols(p - r) = v.rightCols(p - r);

  const Matrix finv = f.inverse();
  const Matrix astar = finv * s2 * finv.transpose();
  Matrix blk = astar.topLeftCorner(r, r);
  blk = (blk + blk.transpose()) / 2.0;
  auto es_blk = eigen_of(blk);

  Matrix c = Matrix::Identity(p, p);
  Vector d(r);
  for (Index i = 0; i < r; ++i) {
    c.col(i).head(r) = es_blk.eigenvectors().col(r - 1 - i);
    d[i] = es_blk.eigenvalues()[r - 1 - i];
  }

  res.g = f * c;
  res.d = d;
  res.rank = r;
  return res;
}

double pinv_quadratic_form(const Vector& x, const Matrix& a) {
  if (x.size() != a.rows()) {
    throw Error(Errc::DimMismatch, "vector length does not match matrix");
  }
  const double q = x.dot(pseudo_inverse(a) * x);
  return q < 0.0 ? 0.0 : q;
}

}  // namespace invartest
