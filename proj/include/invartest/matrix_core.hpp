#ifndef INVARTEST_MATRIX_CORE_HPP
#define INVARTEST_MATRIX_CORE_HPP

#include <Eigen/Dense>

#include "invartest/error.hpp"

namespace invartest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A symmetric positive-(semi)definite matrix with a declared 2x2 block
// partition: the leading split x split block is "block 1", the trailing
// (dim-split) x (dim-split) block is "block 2".  Construction symmetrizes and
// validates; values are immutable afterwards and safe to share across threads.
class PartitionedSpdMatrix {
 public:
  enum class Definiteness { PositiveDefinite, PositiveSemiDefinite };

  // Throws DIM for a bad split, NOT_SYMMETRIC for asymmetry beyond
  // 1e-12 * max|entry|, NON_PD when the definiteness requirement fails.
  PartitionedSpdMatrix(Matrix entries, Index split,
                       Definiteness req = Definiteness::PositiveDefinite);

  Index dim() const { return m_.rows(); }
  Index split() const { return split_; }        // p1
  Index coSplit() const { return m_.rows() - split_; }  // p2

  const Matrix& matrix() const { return m_; }

  Eigen::Block<const Matrix> block11() const {
    return m_.topLeftCorner(split_, split_);
  }
  Eigen::Block<const Matrix> block12() const {
    return m_.topRightCorner(split_, coSplit());
  }
  Eigen::Block<const Matrix> block21() const {
    return m_.bottomLeftCorner(coSplit(), split_);
  }
  Eigen::Block<const Matrix> block22() const {
    return m_.bottomRightCorner(coSplit(), coSplit());
  }

  // Cholesky-based check with an eigenvalue fallback for borderline inputs.
  static bool is_positive_definite(const Matrix& a);

 private:
  Matrix m_;
  Index split_;
};

enum class LoewnerVerdict { Psd, NotPsd };

// Outcome of an ordering check between two symmetric matrices: a - b is
// declared p.s.d. when the smallest eigenvalue of the symmetrized difference
// clears -tol * max(scale, 1), with scale the sum of the two spectral norms.
struct LoewnerReport {
  double min_eig = 0.0;
  double scale = 0.0;
  double tol = 0.0;
  LoewnerVerdict verdict = LoewnerVerdict::NotPsd;
};

// Joint congruence factorization of two p.s.d. matrices of equal rank and
// equal column space: a1 = g * diag(I_r, 0) * g', a2 = g * diag(d, 0) * g'.
struct SimDiagResult {
  Matrix g;
  Vector d;    // nonzero eigenvalues of a2 * pinv(a1), descending
  Index rank = 0;
};

// ---- partitioned algebra -------------------------------------------------

// Block-1 covariance with block 2 regressed out: S11 - S12 S22^-1 S21.
Matrix schur_complement(const PartitionedSpdMatrix& m);

// Regression-adjusted first block of a mean vector: x1 - S12 S22^-1 x2.
Vector adjusted_mean(const Vector& xbar, const PartitionedSpdMatrix& m);

// Moore-Penrose inverse of a symmetric p.s.d. matrix.  Eigenvalues below
// dim * eps * |lambda|_max are treated as exact zeros.
Matrix pseudo_inverse(const Matrix& a);

// Numerical rank at the same cutoff as pseudo_inverse.
Index symmetric_rank(const Matrix& a);

// The rank-p1 p.s.d. kernel of the covariate-adjusted quadratic form:
// x' * adjusted_precision(S) * x  ==  x_{1:2}' S_{11:2}^-1 x_{1:2}.
// Factored form [I; -S22^-1 S21] S_{11:2}^-1 [I, -S12 S22^-1].
Matrix adjusted_precision(const PartitionedSpdMatrix& m);

// Same matrix by the algebraically equivalent route S^-1 - diag(0, S22^-1).
// Kept as an independent computation path; the two agree to ~1e-10 * |S^-1|.
Matrix adjusted_precision_from_inverse(const PartitionedSpdMatrix& m);

// Moore-Penrose inverse of adjusted_precision(m), built in closed form as
// C (C'C)^-1 S_{11:2} (C'C)^-1 C' with C = [I; -S22^-1 S21].
Matrix adjusted_precision_pinv(const PartitionedSpdMatrix& m);

// Default tolerance for Loewner comparisons; chord tests downstream compound
// several inversions, so this sits well above machine epsilon.
inline constexpr double kLoewnerDefaultTol = 1e-8;

LoewnerReport loewner_compare(const Matrix& a, const Matrix& b,
                              double tol = kLoewnerDefaultTol);

// Throws RANK_MISMATCH when the numerical ranks differ and RANGE_MISMATCH
// when the projector onto range(a1) does not reproduce a2 to 1e-8 * scale.
SimDiagResult simultaneous_diagonalize(const Matrix& a1, const Matrix& a2);

// x' * pinv(a) * x; clamped to be nonnegative.
double pinv_quadratic_form(const Vector& x, const Matrix& a);

// Spectral norm of a symmetric matrix (max |eigenvalue|).
double spectral_norm(const Matrix& a);

// Symmetrize and validate symmetry to 1e-12 * max|entry|; throws
// NOT_SYMMETRIC beyond that.
Matrix require_symmetric(const Matrix& a);

}  // namespace invartest

#endif  // INVARTEST_MATRIX_CORE_HPP
