#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lhflow/error.hpp"

namespace lhflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative Frobenius tolerance used to accept a matrix as symmetric.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Symmetric positive-definite matrix. Construction validates symmetry and
/// runs a Cholesky factorization; a failed factorization is the only
/// criterion for "not positive definite".
class SpdMatrix {
 public:
  /// Throws NotSymmetric or NotPositiveDefinite. The stored matrix is the
  /// exact symmetrization (m + m^T)/2 of the input.
  explicit SpdMatrix(const Matrix& m);

  static SpdMatrix identity(Eigen::Index d) { return SpdMatrix(Matrix::Identity(d, d)); }

  const Matrix& matrix() const noexcept { return data_; }
  const Eigen::LLT<Matrix>& cholesky() const noexcept { return llt_; }
  Eigen::Index dim() const noexcept { return data_.rows(); }

 private:
  Matrix data_;
  Eigen::LLT<Matrix> llt_;
};

/// Multivariate normal N(mean, cov).
struct Gaussian {
  Gaussian(Vector mean, SpdMatrix cov);

  Eigen::Index dim() const noexcept { return mean.size(); }

  Vector mean;
  SpdMatrix cov;
};

/// True when ||m - m^T||_F <= tol * max(1, ||m||_F).
bool is_symmetric(const Matrix& m, double tol = kSymmetryTolerance);

SpdMatrix spd_inverse(const SpdMatrix& m);

/// Draws n samples x = mean + L*xi with L the Cholesky factor of cov and xi
/// standard normal. The stream is a 64-bit Mersenne twister seeded with
/// `seed`, so the output is fully determined by (g, n, seed). n == 0 yields
/// an empty list.
std::vector<Vector> cholesky_sample(const Gaussian& g, std::size_t n, std::uint64_t seed);

/// Unique symmetric S with a*S + S*a = -q.
///
/// The Lyapunov operator X -> aX + Xa maps symmetric matrices onto symmetric
/// matrices and is invertible there when a is positive definite. The solver
/// assembles that operator on the d(d+1)/2 upper-triangular coordinates and
/// solves the resulting dense system by partially pivoted LU. The returned
/// matrix is exactly symmetric.
///
/// Throws NotSymmetric when q deviates from symmetry by more than 1e-10
/// (relative Frobenius), DimensionMismatch on size disagreement.
Matrix solve_lyapunov(const SpdMatrix& a, const Matrix& q);

}  // namespace lhflow
