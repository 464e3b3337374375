#include "lhflow/gauss_core.hpp"

#include <random>
#include <string>

namespace lhflow {

namespace {

constexpr double kRhsSymmetryTolerance = 1e-10;

}  // namespace

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= tol * scale;
}

SpdMatrix::SpdMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "SPD matrix must be square and non-empty, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "matrix has non-finite entries");
  if (!is_symmetric(m)) throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
  data_ = 0.5 * (m + m.transpose());
  llt_.compute(data_);
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  }
}

Gaussian::Gaussian(Vector mean_in, SpdMatrix cov_in) : mean(std::move(mean_in)), cov(std::move(cov_in)) {
  if (mean.size() != cov.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "mean length " + std::to_string(mean.size()) +
                                                  " does not match covariance dimension " +
                                                  std::to_string(cov.dim()));
  }
}

SpdMatrix spd_inverse(const SpdMatrix& m) {
  const Eigen::Index d = m.dim();
  Matrix inv = m.cholesky().solve(Matrix::Identity(d, d));
  return SpdMatrix(0.5 * (inv + inv.transpose()));
}

std::vector<Vector> cholesky_sample(const Gaussian& g, std::size_t n, std::uint64_t seed) {
  std::vector<Vector> out;
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix lower = g.cov.cholesky().matrixL();
  Vector xi(g.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = normal(rng);
    out.emplace_back(g.mean + lower * xi);
  }
  return out;
}

Matrix solve_lyapunov(const SpdMatrix& a, const Matrix& q) {
  const Eigen::Index d = a.dim();
  if (q.rows() != d || q.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Lyapunov right-hand side has wrong shape");
  }
  if (!is_symmetric(q, kRhsSymmetryTolerance)) {
    throw Error(ErrorCode::NotSymmetric, "Lyapunov right-hand side is not symmetric");
  }
  const Matrix& am = a.matrix();

  // Upper-triangular coordinates (i <= j), row-major.
  const Eigen::Index n = d * (d + 1) / 2;
  auto index = [d](Eigen::Index i, Eigen::Index j) { return i * d - i * (i - 1) / 2 + (j - i); };

  // Column for basis element E_ij (symmetric unit) is the upper triangle of
  // a*E_ij + E_ij*a. For i != j, E_ij = e_i e_j^T + e_j e_i^T.
  Matrix op = Matrix::Zero(n, n);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const Eigen::Index col = index(i, j);
      rhs[col] = -0.5 * (q(i, j) + q(j, i));
      for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = k; l < d; ++l) {
          // (a E)_{kl} = a_{ki} [l==j] + a_{kj} [l==i] (second term only off-diagonal)
          // (E a)_{kl} = [k==i] a_{jl} + [k==j] a_{il}
          double v = 0.0;
          if (l == j) v += am(k, i);
          if (k == i) v += am(j, l);
          if (i != j) {
            if (l == i) v += am(k, j);
            if (k == j) v += am(i, l);
          }
          op(index(k, l), col) = v;
        }
      }
    }
  }

  const Vector sol = op.partialPivLu().solve(rhs);
  Matrix s(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      s(i, j) = sol[index(i, j)];
      s(j, i) = s(i, j);
    }
  }
  return s;
}

}  // namespace lhflow
