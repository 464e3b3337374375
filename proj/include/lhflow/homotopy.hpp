#pragma once

#include "lhflow/gauss_core.hpp"

namespace lhflow {

/// Linear-Gaussian likelihood z = H x + eps, eps ~ N(0, R).
struct LinearMeasurement {
  LinearMeasurement(Matrix h_matrix, SpdMatrix noise_cov, Vector observation);

  Eigen::Index state_dim() const noexcept { return h_matrix.cols(); }
  Eigen::Index obs_dim() const noexcept { return h_matrix.rows(); }

  Matrix h_matrix;
  SpdMatrix noise_cov;
  Vector observation;
};

struct MeanDerivatives {
  Vector first;
  Vector second;
};

/// Gaussian path p(x, lambda) ∝ g(x) h(x)^lambda between prior (lambda = 0)
/// and posterior (lambda = 1), held in information form:
///
///   P(lambda)^-1 = P0^-1 + lambda H^T R^-1 H
///   mu(lambda)   = P(lambda) (P0^-1 mu0 + lambda H^T R^-1 z)
///
/// The normalizer of the path is never formed. Everything exposed here (and
/// everything built on top of it) depends only on moments and on centered
/// log-likelihood values, in which it cancels.
class HomotopyPath {
 public:
  HomotopyPath(Gaussian prior, LinearMeasurement measurement);

  const Gaussian& prior() const noexcept { return prior_; }
  const LinearMeasurement& measurement() const noexcept { return measurement_; }
  Eigen::Index dim() const noexcept { return prior_.dim(); }

  const Matrix& prior_precision() const noexcept { return prior_precision_.matrix(); }
  /// H^T R^-1 H (positive semi-definite, stored as a plain symmetric matrix).
  const Matrix& information_increment() const noexcept { return info_increment_; }
  /// H^T R^-1 z
  const Vector& information_vector() const noexcept { return info_vector_; }

  /// P(lambda)^-1. Throws LambdaOutOfRange.
  SpdMatrix precision(double lambda) const;
  Gaussian moments(double lambda) const;
  MeanDerivatives mean_derivatives(double lambda) const;

  /// log h(x) - E_p[log h] under p(., lambda).
  double centered_log_likelihood(double lambda, const Vector& x) const;

 private:
  Gaussian prior_;
  LinearMeasurement measurement_;
  SpdMatrix prior_precision_;
  Matrix info_increment_;
  Vector info_vector_;
  Matrix noise_precision_;
};

/// Throws LambdaOutOfRange unless 0 <= lambda <= 1.
void check_lambda(double lambda);

/// Gaussian score -P(lambda)^-1 (x - mu(lambda)).
Vector log_density_gradient(const HomotopyPath& path, double lambda, const Vector& x);

}  // namespace lhflow
