#include "lhflow/homotopy.hpp"

#include <cmath>
#include <string>

namespace lhflow {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::LambdaOutOfRange, "lambda=" + std::to_string(lambda) + " not in [0,1]");
  }
}

LinearMeasurement::LinearMeasurement(Matrix h, SpdMatrix r, Vector z)
    : h_matrix(std::move(h)), noise_cov(std::move(r)), observation(std::move(z)) {
  if (!h_matrix.allFinite()) throw Error(ErrorCode::InvalidArgument, "h_matrix has non-finite entries");
  if (!observation.allFinite()) throw Error(ErrorCode::InvalidArgument, "observation has non-finite entries");
  if (h_matrix.rows() != noise_cov.dim() || observation.size() != noise_cov.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement dimensions disagree: H is " +
                                                  std::to_string(h_matrix.rows()) + "x" +
                                                  std::to_string(h_matrix.cols()) + ", R is " +
                                                  std::to_string(noise_cov.dim()) + ", z has " +
                                                  std::to_string(observation.size()));
  }
}

HomotopyPath::HomotopyPath(Gaussian prior, LinearMeasurement measurement)
    : prior_(std::move(prior)),
      measurement_(std::move(measurement)),
      prior_precision_(spd_inverse(prior_.cov)) {
  if (measurement_.state_dim() != prior_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "H has " + std::to_string(measurement_.state_dim()) +
                                                  " columns but the state dimension is " +
                                                  std::to_string(prior_.dim()));
  }
  noise_precision_ = spd_inverse(measurement_.noise_cov).matrix();
  const Matrix& h = measurement_.h_matrix;
  const Matrix inc = h.transpose() * noise_precision_ * h;
  info_increment_ = 0.5 * (inc + inc.transpose());
  info_vector_ = h.transpose() * (noise_precision_ * measurement_.observation);
}

SpdMatrix HomotopyPath::precision(double lambda) const {
  check_lambda(lambda);
  return SpdMatrix(prior_precision_.matrix() + lambda * info_increment_);
}

Gaussian HomotopyPath::moments(double lambda) const {
  if (lambda == 0.0) return prior_;
  const SpdMatrix prec = precision(lambda);
  SpdMatrix cov = spd_inverse(prec);
  Vector mean = prec.cholesky().solve(prior_precision_.matrix() * prior_.mean + lambda * info_vector_);
  return Gaussian(std::move(mean), std::move(cov));
}

MeanDerivatives HomotopyPath::mean_derivatives(double lambda) const {
  // dP/dlambda = -P Q P with Q = H^T R^-1 H, hence
  //   mu'  = P (H^T R^-1 z - Q mu)
  //   mu'' = -2 P Q mu'
  const Gaussian g = moments(lambda);
  const Matrix& p = g.cov.matrix();
  Vector first = p * (info_vector_ - info_increment_ * g.mean);
  Vector second = -2.0 * (p * (info_increment_ * first));
  return {std::move(first), std::move(second)};
}

double HomotopyPath::centered_log_likelihood(double lambda, const Vector& x) const {
  const Gaussian g = moments(lambda);
  const Matrix& h = measurement_.h_matrix;
  const Vector& z = measurement_.observation;
  const Vector rx = z - h * x;
  const Vector rm = z - h * g.mean;
  const double trace_term = (noise_precision_ * h * g.cov.matrix() * h.transpose()).trace();
  return -0.5 * rx.dot(noise_precision_ * rx) + 0.5 * (rm.dot(noise_precision_ * rm) + trace_term);
}

Vector log_density_gradient(const HomotopyPath& path, double lambda, const Vector& x) {
  check_lambda(lambda);
  const Gaussian g = path.moments(lambda);
  return -g.cov.cholesky().solve(x - g.mean);
}

}  // namespace lhflow
