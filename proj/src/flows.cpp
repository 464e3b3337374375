#include "lhflow/flows.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace lhflow {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

Rotational::Rotational(double a, Matrix j) : alpha(a), generator(std::move(j)) {
  if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "rotation strength must be finite");
  if (generator.rows() != generator.cols()) {
    throw Error(ErrorCode::InvalidArgument, "rotation generator must be square");
  }
  if (!(generator + generator.transpose()).isZero(0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rotation generator must be antisymmetric");
  }
}

Rotational::Rotational(double a, Eigen::Index d) : Rotational(a, default_generator(d)) {}

Matrix default_generator(Eigen::Index d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "default rotation generator needs d >= 2");
  Matrix j = Matrix::Zero(d, d);
  j(0, 1) = 1.0;
  j(1, 0) = -1.0;
  return j;
}

std::string flow_label(const FlowKind& kind) {
  return std::visit(Overloaded{
                        [](const Potential&) { return std::string("potential"); },
                        [](const Exact&) { return std::string("exact"); },
                        [](const Rotational& r) { return "rotational_a" + shortest(r.alpha); },
                    },
                    kind);
}

Vector AffineField::velocity(const Vector& x) const { return jacobian * (x - mean) + mean_rate; }

Vector AffineField::acceleration(const Vector& x) const {
  return (jacobian_rate + jacobian * jacobian) * (x - mean) + mean_accel;
}

Matrix AffineField::velocities(const Matrix& positions) const {
  Matrix out = (positions.rowwise() - mean.transpose()) * jacobian.transpose();
  out.rowwise() += mean_rate.transpose();
  return out;
}

Matrix AffineField::accelerations(const Matrix& positions) const {
  const Matrix k = jacobian_rate + jacobian * jacobian;
  Matrix out = (positions.rowwise() - mean.transpose()) * k.transpose();
  out.rowwise() += mean_accel.transpose();
  return out;
}

AffineFlow::AffineFlow(HomotopyPath path, FlowKind kind) : path_(std::move(path)), kind_(std::move(kind)) {
  if (const auto* rot = std::get_if<Rotational>(&kind_); rot && rot->generator.rows() != path_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "rotation generator dimension does not match the state");
  }
}

AffineField AffineFlow::field(double lambda) const {
  check_lambda(lambda);
  const SpdMatrix prec = path_.precision(lambda);
  const Gaussian g = path_.moments(lambda);
  const MeanDerivatives md = path_.mean_derivatives(lambda);
  const Matrix& q = path_.information_increment();

  AffineField f;
  f.lambda = lambda;
  f.mean = g.mean;
  f.mean_rate = md.first;
  f.mean_accel = md.second;
  f.covariance = g.cov.matrix();
  f.precision = prec.matrix();

  auto potential = [&] {
    f.jacobian = solve_lyapunov(prec, q);
    // Differentiating P^-1 S + S P^-1 = -Q with d(P^-1)/dlambda = Q.
    const Matrix qs = q * f.jacobian;
    f.jacobian_rate = solve_lyapunov(prec, qs + qs.transpose());
  };

  std::visit(Overloaded{
                 [&](const Potential&) { potential(); },
                 [&](const Exact&) {
                   f.jacobian = -0.5 * f.covariance * q;
                   // A' = -1/2 P' Q with P' = -P Q P.
                   f.jacobian_rate = 0.5 * f.covariance * q * f.covariance * q;
                 },
                 [&](const Rotational& r) {
                   potential();
                   f.jacobian -= r.alpha * r.generator * f.precision;
                   f.jacobian_rate -= r.alpha * r.generator * q;
                 },
             },
             kind_);
  return f;
}

Matrix AffineFlow::jacobian(double lambda) const { return field(lambda).jacobian; }
Matrix AffineFlow::jacobian_rate(double lambda) const { return field(lambda).jacobian_rate; }
Vector AffineFlow::velocity(double lambda, const Vector& x) const { return field(lambda).velocity(x); }
Vector AffineFlow::acceleration(double lambda, const Vector& x) const {
  return field(lambda).acceleration(x);
}

Matrix exact_jacobian_closed_form(const HomotopyPath& path, double lambda) {
  check_lambda(lambda);
  const Matrix& h = path.measurement().h_matrix;
  const Matrix& p0 = path.prior().cov.matrix();
  const Matrix inner = lambda * h * p0 * h.transpose() + path.measurement().noise_cov.matrix();
  return -0.5 * p0 * h.transpose() * inner.llt().solve(h);
}

Matrix exact_jacobian_inversion_lemma(const HomotopyPath& path, double lambda) {
  return -0.5 * path.moments(lambda).cov.matrix() * path.information_increment();
}

Vector exact_flow_offset(const HomotopyPath& path, double lambda) {
  const Matrix a = exact_jacobian_closed_form(path, lambda);
  const Eigen::Index d = path.dim();
  const Matrix eye = Matrix::Identity(d, d);
  const Vector gain_term = (eye + lambda * a) * path.prior().cov.matrix() * path.information_vector();
  return (eye + 2.0 * lambda * a) * (gain_term + a * path.prior().mean);
}

Vector exact_velocity_affine(const HomotopyPath& path, double lambda, const Vector& x) {
  return exact_jacobian_closed_form(path, lambda) * x + exact_flow_offset(path, lambda);
}

double stiffness_metric(const AffineField& field, const Matrix& positions) {
  if (positions.rows() == 0) throw Error(ErrorCode::EmptyPointSet, "stiffness metric needs points");
  return field.accelerations(positions).rowwise().norm().maxCoeff();
}

double stiffness_metric(const AffineFlow& flow, double lambda, const Matrix& positions) {
  if (positions.rows() == 0) throw Error(ErrorCode::EmptyPointSet, "stiffness metric needs points");
  return stiffness_metric(flow.field(lambda), positions);
}

double stiffness_metric(const AffineFlow& flow, double lambda, const std::vector<Vector>& points) {
  if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "stiffness metric needs points");
  Matrix positions(static_cast<Eigen::Index>(points.size()), flow.path().dim());
  for (std::size_t i = 0; i < points.size(); ++i) positions.row(static_cast<Eigen::Index>(i)) = points[i];
  return stiffness_metric(flow, lambda, positions);
}

}  // namespace lhflow
