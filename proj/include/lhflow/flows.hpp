#pragma once

#include <string>
#include <variant>
#include <vector>

#include "lhflow/homotopy.hpp"

namespace lhflow {

/// Minimum-kinetic-energy flow: the symmetric Jacobian solving the Lyapunov
/// constraint.
struct Potential {};

/// Classical closed-form exact flow v = A(lambda) x + b(lambda).
struct Exact {};

/// Potential flow plus the solenoidal term alpha * J * grad log p.
struct Rotational {
  /// Throws InvalidArgument unless generator + generator^T == 0 exactly.
  Rotational(double alpha, Matrix generator);
  /// Uses default_generator(d).
  Rotational(double alpha, Eigen::Index d);

  double alpha;
  Matrix generator;
};

using FlowKind = std::variant<Potential, Exact, Rotational>;

/// Elementary antisymmetric matrix with +1 at (0,1) and -1 at (1,0); the 90°
/// rotation in two dimensions. Requires d >= 2.
Matrix default_generator(Eigen::Index d);

std::string flow_label(const FlowKind& kind);

/// Snapshot of an affine flow at one lambda:
///   v(x) = M (x - mu) + mu'
///   a(x) = (M' + M^2)(x - mu) + mu''
/// where a is the material derivative dv/dlambda + (v . grad) v.
struct AffineField {
  double lambda = 0.0;
  Matrix jacobian;
  Matrix jacobian_rate;
  Vector mean;
  Vector mean_rate;
  Vector mean_accel;
  Matrix covariance;
  Matrix precision;

  Vector velocity(const Vector& x) const;
  Vector acceleration(const Vector& x) const;
  /// Row-wise evaluation over an n x d position matrix.
  Matrix velocities(const Matrix& positions) const;
  Matrix accelerations(const Matrix& positions) const;
};

/// One of the λ-indexed affine velocity fields that transport the homotopy
/// density. Immutable; every query is evaluated on demand.
class AffineFlow {
 public:
  AffineFlow(HomotopyPath path, FlowKind kind);

  const HomotopyPath& path() const noexcept { return path_; }
  const FlowKind& kind() const noexcept { return kind_; }
  std::string label() const { return flow_label(kind_); }

  /// Everything needed to evaluate velocity and acceleration at lambda.
  AffineField field(double lambda) const;

  Matrix jacobian(double lambda) const;
  Matrix jacobian_rate(double lambda) const;
  Vector velocity(double lambda, const Vector& x) const;
  Vector acceleration(double lambda, const Vector& x) const;

 private:
  HomotopyPath path_;
  FlowKind kind_;
};

/// A(lambda) = -1/2 P0 H^T (lambda H P0 H^T + R)^-1 H
Matrix exact_jacobian_closed_form(const HomotopyPath& path, double lambda);
/// A(lambda) = -1/2 P(lambda) H^T R^-1 H
Matrix exact_jacobian_inversion_lemma(const HomotopyPath& path, double lambda);
/// b(lambda) = (I + 2 lambda A)[(I + lambda A) P0 H^T R^-1 z + A mu0]
Vector exact_flow_offset(const HomotopyPath& path, double lambda);
/// A(lambda) x + b(lambda)
Vector exact_velocity_affine(const HomotopyPath& path, double lambda, const Vector& x);

/// Max Euclidean norm of the acceleration over the points. Throws
/// EmptyPointSet.
double stiffness_metric(const AffineFlow& flow, double lambda, const std::vector<Vector>& points);
/// Same, over the rows of an n x d matrix.
double stiffness_metric(const AffineFlow& flow, double lambda, const Matrix& positions);
double stiffness_metric(const AffineField& field, const Matrix& positions);

}  // namespace lhflow
