#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lhflow/flows.hpp"

namespace lhflow {

inline constexpr std::size_t kDefaultQuadratureNodes = 64;

struct EnergySample {
  double lambda = 0.0;
  double energy = 0.0;

  friend bool operator==(const EnergySample&, const EnergySample&) = default;
};

struct ActionReport {
  std::string flow_label;
  double total_action = 0.0;
  /// Sorted by lambda; quadrature nodes plus both endpoints.
  std::vector<EnergySample> energy_samples;
  std::size_t quadrature_nodes = 0;

  friend bool operator==(const ActionReport&, const ActionReport&) = default;
};

/// Composite Gauss-Legendre rule on [0, 1]: ceil(nodes / 16) equal panels of
/// the 16-point rule, so the actual node count is rounded up to a multiple
/// of 16. Returns (lambda, weight) pairs sorted by lambda. Requires
/// nodes >= 8.
std::vector<std::pair<double, double>> composite_gauss_legendre(std::size_t nodes);

/// E(lambda) = 1/2 [tr(M^T M P) + |mu'|^2], the expected kinetic energy
/// E_p[|v|^2 / 2] of the affine field under p(., lambda).
double kinetic_energy(const AffineField& field);
double kinetic_energy(const AffineFlow& flow, double lambda);

/// Integral of E over [0, 1]. Requires quadrature_nodes >= 8.
ActionReport total_action(const AffineFlow& flow, std::size_t quadrature_nodes = kDefaultQuadratureNodes);

/// c = 1/2 * integral of tr(P(lambda)^-1) over [0, 1]; the action of the
/// rotational flow is S* + c alpha^2.
double action_decomposition_constant(const HomotopyPath& path,
                                     std::size_t quadrature_nodes = kDefaultQuadratureNodes);

/// Signed residual of the master equation
///   -div(p v) / p - (log h - E_p[log h])
/// at x. For an affine field div(p v)/p = tr(M) + v . grad log p.
double master_equation_residual(const AffineField& field, const HomotopyPath& path, const Vector& x);
double master_equation_residual(const AffineFlow& flow, double lambda, const Vector& x);

/// Norm of [central difference of v along the particle trajectory through
/// (x, lambda)] - [analytic acceleration at (x, lambda)]. The trajectory
/// positions at lambda +- fd_step come from RK4 substeps of the flow ODE.
///
/// Only the gradient form of the Hamilton-Jacobi dynamics is checked; the
/// scalar form involves the multiplier psi, which is fixed only up to an
/// additive function of lambda.
///
/// Requires 0 < fd_step <= 1e-3 and lambda +- fd_step inside [0, 1].
double euler_residual(const AffineFlow& flow, double lambda, const Vector& x, double fd_step);

}  // namespace lhflow
