#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "lhflow/flows.hpp"

namespace lhflow {

enum class IntegratorMethod { Euler, RK4, Verlet, AdaptiveEuler };

std::string_view to_string(IntegratorMethod method);
/// Accepts "euler", "rk4", "verlet", "adaptive_euler". Throws InvalidArgument.
IntegratorMethod parse_integrator_method(std::string_view name);

struct IntegratorSpec {
  IntegratorMethod method = IntegratorMethod::RK4;
  /// Fixed step for Euler, RK4, Verlet. The last step is shortened to land
  /// exactly on lambda = 1.
  double step_size = 1e-2;
  /// Local error target of AdaptiveEuler.
  double tolerance = 1e-4;
  double min_step = 1e-7;
  double max_step = 5e-2;
  /// Snapshot interval in steps; 0 selects every step for n <= 100 and every
  /// 10th step otherwise. A negative value disables trajectory recording.
  int record_every = 0;

  /// Throws InvalidArgument.
  void validate() const;
};

struct Snapshot {
  double lambda = 0.0;
  Matrix positions;
};

struct StepRecord {
  double lambda = 0.0;
  double step_size = 0.0;
  double stiffness = 0.0;
};

struct ParticleEnsemble {
  /// n x d, one particle per row.
  Matrix positions;
  std::uint64_t seed = 0;
  /// Strictly increasing lambda from 0 to 1 after integrate().
  std::vector<Snapshot> trajectory;
  std::vector<StepRecord> step_log;

  Eigen::Index size() const noexcept { return positions.rows(); }
  Eigen::Index dim() const noexcept { return positions.cols(); }

  /// n Cholesky samples of g drawn with `seed`.
  static ParticleEnsemble sample(const Gaussian& g, std::size_t n, std::uint64_t seed);
};

/// Sample mean and unbiased covariance. The covariance is only positive
/// semi-definite in general, so it is not a validated SpdMatrix.
struct SampleMoments {
  Vector mean;
  Matrix cov;
};

/// Transports the ensemble from lambda = 0 to lambda = 1 along dx/dlambda =
/// v(x, lambda).
///
/// Verlet is the second-order Taylor step x+ = x + h v + h^2/2 a with a the
/// material acceleration of the flow. The flow is first order and
/// non-autonomous, so this is the order-2 analogue of velocity Verlet rather
/// than a symplectic map.
///
/// Throws NumericalError(NonFiniteState) on blow-up and
/// NumericalError(StepBoundViolation) when the adaptive controller cannot
/// meet the tolerance above min_step.
ParticleEnsemble integrate(const AffineFlow& flow, const ParticleEnsemble& initial, const IntegratorSpec& spec);

/// h = min(sqrt(2 tol / stiffness), max_step), which bounds the local
/// Taylor remainder h^2/2 |a| by tol. Returns max_step for zero stiffness.
/// Throws StepBoundViolation when h falls below min_step, EmptyPointSet for
/// no positions.
double adaptive_step_controller(const AffineFlow& flow, double lambda, const Matrix& positions,
                                double tolerance, double min_step, double max_step);

/// Throws TooFewParticles for n < 2.
SampleMoments empirical_moments(const ParticleEnsemble& ensemble);
SampleMoments empirical_moments(const Matrix& positions);

/// Sum of per-snapshot displacement norms, averaged over particles.
double mean_path_length(const ParticleEnsemble& ensemble);

}  // namespace lhflow
