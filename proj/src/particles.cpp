#include "lhflow/particles.hpp"

#include <cmath>
#include <string>

namespace lhflow {

namespace {

constexpr double kLandingSlack = 1e-12;

double step_from_stiffness(double stiffness, double tolerance, double min_step, double max_step,
                           double lambda) {
  if (stiffness <= 0.0) return max_step;
  const double h = std::sqrt(2.0 * tolerance / stiffness);
  if (h < min_step) {
    throw NumericalError(ErrorCode::StepBoundViolation, lambda,
                         "adaptive step " + std::to_string(h) + " below minimum " + std::to_string(min_step));
  }
  return std::min(h, max_step);
}

int record_interval(const IntegratorSpec& spec, Eigen::Index n) {
  if (spec.record_every != 0) return spec.record_every;
  return n <= 100 ? 1 : 10;
}

Matrix rk4_step(const AffineFlow& flow, double lambda, double h, const Matrix& x) {
  const Matrix k1 = flow.field(lambda).velocities(x);
  const AffineField mid = flow.field(lambda + 0.5 * h);
  const Matrix k2 = mid.velocities(x + 0.5 * h * k1);
  const Matrix k3 = mid.velocities(x + 0.5 * h * k2);
  const Matrix k4 = flow.field(lambda + h).velocities(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::string_view to_string(IntegratorMethod method) {
  switch (method) {
    case IntegratorMethod::Euler: return "euler";
    case IntegratorMethod::RK4: return "rk4";
    case IntegratorMethod::Verlet: return "verlet";
    case IntegratorMethod::AdaptiveEuler: return "adaptive_euler";
  }
  return "unknown";
}

IntegratorMethod parse_integrator_method(std::string_view name) {
  for (auto m : {IntegratorMethod::Euler, IntegratorMethod::RK4, IntegratorMethod::Verlet,
                 IntegratorMethod::AdaptiveEuler}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown integrator method '" + std::string(name) + "'");
}

void IntegratorSpec::validate() const {
  if (method == IntegratorMethod::AdaptiveEuler) {
    if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    if (!(min_step > 0.0 && min_step <= max_step)) {
      throw Error(ErrorCode::InvalidArgument, "step bounds must satisfy 0 < min_step <= max_step");
    }
  } else if (!(step_size > 0.0 && step_size <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "step_size must lie in (0, 1]");
  }
}

ParticleEnsemble ParticleEnsemble::sample(const Gaussian& g, std::size_t n, std::uint64_t seed) {
  const auto draws = cholesky_sample(g, n, seed);
  ParticleEnsemble e;
  e.seed = seed;
  e.positions.resize(static_cast<Eigen::Index>(n), g.dim());
  for (std::size_t i = 0; i < n; ++i) e.positions.row(static_cast<Eigen::Index>(i)) = draws[i];
  return e;
}

double adaptive_step_controller(const AffineFlow& flow, double lambda, const Matrix& positions,
                                double tolerance, double min_step, double max_step) {
  if (!(tolerance > 0.0) || !(min_step <= max_step)) {
    throw Error(ErrorCode::InvalidArgument, "adaptive controller needs tolerance > 0 and min <= max");
  }
  return step_from_stiffness(stiffness_metric(flow, lambda, positions), tolerance, min_step, max_step, lambda);
}

ParticleEnsemble integrate(const AffineFlow& flow, const ParticleEnsemble& initial, const IntegratorSpec& spec) {
  spec.validate();
  if (initial.size() < 1) throw Error(ErrorCode::InvalidArgument, "ensemble is empty");
  if (initial.dim() != flow.path().dim()) {
    throw Error(ErrorCode::DimensionMismatch, "ensemble dimension does not match the flow");
  }
  if (!initial.positions.allFinite()) {
    throw NumericalError(ErrorCode::NonFiniteState, 0.0, "initial positions are not finite");
  }

  ParticleEnsemble out;
  out.seed = initial.seed;
  out.positions = initial.positions;
  const int every = record_interval(spec, initial.size());
  const bool recording = every > 0;
  if (recording) out.trajectory.push_back({0.0, out.positions});

  double lambda = 0.0;
  long step = 0;
  while (lambda < 1.0) {
    double h = 0.0;
    double next = 0.0;
    double stiffness = 0.0;
    Matrix& x = out.positions;

    if (spec.method == IntegratorMethod::AdaptiveEuler) {
      const AffineField f = flow.field(lambda);
      stiffness = stiffness_metric(f, x);
      h = step_from_stiffness(stiffness, spec.tolerance, spec.min_step, spec.max_step, lambda);
      next = lambda + h >= 1.0 - kLandingSlack ? 1.0 : lambda + h;
      h = next - lambda;
      x += h * f.velocities(x);
    } else {
      // Grid points k*h avoid drift from repeated addition.
      next = static_cast<double>(step + 1) * spec.step_size;
      if (next >= 1.0 - kLandingSlack) next = 1.0;
      h = next - lambda;
      switch (spec.method) {
        case IntegratorMethod::Euler:
          x += h * flow.field(lambda).velocities(x);
          break;
        case IntegratorMethod::Verlet: {
          const AffineField f = flow.field(lambda);
          x += h * f.velocities(x) + (0.5 * h * h) * f.accelerations(x);
          break;
        }
        case IntegratorMethod::RK4:
          x = rk4_step(flow, lambda, h, x);
          break;
        case IntegratorMethod::AdaptiveEuler:
          break;
      }
    }

    ++step;
    lambda = next;
    if (!x.allFinite()) throw NumericalError(ErrorCode::NonFiniteState, lambda, "particle state diverged");
    out.step_log.push_back({lambda, h, stiffness});
    if (recording && (step % every == 0 || lambda == 1.0)) out.trajectory.push_back({lambda, x});
  }
  return out;
}

SampleMoments empirical_moments(const Matrix& positions) {
  const Eigen::Index n = positions.rows();
  if (n < 2) throw Error(ErrorCode::TooFewParticles, "need at least two particles, got " + std::to_string(n));
  SampleMoments m;
  m.mean = positions.colwise().mean().transpose();
  const Matrix centered = positions.rowwise() - m.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  m.cov = 0.5 * (cov + cov.transpose());
  return m;
}

SampleMoments empirical_moments(const ParticleEnsemble& ensemble) { return empirical_moments(ensemble.positions); }

double mean_path_length(const ParticleEnsemble& ensemble) {
  if (ensemble.trajectory.size() < 2 || ensemble.size() == 0) return 0.0;
  Vector total = Vector::Zero(ensemble.size());
  for (std::size_t k = 1; k < ensemble.trajectory.size(); ++k) {
    total += (ensemble.trajectory[k].positions - ensemble.trajectory[k - 1].positions).rowwise().norm();
  }
  return total.mean();
}

}  // namespace lhflow
