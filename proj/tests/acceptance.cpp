// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lhflow/experiment.hpp"

namespace {

using namespace lhflow;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

HomotopyPath paper_path() { return make_path(ExperimentConfig{}); }

HomotopyPath diagonal_path() {
  ExperimentConfig c;
  c.prior_cov = (Matrix(2, 2) << 4.0, 0.0, 0.0, 2.0).finished();
  return make_path(c);
}

std::vector<FlowKind> paper_flows() { return {Potential{}, Exact{}, Rotational(2.5, 2)}; }

Outcome analytic_posterior() {
  const HomotopyPath path = paper_path();
  const Gaussian post = path.moments(1.0);
  const Matrix p = post.cov.matrix();

  // Independent Kalman-gain update.
  const Matrix p0 = path.prior().cov.matrix();
  const Matrix h = path.measurement().h_matrix;
  const Matrix r = path.measurement().noise_cov.matrix();
  const Matrix k = p0 * h.transpose() * (h * p0 * h.transpose() + r).inverse();
  const Matrix p_kalman = (Matrix::Identity(2, 2) - k * h) * p0;
  const Vector m_kalman = path.prior().mean + k * (path.measurement().observation - h * path.prior().mean);

  const double mean_err = std::max(std::abs(post.mean[0] - 2.82), std::abs(post.mean[1] - 1.06));
  const double diag_err = std::max(std::abs(p(0, 0) - 0.24), std::abs(p(1, 1) - 1.47));
  const double oracle_err = std::max((p - p_kalman).cwiseAbs().maxCoeff(), (post.mean - m_kalman).cwiseAbs().maxCoeff());
  Outcome o;
  o.pass = mean_err <= 0.005 && diag_err <= 0.005 && oracle_err <= 1e-10;
  o.detail = fmt("mean_err=%.3g", mean_err) + fmt(" diag_err=%.3g", diag_err) + fmt(" offdiag=%.6f", p(0, 1)) +
             fmt(" kalman_err=%.3g", oracle_err);
  return o;
}

Outcome action_table() {
  const HomotopyPath path = paper_path();
  const double expected[] = {31.72, 31.92, 41.23};
  Outcome o{true, ""};
  int i = 0;
  for (const FlowKind& kind : paper_flows()) {
    const AffineFlow flow(path, kind);
    const double coarse = total_action(flow, 64).total_action;
    const double fine = total_action(flow, 128).total_action;
    o.pass = o.pass && std::abs(coarse - expected[i]) <= 0.02 && std::abs(fine - coarse) < 1e-6;
    o.detail += flow.label() + fmt("=%.6f ", coarse) + fmt("(doubling %.2g) ", std::abs(fine - coarse));
    ++i;
  }
  return o;
}

Outcome residual_rotation() {
  const Matrix a = AffineFlow(paper_path(), Exact{}).jacobian(0.5);
  const double asym = (a - a.transpose()).norm();
  return {std::abs(asym - 0.47) <= 0.005, fmt("||A-A^T||_F=%.6f", asym)};
}

Outcome quadratic_law() {
  const HomotopyPath path = paper_path();
  const double c = action_decomposition_constant(path);
  const double pot = total_action(AffineFlow(path, Potential{})).total_action;
  double worst = 0.0;
  for (double alpha : {0.0, 0.5, 1.0, 2.5}) {
    const double s = total_action(AffineFlow(path, Rotational(alpha, 2))).total_action;
    const double predicted = pot + c * alpha * alpha;
    worst = std::max(worst, std::abs(s - predicted) / predicted);
  }
  return {worst < 1e-3 && std::abs(c - 1.522) <= 0.001, fmt("c=%.7f", c) + fmt(" max_rel_dev=%.3g", worst)};
}

Outcome master_equation() {
  const HomotopyPath path = paper_path();
  double worst = 0.0;
  for (const FlowKind& kind : paper_flows()) {
    const AffineFlow flow(path, kind);
    for (int k = 0; k < 20; ++k) {
      const double lambda = k / 19.0;
      const AffineField field = flow.field(lambda);
      for (const Vector& x : cholesky_sample(path.moments(lambda), 100, 1000 + k)) {
        worst = std::max(worst, std::abs(master_equation_residual(field, path, x)));
      }
    }
  }
  double corrupted = 0.0;
  const AffineFlow pot(path, Potential{});
  for (int k = 0; k < 20; ++k) {
    const double lambda = k / 19.0;
    AffineField field = pot.field(lambda);
    field.jacobian *= 1.1;
    for (const Vector& x : cholesky_sample(path.moments(lambda), 100, 2000 + k)) {
      corrupted = std::max(corrupted, std::abs(master_equation_residual(field, path, x)));
    }
  }
  return {worst < 1e-9 && corrupted > 0.01, fmt("max_residual=%.3g", worst) + fmt(" corrupted=%.3g", corrupted)};
}

Outcome irrotationality() {
  const AffineFlow pot(paper_path(), Potential{});
  const HomotopyPath diag = diagonal_path();
  const AffineFlow exact_d(diag, Exact{});
  const AffineFlow pot_d(diag, Potential{});
  double asym = 0.0;
  double gap = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double lambda = k / 100.0;
    const Matrix s = pot.jacobian(lambda);
    asym = std::max(asym, (s - s.transpose()).norm());
    gap = std::max(gap, (exact_d.jacobian(lambda) - pot_d.jacobian(lambda)).cwiseAbs().maxCoeff());
  }
  return {asym < 1e-12 && gap <= 1e-10, fmt("potential_asym=%.3g", asym) + fmt(" diag_prior_gap=%.3g", gap)};
}

Outcome ensemble_transport() {
  const ExperimentConfig config;
  const HomotopyPath path = make_path(config);
  const Gaussian post = path.moments(1.0);
  IntegratorSpec spec;
  spec.method = IntegratorMethod::RK4;
  spec.step_size = 1e-3;
  spec.record_every = -1;
  const ParticleEnsemble start = ParticleEnsemble::sample(path.prior(), 100000, config.seed);
  Outcome o{true, ""};
  for (const FlowKind& kind : paper_flows()) {
    const AffineFlow flow(path, kind);
    const SampleMoments m = empirical_moments(integrate(flow, start, spec));
    const double mean_err = (m.mean - post.mean).norm();
    const double cov_err = (m.cov - post.cov.matrix()).norm();
    o.pass = o.pass && mean_err <= 0.03 && cov_err <= 0.05;
    o.detail += flow.label() + fmt(" mean_err=%.4f", mean_err) + fmt(" cov_err=%.4f ", cov_err);
  }
  return o;
}

Outcome energy_ordering() {
  const HomotopyPath path = paper_path();
  const AffineFlow pot(path, Potential{});
  const AffineFlow exact(path, Exact{});
  const AffineFlow rot(path, Rotational(2.5, 2));
  int violations = 0;
  double first_violation = -1.0;
  double worst_gap = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double lambda = k / 63.0;
    const double ep = kinetic_energy(pot, lambda);
    const double ee = kinetic_energy(exact, lambda);
    const double er = kinetic_energy(rot, lambda);
    const bool ok = ep <= ee + 1e-9 && ee <= er && ep < er;
    if (!ok) {
      ++violations;
      if (first_violation < 0.0) first_violation = lambda;
      worst_gap = std::max(worst_gap, ee - er);
    }
  }
  std::string detail = "violations=" + std::to_string(violations) + "/64";
  if (violations > 0) detail += fmt(" first_at_lambda=%.4f", first_violation) + fmt(" E_exact-E_rot=%.4f", worst_gap);
  return {violations == 0, detail};
}

Outcome dynamics_consistency() {
  const HomotopyPath path = paper_path();
  const Vector x = path.moments(0.5).mean + (Vector(2) << 1.0, -0.5).finished();
  Outcome o{true, ""};
  for (const FlowKind& kind : paper_flows()) {
    const AffineFlow flow(path, kind);
    const double ratio = euler_residual(flow, 0.5, x, 1e-3) / euler_residual(flow, 0.5, x, 5e-4);
    o.pass = o.pass && std::abs(ratio - 4.0) <= 0.5;
    o.detail += flow.label() + fmt(" ratio=%.4f ", ratio);
  }
  return o;
}

Outcome integrator_orders() {
  ExperimentConfig config;
  config.output_dir = std::filesystem::temp_directory_path() / "lhflow_acceptance_convergence";
  const ConvergenceStudy study = convergence_study(config);
  const double euler = study.slope(IntegratorMethod::Euler);
  const double verlet = study.slope(IntegratorMethod::Verlet);
  const double rk4 = study.slope(IntegratorMethod::RK4);
  return {std::abs(euler - 1.0) <= 0.3 && std::abs(verlet - 2.0) <= 0.3 && std::abs(rk4 - 4.0) <= 0.3,
          fmt("euler=%.3f", euler) + fmt(" verlet=%.3f", verlet) + fmt(" rk4=%.3f", rk4)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 analytic posterior", analytic_posterior},
      {"AC2 action table", action_table},
      {"AC3 residual rotation of exact flow", residual_rotation},
      {"AC4 quadratic action law", quadratic_law},
      {"AC5 master equation exactness", master_equation},
      {"AC6 irrotationality and uniqueness", irrotationality},
      {"AC7 ensemble transport", ensemble_transport},
      {"AC8 energy ordering", energy_ordering},
      {"AC9 dynamics consistency", dynamics_consistency},
      {"AC10 integrator orders", integrator_orders},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.0f ms]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), ms);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
