#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lhflow/diagnostics.hpp"
#include "lhflow/particles.hpp"

namespace lhflow {

/// Parameters of one linear-Gaussian update experiment. Defaults reproduce
/// the 2D correlated-prior setup: P0 = [[4, 1.5], [1.5, 2]], H = [1, 0],
/// R = 0.25, z = 3, 40 particles, alpha = 2.5.
struct ExperimentConfig {
  Vector prior_mean = Vector::Zero(2);
  Matrix prior_cov = (Matrix(2, 2) << 4.0, 1.5, 1.5, 2.0).finished();
  Matrix h_matrix = (Matrix(1, 2) << 1.0, 0.0).finished();
  Matrix noise_cov = Matrix::Constant(1, 1, 0.25);
  Vector observation = Vector::Constant(1, 3.0);
  std::vector<double> alphas{2.5};
  std::vector<double> sweep_alphas{0.0, 0.5, 1.0, 2.5};
  std::size_t n_particles = 40;
  std::uint64_t seed = 7;
  IntegratorSpec integrator{};
  std::size_t quadrature_nodes = kDefaultQuadratureNodes;
  /// Step counts per unit lambda for the convergence study.
  std::vector<int> convergence_steps{40, 80, 160, 320};
  double convergence_reference_step = 1e-5;
  std::filesystem::path output_dir = "lhflow_out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

struct FlowResult {
  std::string label;
  ActionReport action;
  SampleMoments final_moments;
  double max_master_residual = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config_echo;
  Gaussian posterior_analytic;
  std::vector<FlowResult> per_flow;
  std::int64_t runtime_ms = 0;
  std::vector<std::string> artifact_paths;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&);
};

struct AlphaSweepRow {
  double alpha = 0.0;
  double total_action = 0.0;
  double predicted = 0.0;
};

struct AlphaSweep {
  double potential_action = 0.0;
  double decomposition_constant = 0.0;
  std::vector<AlphaSweepRow> rows;
  /// max |total - predicted| / |predicted|
  double max_relative_deviation = 0.0;
  double max_abs_deviation = 0.0;
};

struct ConvergenceRow {
  IntegratorMethod method = IntegratorMethod::Euler;
  double step_size = 0.0;
  double endpoint_error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Least-squares slope of log(error) against log(h) per method.
  std::vector<std::pair<IntegratorMethod, double>> slopes;

  double slope(IntegratorMethod method) const;
};

/// Largest master-equation residual tolerated along recorded trajectories.
inline constexpr double kResidualBreachThreshold = 1e-8;

/// Every config failure is rethrown as ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

HomotopyPath make_path(const ExperimentConfig& config);
/// Potential, Exact, then Rotational(alpha) for each configured alpha.
std::vector<FlowKind> default_flows(const ExperimentConfig& config);

/// Writes actions.csv, energy.csv, trajectories_<label>.csv and report.json
/// into config.output_dir. Throws NumericalError on blow-up and Error
/// (ResidualBreach) when a trajectory point violates the master equation.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes alpha_sweep.csv. Requires at least two alphas.
AlphaSweep sweep_alpha(const ExperimentConfig& config, const std::vector<double>& alphas);

/// Compares Euler, Verlet and RK4 endpoints against a fine RK4 reference on
/// the potential flow; writes convergence.csv.
ConvergenceStudy convergence_study(const ExperimentConfig& config);

/// Fixed 12-significant-digit, locale-independent float formatting.
std::string format_number(double v);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lhflow
