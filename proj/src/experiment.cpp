#include "lhflow/experiment.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lhflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

bool same(const IntegratorSpec& a, const IntegratorSpec& b) {
  return a.method == b.method && a.step_size == b.step_size && a.tolerance == b.tolerance &&
         a.min_step == b.min_step && a.max_step == b.max_step && a.record_every == b.record_every;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(row);
  }
  return rows;
}

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

Matrix matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw Error(ErrorCode::DimensionMismatch, "matrix has no rows");
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

json moments_json(const Vector& mean, const Matrix& cov) {
  return {{"mean", vector_json(mean)}, {"cov", matrix_json(cov)}};
}

// Runs fn and rethrows any failure as a ConfigError tagged with the field.
template <class Fn>
auto field(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string(name) + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string(name) + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

std::vector<double> energy_grid(std::size_t nodes) {
  const std::size_t intervals = std::max<std::size_t>(nodes, kDefaultQuadratureNodes);
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(intervals);
  }
  return grid;
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return same(a.prior_mean, b.prior_mean) && same(a.prior_cov, b.prior_cov) && same(a.h_matrix, b.h_matrix) &&
         same(a.noise_cov, b.noise_cov) && same(a.observation, b.observation) && a.alphas == b.alphas &&
         a.sweep_alphas == b.sweep_alphas && a.n_particles == b.n_particles && a.seed == b.seed &&
         same(a.integrator, b.integrator) && a.quadrature_nodes == b.quadrature_nodes &&
         a.convergence_steps == b.convergence_steps &&
         a.convergence_reference_step == b.convergence_reference_step && a.output_dir == b.output_dir;
}

bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
  if (!(a.config_echo == b.config_echo) || !same(a.posterior_analytic.mean, b.posterior_analytic.mean) ||
      !same(a.posterior_analytic.cov.matrix(), b.posterior_analytic.cov.matrix()) ||
      a.runtime_ms != b.runtime_ms || a.artifact_paths != b.artifact_paths ||
      a.per_flow.size() != b.per_flow.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.per_flow.size(); ++i) {
    const FlowResult& x = a.per_flow[i];
    const FlowResult& y = b.per_flow[i];
    if (x.label != y.label || !(x.action == y.action) || !same(x.final_moments.mean, y.final_moments.mean) ||
        !same(x.final_moments.cov, y.final_moments.cov) || x.max_master_residual != y.max_master_residual) {
      return false;
    }
  }
  return true;
}

double ConvergenceStudy::slope(IntegratorMethod method) const {
  for (const auto& [m, s] : slopes) {
    if (m == method) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "no slope recorded for " + std::string(to_string(method)));
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, end);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "slope fit needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config root must be an object");
  ExperimentConfig c;
  if (j.contains("prior_mean")) c.prior_mean = field("prior_mean", [&] { return vector_from(j["prior_mean"]); });
  if (j.contains("prior_cov")) c.prior_cov = field("prior_cov", [&] { return matrix_from(j["prior_cov"]); });
  if (j.contains("h_matrix")) c.h_matrix = field("h_matrix", [&] { return matrix_from(j["h_matrix"]); });
  if (j.contains("noise_cov")) c.noise_cov = field("noise_cov", [&] { return matrix_from(j["noise_cov"]); });
  if (j.contains("observation")) {
    c.observation = field("observation", [&] { return vector_from(j["observation"]); });
  }
  if (j.contains("alphas")) c.alphas = field("alphas", [&] { return j["alphas"].get<std::vector<double>>(); });
  if (j.contains("sweep_alphas")) {
    c.sweep_alphas = field("sweep_alphas", [&] { return j["sweep_alphas"].get<std::vector<double>>(); });
  }
  if (j.contains("n_particles")) {
    c.n_particles = field("n_particles", [&] { return j["n_particles"].get<std::size_t>(); });
  }
  if (j.contains("seed")) c.seed = field("seed", [&] { return j["seed"].get<std::uint64_t>(); });
  if (j.contains("quadrature_nodes")) {
    c.quadrature_nodes = field("quadrature_nodes", [&] { return j["quadrature_nodes"].get<std::size_t>(); });
  }
  if (j.contains("output_dir")) {
    c.output_dir = field("output_dir", [&] { return fs::path(j["output_dir"].get<std::string>()); });
  }
  if (j.contains("integrator")) {
    const json& ij = j["integrator"];
    if (ij.contains("method")) {
      c.integrator.method = field("integrator.method", [&] {
        return parse_integrator_method(ij["method"].get<std::string>());
      });
    }
    if (ij.contains("step_size")) {
      c.integrator.step_size = field("integrator.step_size", [&] { return ij["step_size"].get<double>(); });
    }
    if (ij.contains("tolerance")) {
      c.integrator.tolerance = field("integrator.tolerance", [&] { return ij["tolerance"].get<double>(); });
    }
    if (ij.contains("min_step")) {
      c.integrator.min_step = field("integrator.min_step", [&] { return ij["min_step"].get<double>(); });
    }
    if (ij.contains("max_step")) {
      c.integrator.max_step = field("integrator.max_step", [&] { return ij["max_step"].get<double>(); });
    }
    if (ij.contains("record_every")) {
      c.integrator.record_every = field("integrator.record_every", [&] { return ij["record_every"].get<int>(); });
    }
  }
  if (j.contains("convergence")) {
    const json& cj = j["convergence"];
    if (cj.contains("steps")) {
      c.convergence_steps = field("convergence.steps", [&] { return cj["steps"].get<std::vector<int>>(); });
    }
    if (cj.contains("reference_step")) {
      c.convergence_reference_step =
          field("convergence.reference_step", [&] { return cj["reference_step"].get<double>(); });
    }
  }

  // Semantic validation, each failure naming its field.
  const Eigen::Index d = c.prior_mean.size();
  if (d < 1) throw Error(ErrorCode::ConfigError, "prior_mean: must have at least one component");
  field("prior_cov", [&] {
    if (c.prior_cov.rows() != d || c.prior_cov.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(d) + "x" + std::to_string(d));
    }
    return SpdMatrix(c.prior_cov);
  });
  const Eigen::Index m = c.observation.size();
  field("h_matrix", [&] {
    if (c.h_matrix.rows() != m || c.h_matrix.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(m) + "x" + std::to_string(d));
    }
    if (!c.h_matrix.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite entry");
    return 0;
  });
  field("noise_cov", [&] {
    if (c.noise_cov.rows() != m || c.noise_cov.cols() != m) {
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(m) + "x" + std::to_string(m));
    }
    return SpdMatrix(c.noise_cov);
  });
  field("alphas", [&] {
    for (double a : c.alphas) {
      if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "non-finite alpha");
      if (d < 2 && a != 0.0) throw Error(ErrorCode::InvalidArgument, "rotation needs d >= 2");
    }
    return 0;
  });
  if (c.n_particles < 2) throw Error(ErrorCode::ConfigError, "n_particles: must be at least 2");
  if (c.quadrature_nodes < 8) throw Error(ErrorCode::ConfigError, "quadrature_nodes: must be at least 8");
  field("integrator", [&] {
    c.integrator.validate();
    return 0;
  });
  field("convergence", [&] {
    for (int s : c.convergence_steps) {
      if (s < 1) throw Error(ErrorCode::InvalidArgument, "step counts must be positive");
    }
    if (!(c.convergence_reference_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad reference step");
    return 0;
  });
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"prior_mean", vector_json(c.prior_mean)},
      {"prior_cov", matrix_json(c.prior_cov)},
      {"h_matrix", matrix_json(c.h_matrix)},
      {"noise_cov", matrix_json(c.noise_cov)},
      {"observation", vector_json(c.observation)},
      {"alphas", c.alphas},
      {"sweep_alphas", c.sweep_alphas},
      {"n_particles", c.n_particles},
      {"seed", c.seed},
      {"quadrature_nodes", c.quadrature_nodes},
      {"output_dir", c.output_dir.string()},
      {"integrator",
       {{"method", std::string(to_string(c.integrator.method))},
        {"step_size", c.integrator.step_size},
        {"tolerance", c.integrator.tolerance},
        {"min_step", c.integrator.min_step},
        {"max_step", c.integrator.max_step},
        {"record_every", c.integrator.record_every}}},
      {"convergence", {{"steps", c.convergence_steps}, {"reference_step", c.convergence_reference_step}}},
  };
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json report_to_json(const ExperimentReport& r) {
  json flows = json::array();
  for (const FlowResult& f : r.per_flow) {
    json samples = json::array();
    for (const EnergySample& s : f.action.energy_samples) samples.push_back({s.lambda, s.energy});
    flows.push_back({
        {"label", f.label},
        {"action",
         {{"flow_label", f.action.flow_label},
          {"total_action", f.action.total_action},
          {"quadrature_nodes", f.action.quadrature_nodes},
          {"energy_samples", samples}}},
        {"final_moments", moments_json(f.final_moments.mean, f.final_moments.cov)},
        {"max_master_residual", f.max_master_residual},
    });
  }
  return {
      {"config_echo", config_to_json(r.config_echo)},
      {"posterior_analytic", moments_json(r.posterior_analytic.mean, r.posterior_analytic.cov.matrix())},
      {"per_flow", flows},
      {"runtime_ms", r.runtime_ms},
      {"artifact_paths", r.artifact_paths},
  };
}

ExperimentReport report_from_json(const json& j) {
  const json& post = j.at("posterior_analytic");
  ExperimentReport r{
      config_from_json(j.at("config_echo")),
      Gaussian(vector_from(post.at("mean")), SpdMatrix(matrix_from(post.at("cov")))),
      {},
      j.at("runtime_ms").get<std::int64_t>(),
      j.at("artifact_paths").get<std::vector<std::string>>(),
  };
  for (const json& fj : j.at("per_flow")) {
    FlowResult f;
    f.label = fj.at("label").get<std::string>();
    const json& aj = fj.at("action");
    f.action.flow_label = aj.at("flow_label").get<std::string>();
    f.action.total_action = aj.at("total_action").get<double>();
    f.action.quadrature_nodes = aj.at("quadrature_nodes").get<std::size_t>();
    for (const json& s : aj.at("energy_samples")) {
      f.action.energy_samples.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    }
    f.final_moments.mean = vector_from(fj.at("final_moments").at("mean"));
    f.final_moments.cov = matrix_from(fj.at("final_moments").at("cov"));
    f.max_master_residual = fj.at("max_master_residual").get<double>();
    r.per_flow.push_back(std::move(f));
  }
  return r;
}

HomotopyPath make_path(const ExperimentConfig& c) {
  return HomotopyPath(Gaussian(c.prior_mean, SpdMatrix(c.prior_cov)),
                      LinearMeasurement(c.h_matrix, SpdMatrix(c.noise_cov), c.observation));
}

std::vector<FlowKind> default_flows(const ExperimentConfig& c) {
  std::vector<FlowKind> flows{Potential{}, Exact{}};
  for (double a : c.alphas) flows.emplace_back(Rotational(a, c.prior_mean.size()));
  return flows;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const HomotopyPath path = make_path(config);
  fs::create_directories(config.output_dir);

  ExperimentReport report{config, path.moments(1.0), {}, 0, {}};
  const ParticleEnsemble initial = ParticleEnsemble::sample(path.prior(), config.n_particles, config.seed);

  std::vector<AffineFlow> flows;
  for (const FlowKind& kind : default_flows(config)) flows.emplace_back(path, kind);

  std::ostringstream actions;
  actions << "label,total_action\n";
  for (const AffineFlow& flow : flows) {
    FlowResult result;
    result.label = flow.label();
    result.action = total_action(flow, config.quadrature_nodes);
    actions << result.label << ',' << format_number(result.action.total_action) << '\n';

    const ParticleEnsemble moved = integrate(flow, initial, config.integrator);
    result.final_moments = empirical_moments(moved);

    std::ostringstream traj;
    traj << "particle_id,lambda";
    for (Eigen::Index k = 0; k < path.dim(); ++k) traj << ",x" << (k + 1);
    traj << '\n';
    for (Eigen::Index i = 0; i < moved.size(); ++i) {
      for (const Snapshot& s : moved.trajectory) {
        traj << i << ',' << format_number(s.lambda);
        for (Eigen::Index k = 0; k < path.dim(); ++k) traj << ',' << format_number(s.positions(i, k));
        traj << '\n';
      }
    }
    for (const Snapshot& s : moved.trajectory) {
      const AffineField f = flow.field(s.lambda);
      for (Eigen::Index i = 0; i < s.positions.rows(); ++i) {
        const double r = std::abs(master_equation_residual(f, path, s.positions.row(i).transpose()));
        result.max_master_residual = std::max(result.max_master_residual, r);
      }
    }
    if (result.max_master_residual > kResidualBreachThreshold) {
      throw Error(ErrorCode::ResidualBreach, result.label + ": master-equation residual " +
                                                 format_number(result.max_master_residual));
    }
    const fs::path traj_path = config.output_dir / ("trajectories_" + result.label + ".csv");
    write_file(traj_path, traj.str());
    report.artifact_paths.push_back(traj_path.string());
    report.per_flow.push_back(std::move(result));
  }

  const fs::path actions_path = config.output_dir / "actions.csv";
  write_file(actions_path, actions.str());

  std::ostringstream energy;
  energy << "lambda";
  for (const AffineFlow& flow : flows) energy << ",energy_" << flow.label();
  energy << '\n';
  for (double lambda : energy_grid(config.quadrature_nodes)) {
    energy << format_number(lambda);
    for (const AffineFlow& flow : flows) energy << ',' << format_number(kinetic_energy(flow, lambda));
    energy << '\n';
  }
  const fs::path energy_path = config.output_dir / "energy.csv";
  write_file(energy_path, energy.str());

  const fs::path report_path = config.output_dir / "report.json";
  report.artifact_paths.insert(report.artifact_paths.begin(),
                               {actions_path.string(), energy_path.string(), report_path.string()});
  report.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                          .count();
  write_file(report_path, report_to_json(report).dump(2) + "\n");
  return report;
}

AlphaSweep sweep_alpha(const ExperimentConfig& config, const std::vector<double>& alphas) {
  if (alphas.size() < 2) throw Error(ErrorCode::ConfigError, "alphas: sweep needs at least two values");
  const HomotopyPath path = make_path(config);
  fs::create_directories(config.output_dir);

  AlphaSweep sweep;
  sweep.potential_action = total_action(AffineFlow(path, Potential{}), config.quadrature_nodes).total_action;
  sweep.decomposition_constant = action_decomposition_constant(path, config.quadrature_nodes);

  std::ostringstream csv;
  csv << "alpha,total_action,predicted\n";
  for (double a : alphas) {
    const AffineFlow flow(path, Rotational(a, path.dim()));
    AlphaSweepRow row{a, total_action(flow, config.quadrature_nodes).total_action,
                      sweep.potential_action + sweep.decomposition_constant * a * a};
    const double dev = std::abs(row.total_action - row.predicted);
    sweep.max_abs_deviation = std::max(sweep.max_abs_deviation, dev);
    sweep.max_relative_deviation = std::max(sweep.max_relative_deviation, dev / std::abs(row.predicted));
    csv << format_number(row.alpha) << ',' << format_number(row.total_action) << ','
        << format_number(row.predicted) << '\n';
    sweep.rows.push_back(row);
  }
  write_file(config.output_dir / "alpha_sweep.csv", csv.str());
  return sweep;
}

ConvergenceStudy convergence_study(const ExperimentConfig& config) {
  const HomotopyPath path = make_path(config);
  fs::create_directories(config.output_dir);
  const AffineFlow flow(path, Potential{});
  const ParticleEnsemble initial = ParticleEnsemble::sample(path.prior(), config.n_particles, config.seed);

  IntegratorSpec spec;
  spec.record_every = -1;
  spec.method = IntegratorMethod::RK4;
  spec.step_size = config.convergence_reference_step;
  const Matrix reference = integrate(flow, initial, spec).positions;

  ConvergenceStudy study;
  for (auto method : {IntegratorMethod::Euler, IntegratorMethod::Verlet, IntegratorMethod::RK4}) {
    spec.method = method;
    std::vector<double> hs;
    std::vector<double> errs;
    for (int steps : config.convergence_steps) {
      spec.step_size = 1.0 / steps;
      const Matrix end = integrate(flow, initial, spec).positions;
      const double err = (end - reference).cwiseAbs().maxCoeff();
      study.rows.push_back({method, spec.step_size, err});
      hs.push_back(spec.step_size);
      errs.push_back(err);
    }
    study.slopes.emplace_back(method, log_log_slope(hs, errs));
  }

  std::ostringstream csv;
  csv << "method,h,endpoint_error,slope\n";
  for (const ConvergenceRow& row : study.rows) {
    csv << to_string(row.method) << ',' << format_number(row.step_size) << ','
        << format_number(row.endpoint_error) << ',' << format_number(study.slope(row.method)) << '\n';
  }
  write_file(config.output_dir / "convergence.csv", csv.str());
  return study;
}

}  // namespace lhflow
