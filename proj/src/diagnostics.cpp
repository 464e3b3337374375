#include "lhflow/diagnostics.hpp"

#include <algorithm>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

namespace lhflow {

namespace {

constexpr std::size_t kPanelOrder = 16;
constexpr std::size_t kMinNodes = 8;
constexpr int kEulerResidualSubsteps = 8;

void check_nodes(std::size_t nodes) {
  if (nodes < kMinNodes) {
    throw Error(ErrorCode::InvalidArgument,
                "quadrature needs at least 8 nodes, got " + std::to_string(nodes));
  }
}

// Fourth-order Runge-Kutta transport of a single point from lambda to
// lambda + span along the flow.
Vector transport(const AffineFlow& flow, double lambda, const Vector& x, double span) {
  const double h = span / kEulerResidualSubsteps;
  Vector y = x;
  for (int k = 0; k < kEulerResidualSubsteps; ++k) {
    const double l = lambda + k * h;
    const Vector k1 = flow.velocity(l, y);
    const Vector k2 = flow.velocity(l + 0.5 * h, y + 0.5 * h * k1);
    const Vector k3 = flow.velocity(l + 0.5 * h, y + 0.5 * h * k2);
    const Vector k4 = flow.velocity(l + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

std::vector<std::pair<double, double>> composite_gauss_legendre(std::size_t nodes) {
  check_nodes(nodes);
  using Rule = boost::math::quadrature::gauss<double, kPanelOrder>;
  const std::size_t panels = (nodes + kPanelOrder - 1) / kPanelOrder;
  const double width = 1.0 / static_cast<double>(panels);

  // Boost stores the non-negative half of the symmetric rule.
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  std::vector<std::pair<double, double>> reference;
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    reference.emplace_back(abscissa[i], weights[i]);
    if (abscissa[i] != 0.0) reference.emplace_back(-abscissa[i], weights[i]);
  }
  std::sort(reference.begin(), reference.end());

  std::vector<std::pair<double, double>> out;
  out.reserve(panels * kPanelOrder);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) * width;
    for (const auto& [t, w] : reference) {
      out.emplace_back(lo + 0.5 * width * (t + 1.0), 0.5 * width * w);
    }
  }
  return out;
}

double kinetic_energy(const AffineField& field) {
  const Matrix& m = field.jacobian;
  return 0.5 * ((m.transpose() * m * field.covariance).trace() + field.mean_rate.squaredNorm());
}

double kinetic_energy(const AffineFlow& flow, double lambda) { return kinetic_energy(flow.field(lambda)); }

ActionReport total_action(const AffineFlow& flow, std::size_t quadrature_nodes) {
  const auto rule = composite_gauss_legendre(quadrature_nodes);
  ActionReport report;
  report.flow_label = flow.label();
  report.quadrature_nodes = rule.size();
  report.energy_samples.reserve(rule.size() + 2);
  report.energy_samples.push_back({0.0, kinetic_energy(flow, 0.0)});
  double sum = 0.0;
  for (const auto& [lambda, weight] : rule) {
    const double e = kinetic_energy(flow, lambda);
    sum += weight * e;
    report.energy_samples.push_back({lambda, e});
  }
  report.energy_samples.push_back({1.0, kinetic_energy(flow, 1.0)});
  report.total_action = sum;
  return report;
}

double action_decomposition_constant(const HomotopyPath& path, std::size_t quadrature_nodes) {
  double sum = 0.0;
  for (const auto& [lambda, weight] : composite_gauss_legendre(quadrature_nodes)) {
    sum += weight * path.precision(lambda).matrix().trace();
  }
  return 0.5 * sum;
}

double master_equation_residual(const AffineField& field, const HomotopyPath& path, const Vector& x) {
  const Vector v = field.velocity(x);
  const Vector score = -field.precision * (x - field.mean);
  const double divergence_ratio = field.jacobian.trace() + v.dot(score);
  return -divergence_ratio - path.centered_log_likelihood(field.lambda, x);
}

double master_equation_residual(const AffineFlow& flow, double lambda, const Vector& x) {
  return master_equation_residual(flow.field(lambda), flow.path(), x);
}

double euler_residual(const AffineFlow& flow, double lambda, const Vector& x, double fd_step) {
  if (!(fd_step > 0.0 && fd_step <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "fd_step must lie in (0, 1e-3]");
  }
  check_lambda(lambda - fd_step);
  check_lambda(lambda + fd_step);
  const Vector forward = transport(flow, lambda, x, fd_step);
  const Vector backward = transport(flow, lambda, x, -fd_step);
  const Vector fd = (flow.velocity(lambda + fd_step, forward) - flow.velocity(lambda - fd_step, backward)) /
                    (2.0 * fd_step);
  return (fd - flow.acceleration(lambda, x)).norm();
}

}  // namespace lhflow
