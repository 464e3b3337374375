#include <gtest/gtest.h>

#include <random>

#include "lhflow/flows.hpp"
#include "test_support.hpp"

namespace lhflow {
namespace {

using testing::paper_path;

// Direct evaluation, potential flow, 40 prior samples with seed 7.
constexpr double kStiffnessAtZero = 2372.5191331883398;
constexpr double kStiffnessAtOne = 4.6693275935883589;

std::vector<FlowKind> paper_kinds() { return {Potential{}, Exact{}, Rotational(2.5, 2)}; }

double constraint_residual(const HomotopyPath& path, double lambda, const Matrix& m) {
  const Matrix prec = path.precision(lambda).matrix();
  return (prec * m + m.transpose() * prec + path.information_increment()).norm();
}

TEST(Rotational, GeneratorValidation) {
  EXPECT_THROW(Rotational(1.0, (Matrix(2, 2) << 0.0, 1.0, -0.9, 0.0).finished()), Error);
  EXPECT_THROW(Rotational(1.0, (Matrix(2, 2) << 1.0, 1.0, -1.0, 0.0).finished()), Error);
  EXPECT_THROW(default_generator(1), Error);
  const Matrix j = default_generator(3);
  EXPECT_EQ(j(0, 1), 1.0);
  EXPECT_EQ(j(1, 0), -1.0);
  EXPECT_EQ(j.cwiseAbs().sum(), 2.0);
  EXPECT_THROW(AffineFlow(paper_path(), Rotational(1.0, 3)), Error);
}

TEST(FlowLabel, Names) {
  EXPECT_EQ(flow_label(Potential{}), "potential");
  EXPECT_EQ(flow_label(Exact{}), "exact");
  EXPECT_EQ(flow_label(Rotational(2.5, 2)), "rotational_a2.5");
}

TEST(ExactJacobian, ResidualRotationAtHalfway) {
  const Matrix a = AffineFlow(paper_path(), Exact{}).jacobian(0.5);
  EXPECT_NEAR((a - a.transpose()).norm(), 0.47, 0.005);
}

TEST(ExactJacobian, ClosedFormAndInversionLemmaAgree) {
  const HomotopyPath path = paper_path();
  const Matrix closed = exact_jacobian_closed_form(path, 0.5);
  const Matrix lemma = exact_jacobian_inversion_lemma(path, 0.5);
  EXPECT_LT((closed - lemma).norm(), 1e-12);
  const Matrix expected = (Matrix(2, 2) << -0.889, 0.0, -0.333, 0.0).finished();
  EXPECT_LT((closed - expected).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LT((AffineFlow(path, Exact{}).jacobian(0.5) - closed).norm(), 1e-12);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const HomotopyPath p = testing::random_path(rng, 4, 2);
    for (double lambda : {0.0, 0.3, 1.0}) {
      EXPECT_LT((exact_jacobian_closed_form(p, lambda) - exact_jacobian_inversion_lemma(p, lambda)).norm(), 1e-9);
    }
  }
}

TEST(PotentialJacobian, ExactlySymmetric) {
  const AffineFlow flow(paper_path(), Potential{});
  for (double lambda = 0.0; lambda <= 1.0; lambda += 0.05) {
    const Matrix s = flow.jacobian(lambda);
    EXPECT_EQ((s - s.transpose()).norm(), 0.0);
  }
}

TEST(FlowProperty, JacobiansSatisfyLyapunovConstraint) {
  std::mt19937_64 rng(22);
  std::vector<HomotopyPath> paths{paper_path(), testing::random_path(rng, 3, 2), testing::random_path(rng, 5, 1)};
  for (const HomotopyPath& path : paths) {
    for (const FlowKind& kind : std::vector<FlowKind>{Potential{}, Exact{}}) {
      const AffineFlow flow(path, kind);
      for (int k = 0; k < 20; ++k) {
        const double lambda = k / 19.0;
        EXPECT_LT(constraint_residual(path, lambda, flow.jacobian(lambda)), 1e-9) << flow.label();
      }
    }
  }
}

TEST(FlowProperty, DiagonalPriorMakesExactFlowIrrotational) {
  const HomotopyPath path = testing::diagonal_prior_path();
  const AffineFlow exact(path, Exact{});
  const AffineFlow potential(path, Potential{});
  for (int k = 0; k <= 20; ++k) {
    const double lambda = k / 20.0;
    const Matrix a = exact.jacobian(lambda);
    EXPECT_LT((a - a.transpose()).norm(), 1e-12);
    EXPECT_LT((a - potential.jacobian(lambda)).norm(), 1e-10);
  }
}

TEST(Velocity, ZeroRotationEqualsPotential) {
  const HomotopyPath path = paper_path();
  const AffineFlow pot(path, Potential{});
  const AffineFlow rot(path, Rotational(0.0, 2));
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double lambda = unit(rng);
    const Vector x = testing::random_vector(rng, 2, 3.0);
    worst = std::max(worst, (pot.velocity(lambda, x) - rot.velocity(lambda, x)).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Velocity, AtMeanEqualsMeanRate) {
  const HomotopyPath path = paper_path();
  for (const FlowKind& kind : paper_kinds()) {
    const AffineFlow flow(path, kind);
    const Vector v = flow.velocity(0.4, path.moments(0.4).mean);
    EXPECT_LT((v - path.mean_derivatives(0.4).first).norm(), 1e-12) << flow.label();
  }
}

TEST(Velocity, ExactAffineFormMatchesMomentForm) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<HomotopyPath> paths{paper_path(), paper_path((Vector(2) << 0.7, -1.2).finished()),
                                  testing::random_path(rng, 3, 2)};
  for (const HomotopyPath& path : paths) {
    const AffineFlow flow(path, Exact{});
    for (int i = 0; i < 50; ++i) {
      const double lambda = unit(rng);
      const Vector x = testing::random_vector(rng, path.dim(), 3.0);
      EXPECT_LT((exact_velocity_affine(path, lambda, x) - flow.velocity(lambda, x)).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Velocity, RotationalAddsScaledScore) {
  const HomotopyPath path = paper_path();
  const AffineFlow pot(path, Potential{});
  const AffineFlow rot(path, Rotational(1.5, 2));
  const Vector x = (Vector(2) << 1.0, -2.0).finished();
  const Vector expected = pot.velocity(0.7, x) + 1.5 * default_generator(2) * log_density_gradient(path, 0.7, x);
  EXPECT_LT((rot.velocity(0.7, x) - expected).norm(), 1e-12);
}

TEST(Acceleration, AtMeanIsMeanSecondDerivative) {
  const HomotopyPath path = paper_path();
  for (const FlowKind& kind : paper_kinds()) {
    const AffineFlow flow(path, kind);
    const Vector a = flow.acceleration(0.6, path.moments(0.6).mean);
    EXPECT_LT((a - path.mean_derivatives(0.6).second).norm(), 1e-12) << flow.label();
  }
}

TEST(Acceleration, ZeroForUninformativeMeasurement) {
  const HomotopyPath path = testing::uninformative_path();
  std::mt19937_64 rng(25);
  // The rotational flow keeps spinning along density contours, so only the
  // other two are static.
  for (const FlowKind& kind : std::vector<FlowKind>{Potential{}, Exact{}}) {
    const AffineFlow flow(path, kind);
    EXPECT_EQ(flow.acceleration(0.3, testing::random_vector(rng, 2, 2.0)).norm(), 0.0);
  }
}

TEST(Acceleration, JacobianRateMatchesFiniteDifference) {
  const double h = 1e-6;
  std::mt19937_64 rng(26);
  std::vector<HomotopyPath> paths{paper_path(), testing::random_path(rng, 3, 2)};
  for (const HomotopyPath& path : paths) {
    std::vector<FlowKind> kinds{Potential{}, Exact{}, Rotational(0.8, path.dim())};
    for (const FlowKind& kind : kinds) {
      const AffineFlow flow(path, kind);
      for (double lambda : {0.1, 0.5, 0.9}) {
        const Matrix fd = (flow.jacobian(lambda + h) - flow.jacobian(lambda - h)) / (2 * h);
        const Matrix rate = flow.jacobian_rate(lambda);
        EXPECT_LT((fd - rate).norm(), 1e-6 * std::max(1.0, rate.norm())) << flow.label();
      }
    }
  }
}

TEST(Acceleration, MatchesMaterialDerivativeAlongTrajectory) {
  const HomotopyPath path = paper_path();
  const double h = 1e-5;
  std::mt19937_64 rng(27);
  for (const FlowKind& kind : paper_kinds()) {
    const AffineFlow flow(path, kind);
    for (double lambda : {0.1, 0.5, 0.8}) {
      const Vector x = path.moments(lambda).mean + testing::random_vector(rng, 2, 1.0);
      // One RK4 step moves the particle along its trajectory.
      const Vector k1 = flow.velocity(lambda, x);
      const Vector k2 = flow.velocity(lambda + h / 2, x + h / 2 * k1);
      const Vector k3 = flow.velocity(lambda + h / 2, x + h / 2 * k2);
      const Vector k4 = flow.velocity(lambda + h, x + h * k3);
      const Vector next = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      const Vector fd = (flow.velocity(lambda + h, next) - k1) / h;
      const Vector a = flow.acceleration(lambda, x);
      EXPECT_LT((fd - a).norm(), 1e-3 * a.norm()) << flow.label() << " lambda=" << lambda;
    }
  }
}

TEST(StiffnessMetric, ZeroWithoutInformation) {
  const HomotopyPath path = testing::uninformative_path();
  const auto points = cholesky_sample(path.prior(), 40, 7);
  EXPECT_EQ(stiffness_metric(AffineFlow(path, Potential{}), 0.5, points), 0.0);
}

TEST(StiffnessMetric, EmptyPointSet) {
  try {
    stiffness_metric(AffineFlow(paper_path(), Potential{}), 0.5, std::vector<Vector>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPointSet);
  }
}

TEST(StiffnessMetric, SinglePointAtMean) {
  const HomotopyPath path = paper_path();
  const AffineFlow flow(path, Exact{});
  const double s = stiffness_metric(flow, 0.25, std::vector<Vector>{path.moments(0.25).mean});
  EXPECT_NEAR(s, path.mean_derivatives(0.25).second.norm(), 1e-12);
}

TEST(StiffnessMetric, FlowDeceleratesAsLikelihoodIsAbsorbed) {
  const HomotopyPath path = paper_path();
  const AffineFlow flow(path, Potential{});
  const auto points = cholesky_sample(path.prior(), 40, 7);
  const double at_start = stiffness_metric(flow, 0.0, points);
  const double at_end = stiffness_metric(flow, 1.0, points);
  EXPECT_GT(at_start, at_end);
  EXPECT_NEAR(at_start, kStiffnessAtZero, 1e-9 * kStiffnessAtZero);
  EXPECT_NEAR(at_end, kStiffnessAtOne, 1e-9 * kStiffnessAtOne);
}

}  // namespace
}  // namespace lhflow
