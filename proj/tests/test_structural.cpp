#include "aerocouple/error.hpp"
#include "aerocouple/structural.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace aerocouple;

namespace {

StructuralModel one_node_model(Eigen::VectorXd freq, Eigen::MatrixXd shapes) {
  return make_diagonal_model({{1, Vec3(0.25, 0, 0)}}, std::move(shapes), std::move(freq));
}

StructuralModel two_mode_coupled() {
  std::vector<GridNode> nodes{{1, Vec3(0.25, 0, 0)}, {2, Vec3(1.0, 0, 0)}};
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(12, 2);
  u(2, 0) = 1.0;
  u(8, 0) = 1.0;
  u(4, 1) = 1.0;
  u(8, 1) = -0.75;
  u(10, 1) = 1.0;
  StructuralModel m = make_diagonal_model(nodes, u, Eigen::Vector2d(14.3, 45.0));
  m.mass << 3.0, -0.4, -0.4, 0.8;
  m.stiffness << 620.0, 35.0, 35.0, 1650.0;
  m.diagonal = false;
  m.validate();
  return m;
}

// Energy 0.5 (qdot' M qdot + q' K q).
double energy(const StructuralSystem& s, const ModalState& x) {
  return 0.5 * (x.qdot.dot(s.mass * x.qdot) + x.q.dot(s.stiffness * x.q));
}

double sdof_error(double dt, const IntegratorParams& p) {
  StructuralSystem s;
  const double w = 2.0 * std::numbers::pi * 1.5;
  const double xi = 0.05;
  s.mass = Eigen::MatrixXd::Constant(1, 1, 1.0);
  s.stiffness = Eigen::MatrixXd::Constant(1, 1, w * w);
  s.damping = Eigen::MatrixXd::Constant(1, 1, 2.0 * xi * w);
  ModalState x = ModalState::zeros(1);
  x.q[0] = 1.0;
  x.qddot = equilibrium_acceleration(s, x);
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (int i = 0; i < steps; ++i) x = step_dynamic(s, x, Eigen::VectorXd::Zero(1), dt, p);
  const double wd = w * std::sqrt(1.0 - xi * xi);
  const double exact = std::exp(-xi * w) * (std::cos(wd) + xi * w / wd * std::sin(wd));
  return std::abs(x.q[0] - exact);
}

}  // namespace

TEST(Damping, DiagonalRatioTimesFrequency) {
  StructuralModel m = one_node_model(Eigen::VectorXd::Constant(1, 45.0), Eigen::MatrixXd::Identity(6, 1));
  m.damping_ratios[0] = 0.01;
  const Eigen::MatrixXd c = build_damping(m);
  EXPECT_NEAR(c(0, 0), 0.9, 1e-15);
}

TEST(Damping, ZeroRatioGivesZeroMatrix) {
  EXPECT_TRUE(build_damping(two_mode_coupled()).isZero(0.0));
  EXPECT_TRUE(make_system(two_mode_coupled(), 0.0).damping.isZero(0.0));
}

TEST(Damping, NonDiagonalReproducesRatiosOnDecoupling) {
  const StructuralModel m = two_mode_coupled();
  const Eigen::MatrixXd c = make_system(m, 0.02).damping;

  // Independent decoupling through the symmetric form M^-1/2 K M^-1/2.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(m.mass);
  const Eigen::MatrixXd m_inv_half = ms.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(m_inv_half * m.stiffness * m_inv_half);
  const Eigen::MatrixXd phi = m_inv_half * ks.eigenvectors();
  const Eigen::MatrixXd cd = phi.transpose() * c * phi;
  const Eigen::MatrixXd md = phi.transpose() * m.mass * phi;
  for (int i = 0; i < 2; ++i) {
    const double d = std::sqrt(ks.eigenvalues()[i]);
    EXPECT_NEAR(cd(i, i) / (2.0 * d * md(i, i)), 0.02, 1e-10);
  }
  EXPECT_NEAR(cd(0, 1), 0.0, 1e-10 * cd.cwiseAbs().maxCoeff());
}

TEST(Damping, ModalPathAgreesWithDiagonalFormula) {
  StructuralModel m = one_node_model(Eigen::Vector2d(3.0, 7.0), Eigen::MatrixXd::Identity(6, 2));
  const Eigen::Vector2d ratios(0.03, 0.01);
  const Eigen::MatrixXd direct = build_damping(m, ratios);
  const Eigen::MatrixXd modal = build_damping(m, ratios, true);
  EXPECT_LT((direct - modal).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GeneralizedForce, ColumnDotForce) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(6, 1);
  u(0, 0) = 1.0;
  u(1, 0) = 2.0;
  const StructuralModel m = one_node_model(Eigen::VectorXd::Constant(1, 1.0), u);
  InterfaceField f;
  f.ids = {1};
  f.positions = Eigen::RowVector3d(0.25, 0, 0);
  f.values = Eigen::RowVector3d(3.0, 4.0, 0.0);
  f.kind = FieldKind::Force;
  EXPECT_DOUBLE_EQ(generalized_force(m, f)[0], 11.0);
  f.values.setZero();
  EXPECT_EQ(generalized_force(m, f)[0], 0.0);
}

TEST(GeneralizedForce, RigidPlungeCollectsResultant) {
  std::vector<GridNode> nodes;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(6 * 4, 1);
  for (int i = 0; i < 4; ++i) {
    nodes.push_back({i + 1, Vec3(0.3 * i, 0.1 * i * i, 0)});
    u(6 * i + 2, 0) = 1.0;
  }
  const StructuralModel m = make_diagonal_model(nodes, u, Eigen::VectorXd::Constant(1, 2.0));
  InterfaceField f;
  f.ids = {1, 2, 3, 4};
  f.positions = m.node_positions();
  f.values = Eigen::MatrixX3d::Zero(4, 3);
  f.values.col(2) << 1.5, -0.25, 7.0, 2.0;
  f.values.col(0) << 9.0, 9.0, 9.0, 9.0;
  f.kind = FieldKind::Force;
  EXPECT_NEAR(generalized_force(m, f)[0], 10.25, 1e-14);
}

TEST(GeneralizedForce, UnknownNodeRejected) {
  const StructuralModel m = one_node_model(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Identity(6, 1));
  InterfaceField f;
  f.ids = {99};
  f.positions = Eigen::RowVector3d::Zero();
  f.values = Eigen::RowVector3d::Ones();
  EXPECT_THROW(generalized_force(m, f), InvalidArgument);
}

TEST(Integrator, ZeroForceZeroStateStaysZero) {
  const StructuralSystem s = make_system(two_mode_coupled(), 0.01);
  ModalState x = ModalState::zeros(2);
  for (int i = 0; i < 100; ++i) x = step_dynamic(s, x, Eigen::VectorXd::Zero(2), 1e-3, IntegratorParams{});
  EXPECT_TRUE(x.q.isZero(0.0));
  EXPECT_TRUE(x.qdot.isZero(0.0));
}

TEST(Integrator, SecondOrderConvergence) {
  for (double rho : {1.0, 0.8, 0.5, 0.0}) {
    const IntegratorParams p = IntegratorParams::from_spectral_radius(rho);
    const double e1 = sdof_error(1.0 / 800, p);
    const double e2 = sdof_error(1.0 / 1600, p);
    const double e3 = sdof_error(1.0 / 3200, p);
    const double slope1 = std::log2(e1 / e2);
    const double slope2 = std::log2(e2 / e3);
    EXPECT_GE(slope2, 1.9) << "rho_inf " << rho << " slope " << slope1 << ", " << slope2;
    EXPECT_LE(slope2, 2.1) << "rho_inf " << rho;
  }
}

TEST(Integrator, NewmarkConservesEnergyWithoutDamping) {
  const StructuralSystem s = make_system(two_mode_coupled(), 0.0);
  for (const IntegratorParams& p : {IntegratorParams::from_spectral_radius(1.0), IntegratorParams::newmark()}) {
    ModalState x = ModalState::zeros(2);
    x.q << 0.1, -0.05;
    x.qdot << 0.0, 1.0;
    x.qddot = equilibrium_acceleration(s, x);
    const double e0 = energy(s, x);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      x = step_dynamic(s, x, Eigen::VectorXd::Zero(2), 2e-3, p);
      worst = std::max(worst, std::abs(energy(s, x) - e0) / e0);
    }
    EXPECT_LT(worst, 1e-3);
  }
}

TEST(Integrator, NumericalDissipationBelowUnitSpectralRadius) {
  const StructuralSystem s = make_system(two_mode_coupled(), 0.0);
  ModalState x = ModalState::zeros(2);
  x.q << 0.1, -0.05;
  x.qddot = equilibrium_acceleration(s, x);
  const double e0 = energy(s, x);
  for (int i = 0; i < 2000; ++i) x = step_dynamic(s, x, Eigen::VectorXd::Zero(2), 0.05, IntegratorParams::from_spectral_radius(0.0));
  EXPECT_LT(energy(s, x), 0.5 * e0);
}

TEST(Integrator, StepIsPureAndSatisfiesBalance) {
  const StructuralSystem s = make_system(two_mode_coupled(), 0.02);
  const IntegratorParams p = IntegratorParams::from_spectral_radius(0.7);
  ModalState x = ModalState::zeros(2);
  x.q << 0.01, 0.02;
  x.force << 1.0, -2.0;
  x.qddot = equilibrium_acceleration(s, x);
  const Eigen::Vector2d f(3.0, 0.5);
  const ModalState a = step_dynamic(s, x, f, 1e-3, p);
  const ModalState b = step_dynamic(s, x, f, 1e-3, p);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.qddot, b.qddot);
  EXPECT_LT(step_residual(s, x, a, p).norm(), 1e-10);
  const ModalState k = kinematics_for_displacement(x, a.q, 1e-3, p);
  EXPECT_LT((k.qdot - a.qdot).norm(), 1e-10);
  EXPECT_LT((k.qddot - a.qddot).norm(), 1e-8);
}

TEST(Steady, StaticPlungeDeflection) {
  const StructuralModel m = one_node_model(Eigen::VectorXd::Constant(1, std::sqrt(205.0)), Eigen::MatrixXd::Identity(6, 1));
  const ModalState x = solve_steady(make_system(m), Eigen::VectorXd::Constant(1, 59.25));
  EXPECT_NEAR(x.q[0], 59.25 / 205.0, 1e-12);
  EXPECT_NEAR(x.q[0], 0.289, 5e-4);
  EXPECT_TRUE(solve_steady(make_system(m), Eigen::VectorXd::Zero(1)).q.isZero(0.0));
}

TEST(Steady, MatchesDirectSolveOnRandomSpdSystem) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 5;
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
  Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
  StructuralSystem s;
  s.mass = a * a.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  s.stiffness = 100.0 * (b * b.transpose() + Eigen::MatrixXd::Identity(n, n));
  s.damping = Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd f = Eigen::VectorXd::NullaryExpr(n, [&] { return 50.0 * u(rng); });
  const ModalState x = solve_steady(s, f);
  const Eigen::VectorXd direct = s.stiffness.ldlt().solve(f);
  EXPECT_LT((x.q - direct).norm(), 1e-10 * direct.norm());
}

TEST(Motion, ZeroCoordinatesGiveZeroField) {
  const StructuralModel m = two_mode_coupled();
  const PhysicalMotion pm = physical_motion(m, ModalState::zeros(2));
  EXPECT_TRUE(pm.displacement.values.isZero(0.0));
}

TEST(Motion, PitchModeIsLinearizedRotation) {
  // Pitch about (0.25, 0, 0): translation theta * e_y x (x - x0).
  std::vector<GridNode> nodes{{1, Vec3(0.25, 0, 0)}, {2, Vec3(1.0, 0, 0.1)}, {3, Vec3(0.0, 0, -0.06)}};
  const Vec3 axis(0.25, 0, 0);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(18, 1);
  for (int i = 0; i < 3; ++i) {
    const Vec3 d = nodes[i].position - axis;
    u(6 * i + 0, 0) = d.z();
    u(6 * i + 2, 0) = -d.x();
    u(6 * i + 4, 0) = 1.0;
  }
  const StructuralModel m = make_diagonal_model(nodes, u, Eigen::VectorXd::Constant(1, 45.0));
  ModalState x = ModalState::zeros(1);
  x.q[0] = 0.01;
  const PhysicalMotion pm = physical_motion(m, x);
  for (int i = 0; i < 3; ++i) {
    const Vec3 expected = Vec3(0, 0.01, 0).cross(nodes[i].position - axis);
    EXPECT_LT((pm.displacement.values.row(i).transpose() - expected).norm(), 1e-15);
    ASSERT_TRUE(pm.displacement.rotational);
    EXPECT_DOUBLE_EQ((*pm.displacement.rotational)(i, 1), 0.01);
  }
}

TEST(Motion, RandomCoordinatesAreColumnWeightedSum) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<GridNode> nodes{{4, Vec3(0, 0, 0)}, {7, Vec3(1, 0, 0)}, {9, Vec3(0, 1, 1)}};
  Eigen::MatrixXd shapes = Eigen::MatrixXd::NullaryExpr(18, 2, [&] { return u(rng); });
  const StructuralModel m = make_diagonal_model(nodes, shapes, Eigen::Vector2d(1.0, 2.0));
  ModalState x = ModalState::zeros(2);
  x.q << u(rng), u(rng);
  x.qdot << u(rng), u(rng);
  const PhysicalMotion pm = physical_motion(m, x);
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double d = shapes(6 * i + c, 0) * x.q[0] + shapes(6 * i + c, 1) * x.q[1];
      const double v = shapes(6 * i + c, 0) * x.qdot[0] + shapes(6 * i + c, 1) * x.qdot[1];
      EXPECT_NEAR(pm.displacement.values(i, c), d, 1e-15);
      EXPECT_NEAR(pm.velocity.values(i, c), v, 1e-15);
    }
  }
}

TEST(ModalSolver, AdvanceRestartsFromCheckpoint) {
  const StructuralModel m = two_mode_coupled();
  ModalSolver solver(m, make_system(m, 0.01), IntegratorParams::from_spectral_radius(0.9));
  ModalState x0 = ModalState::zeros(2);
  x0.q << 0.01, 0.0;
  solver.set_state(x0);
  solver.checkpoint();
  solver.apply_generalized_force(Eigen::Vector2d(1.0, 2.0));
  const ModalState first = solver.advance(1e-3);
  solver.restore();
  solver.apply_generalized_force(Eigen::Vector2d(1.0, 2.0));
  const ModalState second = solver.advance(1e-3);
  EXPECT_EQ(first.q, second.q);
  EXPECT_DOUBLE_EQ(second.time, 1e-3);
}
