#include "aerocouple/aero.hpp"
#include "aerocouple/error.hpp"
#include "aerocouple/model.hpp"
#include "aerocouple/structural.hpp"
#include "aerocouple/transfer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace aerocouple;

namespace {

PointCloud cloud(const Eigen::MatrixX3d& xyz) {
  PointCloud c;
  c.positions = xyz;
  for (Eigen::Index i = 0; i < xyz.rows(); ++i) c.ids.push_back(static_cast<int>(i + 1));
  return c;
}

PointCloud naca_structure() {
  Eigen::MatrixX3d xyz(5, 3);
  xyz << 0.25, 0, 0, 0, 0, 0, 1, 0, 0, 0.25, 0, 0.06, 0.25, 0, -0.06;
  return cloud(xyz);
}

SurfaceMesh naca_surface() {
  TypicalSectionAeroConfig s;
  s.contour_points = 200;
  return make_airfoil_surface(s);
}

// Structural points scattered inside the unit cube centred at the origin.
PointCloud interior_cloud(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  return cloud(Eigen::MatrixX3d::NullaryExpr(n, 3, [&] { return u(rng); }));
}

Eigen::MatrixX3d affine(const Eigen::MatrixX3d& x, const Eigen::Matrix3d& a, const Eigen::RowVector3d& t) {
  return (x * a.transpose()).rowwise() + t;
}

double relative_error(const Eigen::MatrixX3d& got, const Eigen::MatrixX3d& want) {
  return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

InterfaceField field_on(const PointCloud& c, const Eigen::MatrixX3d& values, FieldKind kind) {
  InterfaceField f = InterfaceField::zeros(c, kind);
  f.values = values;
  return f;
}

}  // namespace

TEST(Wendland, KernelValues) {
  EXPECT_EQ(wendland_c2(0.0), 1.0);
  EXPECT_EQ(wendland_c2(1.0), 0.0);
  EXPECT_EQ(wendland_c2(2.5), 0.0);
  EXPECT_DOUBLE_EQ(wendland_c2(0.5), 0.0625 * 3.0);
  // C2 at the support edge: value and first derivative vanish.
  const double h = 1e-4;
  EXPECT_NEAR((wendland_c2(1.0) - wendland_c2(1.0 - h)) / h, 0.0, 1e-9);
}

TEST(RbfMap, TetrahedronIsNonsingular) {
  Eigen::MatrixX3d tet(4, 3);
  tet << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  for (double r : {0.5, 1.5, 10.0}) {
    const RbfMap map = build_map(cloud(tet), interior_cloud(10, 1), r);
    EXPECT_EQ(map.dimension(), 3);
    EXPECT_TRUE(map.matrix().allFinite());
  }
}

TEST(RbfMap, CoplanarSourceInThreeDimensionsRejected) {
  Eigen::MatrixX3d plane(4, 3);
  plane << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0;
  Eigen::MatrixX3d target(2, 3);
  target << 0.5, 0.5, 0.3, 0.2, 0.1, -0.2;
  try {
    build_map(cloud(plane), cloud(target));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("coplanar"), std::string::npos);
  }
}

TEST(RbfMap, CollinearSourceInPlaneRejected) {
  Eigen::MatrixX3d line(3, 3);
  line << 0, 0, 0, 0.5, 0, 0, 1, 0, 0;
  EXPECT_THROW(build_map(cloud(line), naca_surface().points), ValidationError);
}

TEST(RbfMap, CoincidentOrTooFewPointsRejected) {
  Eigen::MatrixX3d two(2, 3);
  two << 0, 0, 0, 1, 0, 0;
  EXPECT_THROW(build_map(cloud(two), cloud(two)), ValidationError);
  Eigen::MatrixX3d dup(4, 3);
  dup << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0;
  EXPECT_THROW(build_map(cloud(dup), cloud(dup)), ValidationError);
}

TEST(RbfMap, NacaCloudToContourReproducesConstants) {
  const SurfaceMesh s = naca_surface();
  const RbfMap map = build_map(naca_structure(), s.points);
  EXPECT_EQ(map.dimension(), 2);
  const Eigen::MatrixX3d ones = Eigen::MatrixX3d::Ones(5, 3);
  EXPECT_LT(relative_error(map.interpolate(ones), Eigen::MatrixX3d::Ones(200, 3)), 1e-13);
}

TEST(RbfMap, UniformTranslationExact) {
  const SurfaceMesh s = naca_surface();
  const RbfMap map = build_map(naca_structure(), s.points);
  const Eigen::MatrixX3d shift = Eigen::RowVector3d(0, 0, 0.1).replicate(5, 1);
  const Eigen::MatrixX3d out = map.interpolate(shift);
  EXPECT_LT((out.rowwise() - Eigen::RowVector3d(0, 0, 0.1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RbfMap, LinearizedRotationReproduced) {
  const SurfaceMesh s = naca_surface();
  const PointCloud st = naca_structure();
  const RbfMap map = build_map(st, s.points);
  const Eigen::Vector3d w(0, 3.0 * std::numbers::pi / 180.0, 0);
  const Eigen::RowVector3d x0(0.25, 0, 0);
  const auto rotate = [&](const Eigen::MatrixX3d& x) {
    Eigen::MatrixX3d u(x.rows(), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) u.row(i) = w.cross((x.row(i) - x0).transpose()).transpose();
    return u;
  };
  EXPECT_LT(relative_error(map.interpolate(rotate(st.positions)), rotate(s.points.positions)), 1e-10);
}

TEST(RbfMap, AffineFieldsReproducedOnThreeDimensionalClouds) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SurfaceMesh cube = make_cube_surface(Eigen::Vector3d::Zero(), 1.0, 6);
  for (int trial = 0; trial < 5; ++trial) {
    const PointCloud src = interior_cloud(30 + 10 * trial, 100 + trial);
    const Eigen::Matrix3d a = Eigen::Matrix3d::NullaryExpr([&] { return u(rng); });
    const Eigen::RowVector3d t(u(rng), u(rng), u(rng));
    const RbfMap map = build_map(src, cube.points, 0.5 + 0.5 * trial);
    EXPECT_EQ(map.dimension(), 3);
    EXPECT_LT(relative_error(map.interpolate(affine(src.positions, a, t)), affine(cube.points.positions, a, t)),
              1e-10);
  }
}

TEST(RbfMap, AffineFieldsReproducedOnNacaForAnyRadius) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SurfaceMesh s = naca_surface();
  const PointCloud st = naca_structure();
  for (double r : {0.3, 1.0, 2.6, 20.0}) {
    Eigen::Matrix3d a = Eigen::Matrix3d::NullaryExpr([&] { return u(rng); });
    a.col(1).setZero();  // planar cloud: no information along y
    const Eigen::RowVector3d t(u(rng), u(rng), u(rng));
    const RbfMap map = build_map(st, s.points, r);
    EXPECT_LT(relative_error(map.interpolate(affine(st.positions, a, t)), affine(s.points.positions, a, t)), 1e-10)
        << "radius " << r;
  }
}

TEST(RbfMap, CubicBendingErrorDecreasesWithRefinement) {
  // Wing-like box: chord 1, span 4, two skins 0.1 apart.
  const auto wing = [](int chordwise, int spanwise) {
    Eigen::MatrixX3d xyz(2 * chordwise * spanwise, 3);
    Eigen::Index k = 0;
    for (int s = 0; s < 2; ++s) {
      for (int j = 0; j < spanwise; ++j) {
        for (int i = 0; i < chordwise; ++i) {
          xyz.row(k++) << i / (chordwise - 1.0), 4.0 * j / (spanwise - 1.0), s ? 0.05 : -0.05;
        }
      }
    }
    return cloud(xyz);
  };
  const auto bending = [](const Eigen::MatrixX3d& x) {
    Eigen::MatrixX3d u = Eigen::MatrixX3d::Zero(x.rows(), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double eta = x(i, 1) / 4.0;
      u(i, 2) = 0.3 * eta * eta * eta + 0.05 * eta * x(i, 0);
    }
    return u;
  };
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(0.0, 4.0), uz(-0.05, 0.05);
  Eigen::MatrixX3d probe(300, 3);
  for (Eigen::Index i = 0; i < probe.rows(); ++i) probe.row(i) << ux(rng), uy(rng), uz(rng);
  const PointCloud target = cloud(probe);

  double previous = std::numeric_limits<double>::infinity();
  for (int level : {3, 5, 9}) {
    const PointCloud src = wing(level, 2 * level - 1);
    const RbfMap map = build_map(src, target, 2.0);
    const double err = (map.interpolate(bending(src.positions)) - bending(probe)).cwiseAbs().maxCoeff();
    EXPECT_LT(err, previous) << "level " << level;
    previous = err;
  }
}

TEST(RbfMap, InterpolateChecksSizes) {
  const RbfMap map = build_map(naca_structure(), naca_surface().points);
  EXPECT_THROW(map.interpolate(Eigen::MatrixX3d::Zero(4, 3)), InvalidArgument);
}

TEST(LoadTransfer, ConservativeSingleForcePreservesResultant) {
  const SurfaceMesh s = naca_surface();
  const RbfMap map = build_map(naca_structure(), s.points);
  for (Eigen::Index p : {0, 57, 133, 199}) {
    Eigen::MatrixX3d f = Eigen::MatrixX3d::Zero(200, 3);
    f(p, 2) = 1.0;
    const InterfaceField out = apply_forces_conservative(map, field_on(s.points, f, FieldKind::Force));
    const Eigen::RowVector3d total = out.values.colwise().sum();
    EXPECT_NEAR(total(2), 1.0, 1e-13);
    EXPECT_NEAR(total(0), 0.0, 1e-13);
  }
}

TEST(LoadTransfer, ConservativeZeroForcesStayZero) {
  const SurfaceMesh s = naca_surface();
  const RbfMap map = build_map(naca_structure(), s.points);
  const InterfaceField out =
      apply_forces_conservative(map, field_on(s.points, Eigen::MatrixX3d::Zero(200, 3), FieldKind::Force));
  EXPECT_TRUE(out.values.isZero(0.0));
}

TEST(LoadTransfer, ConservativeRandomForcesSumAndWork) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SurfaceMesh cube = make_cube_surface(Eigen::Vector3d::Zero(), 1.0, 5);
  const PointCloud src = interior_cloud(40, 8);
  const RbfMap map = build_map(src, cube.points);
  const Eigen::MatrixX3d f = Eigen::MatrixX3d::NullaryExpr(cube.points.size(), 3, [&] { return u(rng); });
  const InterfaceField out = apply_forces_conservative(map, field_on(cube.points, f, FieldKind::Force));
  const Eigen::RowVector3d want = f.colwise().sum();
  const Eigen::RowVector3d got = out.values.colwise().sum();
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13 * f.cwiseAbs().sum());
  // Virtual work of an affine displacement field is preserved.
  const Eigen::Matrix3d a = Eigen::Matrix3d::NullaryExpr([&] { return u(rng); });
  const double w_fluid = (affine(cube.points.positions, a, Eigen::RowVector3d::Zero()).array() * f.array()).sum();
  const double w_struct = (affine(src.positions, a, Eigen::RowVector3d::Zero()).array() * out.values.array()).sum();
  EXPECT_NEAR(w_struct, w_fluid, 1e-10 * std::abs(w_fluid));
}

TEST(LoadTransfer, ConsistentAndConservativeAgreeForRigidModes) {
  // Dense structural cloud on the airfoil skin so both transfers are resolved.
  const SurfaceMesh s = naca_surface();
  const int n = 41;
  Eigen::MatrixX3d xyz(2 * n, 3);
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 * (1.0 - std::cos(std::numbers::pi * i / (n - 1.0)));
    const double t = 5.0 * 0.12 * (0.2969 * std::sqrt(x) - 0.126 * x - 0.3516 * x * x + 0.2843 * x * x * x - 0.1036 * x * x * x * x);
    xyz.row(2 * i) << x, 0, t;
    xyz.row(2 * i + 1) << x, 0, -t - 1e-3;
  }
  const PointCloud st = cloud(xyz);
  std::vector<GridNode> nodes;
  Eigen::MatrixXd modes = Eigen::MatrixXd::Zero(6 * 2 * n, 2);
  for (int i = 0; i < 2 * n; ++i) {
    nodes.push_back({i + 1, xyz.row(i).transpose()});
    modes(6 * i + 2, 0) = 1.0;
    modes(6 * i + 0, 1) = xyz(i, 2);
    modes(6 * i + 2, 1) = -(xyz(i, 0) - 0.25);
  }
  const StructuralModel model = make_diagonal_model(nodes, modes, Eigen::Vector2d(1.0, 2.0));

  // Sinusoidal chordwise pressure: suction on the upper skin, overpressure below.
  Eigen::MatrixX3d f(200, 3);
  Eigen::Vector2d exact = Eigen::Vector2d::Zero();
  for (Eigen::Index p = 0; p < 200; ++p) {
    const double x = s.points.positions(p, 0);
    const double z = s.points.positions(p, 2);
    const double pressure = 1000.0 * std::sin(std::numbers::pi * x) * (z > 0.0 ? -1.0 : 0.5);
    f.row(p) = -pressure * s.areas[p] * s.normals.row(p);
    exact[0] += f(p, 2);
    exact[1] += f(p, 0) * z - f(p, 2) * (x - 0.25);
  }
  const InterfaceField fluid = field_on(s.points, f, FieldKind::Force);
  const InterfaceTransfer conservative(st, s.points, s.areas, TransferMode::Conservative);
  const InterfaceTransfer consistent(st, s.points, s.areas, TransferMode::Consistent);
  const Eigen::VectorXd g1 = generalized_force(model, conservative.to_structure(fluid));
  const Eigen::VectorXd g2 = generalized_force(model, consistent.to_structure(fluid));
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(g1[j], exact[j], 1e-10 * std::abs(exact[j])) << "mode " << j;
    EXPECT_NEAR(g2[j], exact[j], 0.02 * std::abs(exact[j])) << "mode " << j;
  }
}

TEST(LoadTransfer, ConsistentNeedsAreas) {
  const SurfaceMesh s = naca_surface();
  EXPECT_THROW(InterfaceTransfer(naca_structure(), s.points, Eigen::VectorXd::Ones(3), TransferMode::Consistent),
               ValidationError);
}

TEST(LoadTransfer, NonFiniteForcesRejected) {
  const SurfaceMesh s = naca_surface();
  const RbfMap map = build_map(naca_structure(), s.points);
  Eigen::MatrixX3d f = Eigen::MatrixX3d::Zero(200, 3);
  f(3, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(apply_forces_conservative(map, field_on(s.points, f, FieldKind::Force)), NumericError);
}

TEST(GridVelocity, StaticMeshHasZeroVelocity) {
  const Eigen::MatrixX3d x = Eigen::MatrixX3d::Random(10, 3);
  EXPECT_TRUE(grid_velocities(x, x, 1e-3).isZero(0.0));
}

TEST(GridVelocity, UniformShift) {
  const Eigen::MatrixX3d x = Eigen::MatrixX3d::Random(10, 3);
  const Eigen::MatrixX3d y = x.rowwise() + Eigen::RowVector3d(0, 0, 1e-3);
  const Eigen::MatrixX3d v = grid_velocities(x, y, 1e-3);
  EXPECT_LT((v.col(2).array() - 1.0).abs().maxCoeff(), 1e-9);
  EXPECT_LT(v.leftCols(2).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GridVelocity, SuppressedOnFirstStepAfterInitialDeformation) {
  const Eigen::MatrixX3d x = Eigen::MatrixX3d::Zero(10, 3);
  const Eigen::MatrixX3d y = Eigen::MatrixX3d::Constant(10, 3, 0.05);
  EXPECT_TRUE(grid_velocities(x, y, 1e-3, true).isZero(0.0));
}
