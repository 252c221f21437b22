#include "aerocouple/aero.hpp"

#include "aerocouple/error.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace aerocouple {

FluidMotion FluidMotion::zeros(Eigen::Index n) {
  FluidMotion m;
  m.displacement = Eigen::MatrixX3d::Zero(n, 3);
  m.velocity = m.displacement;
  m.acceleration = m.displacement;
  m.grid_velocity = m.displacement;
  return m;
}

void SurfaceMesh::validate() const {
  const Eigen::Index n = points.size();
  if (n == 0) throw ValidationError("surface has no points");
  if (areas.size() != n) throw ValidationError("surface is missing panel areas");
  if (normals.rows() != n) throw ValidationError("surface is missing normals");
  if (!(areas.array() > 0.0).all()) throw ValidationError("surface panel areas must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(normals.row(i).norm() - 1.0) > 1e-8) throw ValidationError("surface normals must be unit vectors");
  }
}

namespace {

double naca0012_half_thickness(double xi) {
  return 0.6 * (0.2969 * std::sqrt(xi) - 0.1260 * xi - 0.3516 * xi * xi + 0.2843 * xi * xi * xi -
                0.1036 * xi * xi * xi * xi);
}

// phi_k(z) = int_0^1 e^{(1-u) z} u^{k-1} / (k-1)! du, k = 1..4
std::array<double, 4> phi_functions(double z) {
  std::array<double, 4> phi{};
  if (std::abs(z) < 1.0) {
    for (int k = 1; k <= 4; ++k) {
      double term = 1.0;
      for (int m = 1; m <= k; ++m) term /= m;
      double sum = 0.0;
      for (int m = 0; m < 30; ++m) {
        sum += term;
        term *= z / (m + k + 1);
      }
      phi[k - 1] = sum;
    }
    return phi;
  }
  double prev = std::exp(z);
  double factorial = 1.0;
  for (int k = 1; k <= 4; ++k) {
    prev = (prev - 1.0 / factorial) / z;
    phi[k - 1] = prev;
    factorial *= k;
  }
  return phi;
}

// Exact solution of x' = lambda (gain w(t) - x) over [0, h] with w the cubic
// Hermite interpolant of (w0, w0dot) and (w1, w1dot).
double integrate_lag(double x0, double lambda, double gain, double h, double w0, double w0dot, double w1,
                     double w1dot) {
  if (lambda == 0.0) return x0;
  const double z = -lambda * h;
  const auto phi = phi_functions(z);
  const double c0 = w0;
  const double c1 = w0dot;
  const double c2 = (3.0 * (w1 - w0) / h - 2.0 * w0dot - w1dot) / h;
  const double c3 = (2.0 * (w0 - w1) / h + w0dot + w1dot) / (h * h);
  const double integral =
      h * (c0 * phi[0] + c1 * h * phi[1] + 2.0 * c2 * h * h * phi[2] + 6.0 * c3 * h * h * h * phi[3]);
  return std::exp(z) * x0 + lambda * gain * integral;
}

}  // namespace

SurfaceMesh make_airfoil_surface(const TypicalSectionAeroConfig& section) {
  const int n = section.contour_points;
  if (n < 8 || n % 2 != 0) throw ValidationError("airfoil contour needs an even number of points, at least 8");
  if (!(section.chord > 0.0) || !(section.span > 0.0)) throw ValidationError("chord and span must be positive");
  const int half = n / 2;
  const double c = section.chord;

  std::vector<Eigen::Vector2d> vertices;  // (x, z) from the leading edge, counter-clockwise from the trailing edge
  vertices.reserve(n);
  const auto station = [&](int j) { return 0.5 * c * (1.0 - std::cos(std::numbers::pi * j / half)); };
  for (int j = half; j >= 0; --j) {
    const double x = station(j);
    vertices.emplace_back(x, c * naca0012_half_thickness(x / c));
  }
  for (int j = 1; j < half; ++j) {
    const double x = station(j);
    vertices.emplace_back(x, -c * naca0012_half_thickness(x / c));
  }
  vertices.front().y() = 0.0;

  SurfaceMesh mesh;
  mesh.points.positions.resize(n, 3);
  mesh.areas.resize(n);
  mesh.normals.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p0 = vertices[i];
    const Eigen::Vector2d& p1 = vertices[(i + 1) % n];
    const Eigen::Vector2d mid = 0.5 * (p0 + p1);
    const Eigen::Vector2d d = p1 - p0;
    const double length = d.norm();
    mesh.points.ids.push_back(i + 1);
    mesh.points.positions.row(i) = (section.leading_edge + Eigen::Vector3d(mid.x(), 0.0, mid.y())).transpose();
    mesh.areas[i] = length * section.span;
    mesh.normals.row(i) << d.y() / length, 0.0, -d.x() / length;
  }
  return mesh;
}

SurfaceMesh make_cube_surface(const Eigen::Vector3d& center, double size, int divisions) {
  if (!(size > 0.0)) throw ValidationError("cube size must be positive");
  if (divisions < 1) throw ValidationError("cube divisions must be at least 1");
  const int per_face = divisions * divisions;
  SurfaceMesh mesh;
  mesh.points.positions.resize(6 * per_face, 3);
  mesh.areas = Eigen::VectorXd::Constant(6 * per_face, (size / divisions) * (size / divisions));
  mesh.normals.resize(6 * per_face, 3);
  int row = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const int u_axis = (axis + 1) % 3;
    const int v_axis = (axis + 2) % 3;
    for (int side = -1; side <= 1; side += 2) {
      for (int i = 0; i < divisions; ++i) {
        for (int j = 0; j < divisions; ++j) {
          Eigen::Vector3d p = center;
          p[axis] += 0.5 * side * size;
          p[u_axis] += size * ((i + 0.5) / divisions - 0.5);
          p[v_axis] += size * ((j + 0.5) / divisions - 0.5);
          Eigen::Vector3d normal = Eigen::Vector3d::Zero();
          normal[axis] = side;
          mesh.points.ids.push_back(row + 1);
          mesh.points.positions.row(row) = p.transpose();
          mesh.normals.row(row) = normal.transpose();
          ++row;
        }
      }
    }
  }
  return mesh;
}

void AeroSolver::write_solution(std::ostream& out) const {
  const InterfaceField& f = forces();
  const PointCloud& cloud = interface_points();
  out << "id,x,y,z,fx,fy,fz\n";
  char buf[256];
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", cloud.ids[i], cloud.positions(i, 0),
                  cloud.positions(i, 1), cloud.positions(i, 2), f.values(i, 0), f.values(i, 1), f.values(i, 2));
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Typical section

TypicalSectionSolver::TypicalSectionSolver(const TypicalSectionAeroConfig& section, Theory theory)
    : section_(section), theory_(theory), surface_(make_airfoil_surface(section)) {
  if (!(section.density >= 0.0)) throw ValidationError("fluid density must be non-negative");
  if (!(section.velocity >= 0.0)) throw ValidationError("free-stream velocity must be non-negative");
  const WagnerCoefficients& w = section.wagner;
  if (!(w.b1 > 0.0) || !(w.b2 > 0.0) || !(w.a1 + w.a2 < 1.0)) {
    throw ValidationError("Wagner coefficients need b1, b2 > 0 and A1 + A2 < 1");
  }
  b_ = 0.5 * section.chord;
  a_ = (section.axis() - b_) / b_;
  axis_x_ = section.leading_edge.x() + section.axis();
  axis_z_ = section.leading_edge.z();

  const Eigen::Index n = surface_.points.size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = surface_.points.positions(i, 0) - axis_x_;
    const double z = surface_.points.positions(i, 2) - axis_z_;
    g(2 * i, 0) = 1.0;
    g(2 * i, 2) = z;
    g(2 * i + 1, 1) = 1.0;
    g(2 * i + 1, 2) = -x;
  }
  fit_ = (g.transpose() * g).ldlt().solve(g.transpose());

  Eigen::Matrix2d basis;
  const Eigen::VectorXd xi = surface_.points.positions.col(0).array() - axis_x_;
  const double s0 = surface_.areas.sum();
  const double s1 = surface_.areas.dot(xi);
  const double s2 = surface_.areas.dot(xi.cwiseProduct(xi));
  basis << s0, s1, -s1, -s2;
  load_basis_inverse_ = basis.inverse();

  initialize(0.0);
}

void TypicalSectionSolver::initialize(double time) {
  state_ = State{};
  state_.time = time;
  state_.forces = InterfaceField::zeros(surface_.points, FieldKind::Force);
  pending_ = Kinematics{};
  update_loads(pending_);
  saved_ = state_;
}

Eigen::Vector3d TypicalSectionSolver::rigid_fit(const Eigen::MatrixX3d& field) const {
  if (field.rows() != surface_.points.size()) throw InvalidArgument("surface motion has the wrong number of points");
  Eigen::VectorXd stacked(2 * field.rows());
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    stacked[2 * i] = field(i, 0);
    stacked[2 * i + 1] = field(i, 2);
  }
  return fit_ * stacked;
}

TypicalSectionSolver::Kinematics TypicalSectionSolver::kinematics(const FluidMotion& motion) const {
  Kinematics k;
  k.pos = rigid_fit(motion.displacement);
  k.vel = rigid_fit(motion.velocity);
  k.acc = rigid_fit(motion.acceleration);
  return k;
}

void TypicalSectionSolver::set_motion(const FluidMotion& motion) {
  const Eigen::Index n = surface_.points.size();
  if (motion.displacement.rows() != n || motion.velocity.rows() != n || motion.acceleration.rows() != n) {
    throw InvalidArgument("surface motion has the wrong number of points");
  }
  if (!motion.displacement.allFinite() || !motion.velocity.allFinite() || !motion.acceleration.allFinite()) {
    throw NumericError("surface motion contains non-finite values");
  }
  pending_ = kinematics(motion);
}

double TypicalSectionSolver::downwash(const Kinematics& k) const {
  const double alpha = section_.alpha_deg * std::numbers::pi / 180.0;
  return -k.vel[1] + section_.velocity * (alpha + k.pos[2]) + b_ * (0.5 - a_) * k.vel[2];
}

double TypicalSectionSolver::downwash_rate(const Kinematics& k) const {
  return -k.acc[1] + section_.velocity * k.vel[2] + b_ * (0.5 - a_) * k.acc[2];
}

void TypicalSectionSolver::update_loads(const Kinematics& k) {
  const double pi = std::numbers::pi;
  const double rho = section_.density;
  const double u = section_.velocity;
  const double s = section_.span;
  const double w = downwash(k);
  state_.current = k;
  state_.w = w;
  state_.wdot = downwash_rate(k);

  double lift = 0.0;
  double moment = 0.0;
  if (theory_ == Theory::QuasiSteady) {
    lift = 2.0 * pi * rho * u * b_ * s * w;
    moment = b_ * (a_ + 0.5) * lift;
  } else {
    const WagnerCoefficients& c = section_.wagner;
    const double w_eff = (1.0 - c.a1 - c.a2) * w + state_.lag[0] + state_.lag[1];
    const double circulatory = 2.0 * pi * rho * u * b_ * s * w_eff;
    const double mass = pi * rho * b_ * b_ * s;
    lift = mass * (-k.acc[1] + u * k.vel[2] - b_ * a_ * k.acc[2]) + circulatory;
    moment = mass * (-b_ * a_ * k.acc[1] - u * b_ * (0.5 - a_) * k.vel[2] - b_ * b_ * (0.125 + a_ * a_) * k.acc[2]) +
             b_ * (a_ + 0.5) * circulatory;
  }
  state_.lift = lift;
  state_.moment = moment;

  const Eigen::Vector2d coeff = load_basis_inverse_ * Eigen::Vector2d(lift, moment);
  for (Eigen::Index i = 0; i < surface_.points.size(); ++i) {
    const double xi = surface_.points.positions(i, 0) - axis_x_;
    state_.forces.values(i, 0) = 0.0;
    state_.forces.values(i, 1) = 0.0;
    state_.forces.values(i, 2) = surface_.areas[i] * (coeff[0] + coeff[1] * xi);
  }
}

void TypicalSectionSolver::evaluate() { update_loads(pending_); }

void TypicalSectionSolver::advance(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("aerodynamic time step must be positive");
  if (theory_ == Theory::Unsteady) {
    const WagnerCoefficients& c = section_.wagner;
    const double w0 = state_.w;
    const double w0dot = state_.wdot;
    const double w1 = downwash(pending_);
    const double w1dot = downwash_rate(pending_);
    const double rate = section_.velocity / b_;
    state_.lag[0] = integrate_lag(state_.lag[0], rate * c.b1, c.a1, dt, w0, w0dot, w1, w1dot);
    state_.lag[1] = integrate_lag(state_.lag[1], rate * c.b2, c.a2, dt, w0, w0dot, w1, w1dot);
  }
  state_.time += dt;
  update_loads(pending_);
}

void TypicalSectionSolver::solve_steady() {
  Kinematics still = pending_;
  still.vel.setZero();
  still.acc.setZero();
  const double w = downwash(still);
  state_.lag = Eigen::Vector2d(section_.wagner.a1 * w, section_.wagner.a2 * w);
  update_loads(still);
}

double TypicalSectionSolver::lift_coefficient() const {
  const double q = 0.5 * section_.density * section_.velocity * section_.velocity;
  const double area = section_.chord * section_.span;
  return q > 0.0 ? state_.lift / (q * area) : 0.0;
}

double TypicalSectionSolver::moment_coefficient() const {
  const double q = 0.5 * section_.density * section_.velocity * section_.velocity;
  const double area = section_.chord * section_.span;
  return q > 0.0 ? state_.moment / (q * area * section_.chord) : 0.0;
}

std::vector<std::string> TypicalSectionSolver::monitor_names() const {
  return {"lift", "moment", "cl", "cm", "plunge", "pitch"};
}

std::vector<double> TypicalSectionSolver::monitors() const {
  return {state_.lift, state_.moment, lift_coefficient(), moment_coefficient(), plunge(), pitch()};
}

// ---------------------------------------------------------------------------
// Synthetic pressure

SyntheticPressureSolver::SyntheticPressureSolver(SurfaceMesh surface, const PressureLawConfig& law)
    : surface_(std::move(surface)), law_(law) {
  surface_.validate();
  initialize(0.0);
}

double SyntheticPressureSolver::pressure(const Eigen::Vector3d& x, double t) const {
  return (law_.p0 + law_.gradient.dot(x)) * (1.0 + law_.rate * t);
}

void SyntheticPressureSolver::initialize(double time) {
  state_.time = time;
  state_.forces = InterfaceField::zeros(surface_.points, FieldKind::Force);
  pending_ = Eigen::MatrixX3d::Zero(surface_.points.size(), 3);
  evaluate();
  saved_ = state_;
}

void SyntheticPressureSolver::evaluate() {
  if (pending_.rows() != surface_.points.size()) throw InvalidArgument("surface motion has the wrong number of points");
  for (Eigen::Index i = 0; i < surface_.points.size(); ++i) {
    const Eigen::Vector3d x = (surface_.points.positions.row(i) + pending_.row(i)).transpose();
    const double p = pressure(x, state_.time);
    state_.forces.values.row(i) = -p * surface_.areas[i] * surface_.normals.row(i);
  }
}

void SyntheticPressureSolver::advance(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("aerodynamic time step must be positive");
  state_.time += dt;
  evaluate();
}

std::vector<std::string> SyntheticPressureSolver::monitor_names() const { return {"fx", "fy", "fz"}; }

std::vector<double> SyntheticPressureSolver::monitors() const {
  const Eigen::RowVector3d total = state_.forces.values.colwise().sum();
  return {total[0], total[1], total[2]};
}

std::unique_ptr<AeroSolver> make_aero_solver(const CouplingConfig& config) {
  switch (config.aero_model) {
    case AeroModel::QuasiSteady:
      return std::make_unique<TypicalSectionSolver>(config.section, TypicalSectionSolver::Theory::QuasiSteady);
    case AeroModel::Unsteady:
      return std::make_unique<TypicalSectionSolver>(config.section, TypicalSectionSolver::Theory::Unsteady);
    case AeroModel::SyntheticPressure: {
      const PressureLawConfig& p = config.pressure;
      SurfaceMesh mesh = p.surface == SurfaceKind::Cube ? make_cube_surface(p.cube_center, p.cube_size, p.cube_divisions)
                                                        : make_airfoil_surface(config.section);
      return std::make_unique<SyntheticPressureSolver>(std::move(mesh), p);
    }
  }
  throw InvalidArgument("unknown aerodynamic model");
}

}  // namespace aerocouple
