#pragma once

#include "aerocouple/config.hpp"
#include "aerocouple/field.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace aerocouple {

/// Boundary motion handed to the fluid side. Rows follow interface_points().
/// `velocity` and `acceleration` are the structural rates interpolated onto the
/// surface; `grid_velocity` is the finite-difference mesh velocity.
struct FluidMotion {
  Eigen::MatrixX3d displacement;
  Eigen::MatrixX3d velocity;
  Eigen::MatrixX3d acceleration;
  Eigen::MatrixX3d grid_velocity;

  static FluidMotion zeros(Eigen::Index n);
};

/// Closed or open surface sampled at panel centres.
struct SurfaceMesh {
  PointCloud points;
  Eigen::VectorXd areas;
  Eigen::MatrixX3d normals;  // outward unit normals

  void validate() const;
};

/// NACA 0012 contour (closed trailing edge) in the x-z plane, cosine spacing.
/// `contour_points` panels; areas are panel length times span.
SurfaceMesh make_airfoil_surface(const TypicalSectionAeroConfig& section);

/// Axis-aligned cube, `divisions` x `divisions` panels per face.
SurfaceMesh make_cube_surface(const Eigen::Vector3d& center, double size, int divisions);

/// Fluid side of the coupling.
///
/// Usage per step: checkpoint(); then, per inner iteration, restore(),
/// set_motion(), advance(dt) and forces(). Advancing twice from the same
/// checkpoint with the same motion gives bitwise-identical forces.
class AeroSolver {
public:
  virtual ~AeroSolver() = default;

  virtual const PointCloud& interface_points() const = 0;
  virtual const Eigen::VectorXd& interface_areas() const = 0;
  bool is_halo(int) const { return false; }

  /// Resets internal state to t = time at rest.
  virtual void initialize(double time) = 0;
  virtual void finalize() {}

  virtual void set_motion(const FluidMotion& motion) = 0;
  /// Recomputes forces at the current time for the current motion.
  virtual void evaluate() = 0;
  virtual void advance(double dt) = 0;
  /// Converged steady solution for the current motion (rates ignored).
  virtual void solve_steady() = 0;

  virtual const InterfaceField& forces() const = 0;
  virtual double time() const = 0;

  virtual void checkpoint() = 0;
  virtual void restore() = 0;

  /// Scalar outputs logged once per accepted step.
  virtual std::vector<std::string> monitor_names() const = 0;
  virtual std::vector<double> monitors() const = 0;

  /// Force snapshot "id,x,y,z,fx,fy,fz".
  void write_solution(std::ostream& out) const;
};

/// Rigid typical section on an airfoil contour.
///
/// Plunge h (up), pitch theta (nose-up, about the axis) and their rates are
/// recovered by a least-squares rigid fit of the surface motion. Lift and
/// moment are spread over the contour as a vertical load linear in x, so any
/// transfer that reproduces affine fields hands the exact L and M to the structure.
class TypicalSectionSolver final : public AeroSolver {
public:
  enum class Theory { QuasiSteady, Unsteady };

  TypicalSectionSolver(const TypicalSectionAeroConfig& section, Theory theory);

  const PointCloud& interface_points() const override { return surface_.points; }
  const Eigen::VectorXd& interface_areas() const override { return surface_.areas; }
  const SurfaceMesh& surface() const { return surface_; }

  void initialize(double time) override;
  void set_motion(const FluidMotion& motion) override;
  void evaluate() override;
  void advance(double dt) override;
  void solve_steady() override;

  const InterfaceField& forces() const override { return state_.forces; }
  double time() const override { return state_.time; }

  void checkpoint() override { saved_ = state_; }
  void restore() override { state_ = saved_; }

  std::vector<std::string> monitor_names() const override;
  std::vector<double> monitors() const override;

  double lift() const { return state_.lift; }
  double moment() const { return state_.moment; }
  double lift_coefficient() const;
  double moment_coefficient() const;
  double plunge() const { return state_.current.pos[1]; }
  double pitch() const { return state_.current.pos[2]; }
  const Eigen::Vector2d& lag_states() const { return state_.lag; }

  /// Rigid (ux, h, theta) of a surface displacement field.
  Eigen::Vector3d rigid_fit(const Eigen::MatrixX3d& field) const;

private:
  struct Kinematics {
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();  // ux, h, theta
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  };
  struct State {
    double time = 0.0;
    Kinematics current;
    double w = 0.0;
    double wdot = 0.0;
    Eigen::Vector2d lag = Eigen::Vector2d::Zero();
    double lift = 0.0;
    double moment = 0.0;
    InterfaceField forces;
  };

  Kinematics kinematics(const FluidMotion& motion) const;
  double downwash(const Kinematics& k) const;
  double downwash_rate(const Kinematics& k) const;
  void update_loads(const Kinematics& k);

  TypicalSectionAeroConfig section_;
  Theory theory_;
  SurfaceMesh surface_;
  double b_ = 0.5;
  double a_ = -0.5;
  double axis_x_ = 0.25;  // global x of the rotation axis
  double axis_z_ = 0.0;
  Eigen::MatrixXd fit_;   // 3 x 2N least-squares rigid fit
  Eigen::Matrix2d load_basis_inverse_;
  Kinematics pending_;
  State state_;
  State saved_;
};

/// Prescribed pressure p(x, t) = (p0 + g . x)(1 + rate t) acting on a surface,
/// evaluated on the deformed positions; nodal force -p A n.
class SyntheticPressureSolver final : public AeroSolver {
public:
  SyntheticPressureSolver(SurfaceMesh surface, const PressureLawConfig& law);

  const PointCloud& interface_points() const override { return surface_.points; }
  const Eigen::VectorXd& interface_areas() const override { return surface_.areas; }

  void initialize(double time) override;
  void set_motion(const FluidMotion& motion) override { pending_ = motion.displacement; }
  void evaluate() override;
  void advance(double dt) override;
  void solve_steady() override { evaluate(); }

  const InterfaceField& forces() const override { return state_.forces; }
  double time() const override { return state_.time; }

  void checkpoint() override { saved_ = state_; }
  void restore() override { state_ = saved_; }

  std::vector<std::string> monitor_names() const override;
  std::vector<double> monitors() const override;

  double pressure(const Eigen::Vector3d& x, double t) const;

private:
  struct State {
    double time = 0.0;
    InterfaceField forces;
  };

  SurfaceMesh surface_;
  PressureLawConfig law_;
  Eigen::MatrixX3d pending_;
  State state_;
  State saved_;
};

std::unique_ptr<AeroSolver> make_aero_solver(const CouplingConfig& config);

}  // namespace aerocouple
