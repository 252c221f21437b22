#pragma once

#include "aerocouple/field.hpp"
#include "aerocouple/model.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <utility>

namespace aerocouple {

/// Generalized coordinates at one time level. `force` is the generalized force
/// acting at `time`; the integrator needs it for the alpha-weighted balance.
struct ModalState {
  double time = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  Eigen::VectorXd qddot;
  Eigen::VectorXd force;

  static ModalState zeros(Eigen::Index n, double time = 0.0);
};

/// Generalized-alpha parameters derived from the spectral radius at infinity.
struct IntegratorParams {
  double rho_inf = 1.0;
  double alpha_m = 0.5;
  double alpha_f = 0.5;
  double beta = 0.25;
  double gamma = 0.5;

  static IntegratorParams from_spectral_radius(double rho_inf);
  /// Average-acceleration Newmark (alpha_m = alpha_f = 0).
  static IntegratorParams newmark();
};

/// Assembled generalized matrices used by the integrator.
struct StructuralSystem {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd damping;
  Eigen::MatrixXd stiffness;

  Eigen::Index size() const { return mass.rows(); }
};

/// Damping matrix from the model's damping specification.
///
/// Diagonal models get diag(2 xi_i omega_i). Otherwise the (K, M) eigenproblem
/// is solved, every eigenmode receives 2 xi d_i M~_ii and the result is mapped back
/// with V^-T C~ V^-1. Each eigenmode takes the ratio of the generalized coordinate
/// that dominates its eigenvector.
Eigen::MatrixXd build_damping(const StructuralModel& model);

/// Same construction with explicit per-mode ratios; `force_modal_path` routes
/// diagonal models through the eigenanalysis as well.
Eigen::MatrixXd build_damping(const StructuralModel& model, const Eigen::VectorXd& ratios,
                              bool force_modal_path = false);

/// M, C, K with an optional uniform damping ratio overriding the model's.
StructuralSystem make_system(const StructuralModel& model, std::optional<double> uniform_damping = std::nullopt);

/// F~ = U^T F over translations and, when present, moments.
Eigen::VectorXd generalized_force(const StructuralModel& model, const InterfaceField& nodal_loads);

/// Acceleration satisfying the equations of motion at the given state and force.
Eigen::VectorXd equilibrium_acceleration(const StructuralSystem& system, const ModalState& state);

/// Advances one step from `state` (at t_n) with generalized force `force_next` at t_{n+1}.
/// Pure: repeated calls with the same arguments give bit-identical results.
ModalState step_dynamic(const StructuralSystem& system, const ModalState& state, const Eigen::VectorXd& force_next,
                        double dt, const IntegratorParams& params);

/// Residual of the alpha-weighted balance between two consecutive states.
Eigen::VectorXd step_residual(const StructuralSystem& system, const ModalState& from, const ModalState& to,
                              const IntegratorParams& params);

/// Velocity and acceleration implied by the Newmark relations for a given q at t_{n+1}.
ModalState kinematics_for_displacement(const ModalState& state, const Eigen::VectorXd& q_next, double dt,
                                       const IntegratorParams& params);

struct SteadyOptions {
  int max_pseudo_steps = 2000;
  double relative_tolerance = 1e-12;
};

/// K q = F~ reached by damped pseudo-time stepping (critical modal damping,
/// dt = 10 / min(omega), rho_inf = 0).
ModalState solve_steady(const StructuralSystem& system, const Eigen::VectorXd& force,
                        const SteadyOptions& options = {});

struct PhysicalMotion {
  InterfaceField displacement;
  InterfaceField velocity;
  InterfaceField acceleration;
};

/// u = U q and its rates on the structural nodes; rotations go to `rotational`.
PhysicalMotion physical_motion(const StructuralModel& model, const ModalState& state);

/// Structural side of the solver contract, driven by the coupling loop.
class ModalSolver {
public:
  ModalSolver(StructuralModel model, const StructuralSystem& system, IntegratorParams params);

  const StructuralModel& model() const { return model_; }
  const StructuralSystem& system() const { return system_; }
  const IntegratorParams& params() const { return params_; }

  PointCloud interface_points() const;
  bool is_halo(int) const { return false; }

  /// Sets the current state; acceleration is made consistent with `force` when requested.
  void set_state(ModalState state);
  const ModalState& state() const { return current_; }

  void apply_loads(const InterfaceField& nodal_loads);
  void apply_generalized_force(Eigen::VectorXd force);
  const Eigen::VectorXd& generalized_force() const { return pending_force_; }

  /// Integrates from the checkpoint to checkpoint.time + dt with the applied loads.
  const ModalState& advance(double dt);
  const ModalState& solve_steady(const SteadyOptions& options);

  void checkpoint();
  void restore();
  const ModalState& checkpointed() const { return saved_; }

  PhysicalMotion motion() const { return physical_motion(model_, current_); }
  void write_solution(std::ostream& out) const;

private:
  StructuralModel model_;
  StructuralSystem system_;
  IntegratorParams params_;
  ModalState current_;
  ModalState saved_;
  Eigen::VectorXd pending_force_;
};

}  // namespace aerocouple
