#pragma once

#include "aerocouple/aero.hpp"
#include "aerocouple/config.hpp"
#include "aerocouple/history.hpp"
#include "aerocouple/structural.hpp"
#include "aerocouple/transfer.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace aerocouple {

/// Prescribed generalized coordinates: bias + amplitude sin(2 pi f t + phase)
/// per coordinate, or linear interpolation of a "time,q_1,...,q_n" table.
class MotionSignal {
public:
  static MotionSignal harmonic(Eigen::VectorXd amplitude, Eigen::VectorXd frequency_hz, Eigen::VectorXd bias,
                               Eigen::VectorXd phase_deg);
  static MotionSignal tabulated(std::vector<double> times, Eigen::MatrixXd values);
  /// Throws ValidationError when no signal is configured or sizes disagree with `num_modes`.
  static MotionSignal from_config(const ImposedMotionConfig& config, int num_modes);

  int size() const;
  /// Throws InvalidArgument outside a table's time range.
  ModalState state(double t) const;

private:
  bool table_ = false;
  Eigen::VectorXd amplitude_, frequency_, bias_, phase_;
  std::vector<double> times_;
  Eigen::MatrixXd values_;
};

/// Order 0: q_n. Order 1: q_n + dt (1.5 qdot_n - 0.5 qdot_{n-1}), with qdot_{n-1} = qdot_n
/// when only one state is available.
Eigen::VectorXd predict_displacements(std::span<const ModalState> accepted, double dt, Predictor order);

/// omega_{k+1} = -omega_k <r_k, r_{k+1} - r_k> / |r_{k+1} - r_k|^2, clamped to
/// [kMinRelaxation, omega_max]. Returns omega_k unchanged when r_{k+1} = r_k.
double aitken_relax(double omega, const Eigen::VectorXd& r_previous, const Eigen::VectorXd& r_next, double omega_max);

inline constexpr double kMinRelaxation = 1e-3;

/// Stacked physical translations U_t dq (3 per node).
Eigen::VectorXd physical_translations(const StructuralModel& model, const Eigen::VectorXd& dq);

/// RMS over nodes of the translation increment magnitude, metres.
double residual_rms(const StructuralModel& model, const Eigen::VectorXd& q_new, const Eigen::VectorXd& q_previous);

struct CouplingResult {
  std::vector<HistoryRecord> history;
  std::vector<FsiIterationRecord> iterations;
  CsvTable monitors;  // "time" followed by the aerodynamic monitor names
  ModalState final_state;
  InterfaceField fluid_forces;
  InterfaceField structural_forces;
  /// Grid velocity handed to the fluid on the first step (unsteady modes).
  Eigen::MatrixX3d first_grid_velocity;
  /// Largest inner iteration count over all steps.
  int max_step_iterations = 0;
};

/// Solvers and maps shared by the four drivers.
struct CouplingContext {
  const CouplingConfig& config;
  ModalSolver& structure;
  AeroSolver& aero;
  const InterfaceTransfer& transfer;
};

CouplingResult run_steady_imposed(const CouplingContext& ctx, const MotionSignal& signal);
CouplingResult run_steady_coupled(const CouplingContext& ctx);
CouplingResult run_unsteady_imposed(const CouplingContext& ctx, const MotionSignal& signal);
CouplingResult run_unsteady_coupled(const CouplingContext& ctx);

}  // namespace aerocouple
