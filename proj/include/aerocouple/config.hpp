#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aerocouple {

enum class SimulationMode { SteadyImposed, SteadyCoupled, UnsteadyImposed, UnsteadyCoupled };
enum class Predictor { None, Linear };
enum class TransferMode { Consistent, Conservative };
enum class AeroModel { QuasiSteady, Unsteady, SyntheticPressure };
enum class SurfaceKind { Airfoil, Cube };

bool is_steady(SimulationMode mode);
bool is_imposed(SimulationMode mode);
std::string_view to_string(SimulationMode mode);

/// Two-lag rational approximation of the Wagner function:
/// phi(s) = 1 - a1 exp(-b1 s) - a2 exp(-b2 s), s in semichords travelled.
struct WagnerCoefficients {
  double a1 = 0.165;
  double b1 = 0.0455;
  double a2 = 0.335;
  double b2 = 0.3;
};

struct TypicalSectionAeroConfig {
  double density = 1.225;        // kg/m^3
  double velocity = 0.0;         // m/s
  double alpha_deg = 0.0;        // geometric angle of attack
  double chord = 1.0;            // m
  double span = 1.0;             // m
  std::optional<double> axis_x;  // rotation axis, m from the leading edge (default c/4)
  Eigen::Vector3d leading_edge = Eigen::Vector3d::Zero();
  int contour_points = 200;
  WagnerCoefficients wagner;

  double axis() const { return axis_x.value_or(0.25 * chord); }
};

/// p(x, t) = (p0 + gradient . x) * (1 + rate * t)
struct PressureLawConfig {
  double p0 = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  double rate = 0.0;
  SurfaceKind surface = SurfaceKind::Cube;
  Eigen::Vector3d cube_center = Eigen::Vector3d::Zero();
  double cube_size = 1.0;
  int cube_divisions = 4;
};

/// Per-generalized-DOF imposed signal: bias + amplitude * sin(2 pi f t + phase).
struct ImposedMotionConfig {
  std::vector<double> amplitude;
  std::vector<double> frequency_hz;
  std::vector<double> bias;
  std::vector<double> phase_deg;
  std::optional<std::filesystem::path> table;  // CSV "time,q_1,...,q_n"
};

struct CouplingConfig {
  SimulationMode mode = SimulationMode::SteadyCoupled;
  double dt = 1e-3;
  int n_steps = 1000;
  double fsi_tolerance = 1e-6;
  int max_fsi_iters = 50;
  double aitken_omega0 = 0.5;
  double aitken_omega_max = 1.0;
  Predictor predictor = Predictor::Linear;
  std::optional<double> rbf_support_radius;
  TransferMode transfer_mode = TransferMode::Consistent;
  std::optional<double> structural_damping;
  double spectral_radius = 1.0;
  int steady_max_pseudo_steps = 2000;
  double transient_cut = 0.2;

  AeroModel aero_model = AeroModel::QuasiSteady;
  TypicalSectionAeroConfig section;
  PressureLawConfig pressure;

  ImposedMotionConfig imposed;
  std::vector<double> initial_q;
  std::vector<double> initial_qdot;

  /// Non-fatal diagnostics collected while parsing.
  std::vector<std::string> warnings;

  /// Throws ValidationError when the invariants do not hold.
  void validate() const;
};

CouplingConfig parse_config(std::string_view text);
CouplingConfig load_config(const std::filesystem::path& path);

/// Applies one "KEY = value" assignment; used by the parser and by parameter sweeps.
void set_config_value(CouplingConfig& config, std::string_view key, std::string_view value);

}  // namespace aerocouple
