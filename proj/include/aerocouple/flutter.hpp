#pragma once

#include "aerocouple/config.hpp"
#include "aerocouple/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace aerocouple {

/// Pitch-plunge typical section. Plunge h is positive up, pitch theta nose-up
/// about the axis; the centre of mass lies S_m / m downstream of the axis.
struct TypicalSectionParams {
  double mass = 1.0;            // m, kg
  double static_moment = 0.0;   // S_m, kg m
  double inertia = 1.0;         // I_f about the axis, kg m^2
  double k_h = 1.0;             // N/m
  double k_alpha = 1.0;         // N m/rad
  double c_h = 0.0;
  double c_alpha = 0.0;
  double semichord = 0.5;       // b, m
  double axis_x = 0.25;         // x_f from the leading edge, m
  double alpha = 0.0;           // geometric angle of attack, rad
  double density = 1.225;       // kg/m^3
  double velocity = 0.0;        // m/s
  double span = 1.0;            // m

  /// Parameters from chi = S_m/(m b), r_alpha^2 = I_f/(m b^2), omega_bar = omega_h/omega_alpha
  /// and mu = m/(pi rho b^2).
  static TypicalSectionParams from_nondimensional(double chi, double r_alpha, double omega_alpha, double omega_bar,
                                                  double mu, double density, double semichord, double axis_x,
                                                  double span = 1.0);

  Eigen::Matrix2d mass_matrix() const;
  Eigen::Matrix2d stiffness_matrix() const;
  Eigen::Matrix2d damping_matrix() const;

  /// Throws ValidationError unless m, I_f, b > 0 and m I_f - S_m^2 > 0.
  void validate() const;
};

/// Structural model for a rigid section: generalized coordinates (h, theta),
/// master node on the axis plus rigidly linked slaves spanning the thickness.
/// `node_positions` are rows of (x, y, z) and the first row is the master.
StructuralModel make_typical_section_model(const TypicalSectionParams& params, const Eigen::MatrixX3d& node_positions,
                                           const Eigen::Vector3d& axis_point);

struct FlutterPoint {
  double velocity = 0.0;
  Eigen::VectorXcd eigenvalues;   // all eigenvalues of the first-order system
  Eigen::VectorXd frequencies;    // Hz, oscillatory eigenvalues only (Im > 0), ascending
  Eigen::VectorXd damping;        // damping ratio -Re/|lambda|, same order

  /// Smallest damping ratio among oscillatory eigenvalues.
  double least_damping() const;
};

/// First-order system z' = A z for z = (h, theta, h', theta', x1, x2).
Eigen::MatrixXd flutter_state_matrix(const TypicalSectionParams& params, double velocity,
                                     const WagnerCoefficients& wagner);

/// p-method eigenvalues per speed. Throws NumericError when the inertia
/// including added mass is singular.
std::vector<FlutterPoint> flutter_eigen_oracle(const TypicalSectionParams& params, const WagnerCoefficients& wagner,
                                               const std::vector<double>& speeds);

/// First speed in [low, high] where the least damping crosses zero (bisection to `tolerance`).
std::optional<double> flutter_speed(const TypicalSectionParams& params, const WagnerCoefficients& wagner, double low,
                                    double high, int samples = 200, double tolerance = 1e-9);

}  // namespace aerocouple
