#include "aerocouple/flutter.hpp"

#include "aerocouple/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace aerocouple {

TypicalSectionParams TypicalSectionParams::from_nondimensional(double chi, double r_alpha, double omega_alpha,
                                                               double omega_bar, double mu, double density,
                                                               double semichord, double axis_x, double span) {
  TypicalSectionParams p;
  const double b = semichord;
  p.mass = mu * std::numbers::pi * density * b * b * span;
  p.static_moment = chi * p.mass * b;
  p.inertia = r_alpha * r_alpha * p.mass * b * b;
  p.k_alpha = p.inertia * omega_alpha * omega_alpha;
  const double omega_h = omega_bar * omega_alpha;
  p.k_h = p.mass * omega_h * omega_h;
  p.semichord = b;
  p.axis_x = axis_x;
  p.density = density;
  p.span = span;
  return p;
}

Eigen::Matrix2d TypicalSectionParams::mass_matrix() const {
  Eigen::Matrix2d m;
  m << mass, -static_moment, -static_moment, inertia;
  return m;
}

Eigen::Matrix2d TypicalSectionParams::stiffness_matrix() const { return Eigen::Vector2d(k_h, k_alpha).asDiagonal(); }

Eigen::Matrix2d TypicalSectionParams::damping_matrix() const { return Eigen::Vector2d(c_h, c_alpha).asDiagonal(); }

void TypicalSectionParams::validate() const {
  if (!(mass > 0.0)) throw ValidationError("section mass must be positive");
  if (!(inertia > 0.0)) throw ValidationError("section inertia must be positive");
  if (!(semichord > 0.0)) throw ValidationError("semichord must be positive");
  if (!(mass * inertia - static_moment * static_moment > 0.0)) {
    throw ValidationError("section inertia is not positive definite (m I_f <= S_m^2)");
  }
}

StructuralModel make_typical_section_model(const TypicalSectionParams& params, const Eigen::MatrixX3d& node_positions,
                                           const Eigen::Vector3d& axis_point) {
  params.validate();
  std::vector<GridNode> nodes;
  Eigen::MatrixXd modes = Eigen::MatrixXd::Zero(kDofsPerNode * node_positions.rows(), 2);
  for (Eigen::Index i = 0; i < node_positions.rows(); ++i) {
    const Eigen::Vector3d p = node_positions.row(i).transpose();
    nodes.push_back({static_cast<int>(i + 1), p});
    const Eigen::Index r = kDofsPerNode * i;
    modes(r + 2, 0) = 1.0;
    modes(r + 0, 1) = p.z() - axis_point.z();
    modes(r + 2, 1) = -(p.x() - axis_point.x());
    modes(r + 4, 1) = 1.0;
  }
  StructuralModel model;
  model.nodes = std::move(nodes);
  model.modes = std::move(modes);
  model.mass = params.mass_matrix();
  model.stiffness = params.stiffness_matrix();
  model.frequencies = Eigen::Vector2d(std::sqrt(params.k_h / params.mass), std::sqrt(params.k_alpha / params.inertia));
  model.damping_ratios = Eigen::Vector2d::Zero();
  model.diagonal = false;
  if (params.c_h != 0.0 || params.c_alpha != 0.0) model.damping_matrix = params.damping_matrix();
  model.validate();
  return model;
}

double FlutterPoint::least_damping() const {
  if (damping.size() == 0) return std::numeric_limits<double>::infinity();
  return damping.minCoeff();
}

Eigen::MatrixXd flutter_state_matrix(const TypicalSectionParams& p, double u, const WagnerCoefficients& w) {
  p.validate();
  const double pi = std::numbers::pi;
  const double rho = p.density;
  const double b = p.semichord;
  const double s = p.span;
  const double a = (p.axis_x - b) / b;
  const double added = pi * rho * b * b * s;
  const double circ = 2.0 * pi * rho * u * b * s;
  const double direct = 1.0 - w.a1 - w.a2;
  const double arm = b * (a + 0.5);

  // Downwash w = wq q + wv q'
  const Eigen::RowVector2d wq(0.0, u);
  const Eigen::RowVector2d wv(-1.0, b * (0.5 - a));

  // Aerodynamic loads f = -Ma q'' - Ca q' - Ka q + D x
  Eigen::Matrix2d ma;
  ma << added, added * b * a, added * b * a, added * b * b * (0.125 + a * a);
  Eigen::Matrix2d ca;
  ca << 0.0, -added * u, 0.0, added * u * b * (0.5 - a);
  Eigen::Matrix2d ka = Eigen::Matrix2d::Zero();
  const Eigen::Vector2d lever(1.0, arm);
  ca -= circ * direct * lever * wv;
  ka -= circ * direct * lever * wq;
  Eigen::Matrix2d d;
  d << circ, circ, circ * arm, circ * arm;

  const Eigen::Matrix2d inertia = p.mass_matrix() + ma;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(inertia);
  if (!lu.isInvertible()) throw NumericError("inertia including added mass is singular");
  const Eigen::Matrix2d minv = lu.inverse();

  Eigen::MatrixXd a_mat = Eigen::MatrixXd::Zero(6, 6);
  a_mat.block<2, 2>(0, 2).setIdentity();
  a_mat.block<2, 2>(2, 0) = -minv * (p.stiffness_matrix() + ka);
  a_mat.block<2, 2>(2, 2) = -minv * (p.damping_matrix() + ca);
  a_mat.block<2, 2>(2, 4) = minv * d;
  const double lambda1 = u / b * w.b1;
  const double lambda2 = u / b * w.b2;
  a_mat.block<1, 2>(4, 0) = lambda1 * w.a1 * wq;
  a_mat.block<1, 2>(4, 2) = lambda1 * w.a1 * wv;
  a_mat(4, 4) = -lambda1;
  a_mat.block<1, 2>(5, 0) = lambda2 * w.a2 * wq;
  a_mat.block<1, 2>(5, 2) = lambda2 * w.a2 * wv;
  a_mat(5, 5) = -lambda2;
  return a_mat;
}

std::vector<FlutterPoint> flutter_eigen_oracle(const TypicalSectionParams& params, const WagnerCoefficients& wagner,
                                               const std::vector<double>& speeds) {
  if (!std::is_sorted(speeds.begin(), speeds.end())) throw InvalidArgument("speed sweep must be sorted ascending");
  std::vector<FlutterPoint> out;
  out.reserve(speeds.size());
  for (double u : speeds) {
    if (!(u >= 0.0)) throw InvalidArgument("speeds must be non-negative");
    FlutterPoint point;
    point.velocity = u;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(flutter_state_matrix(params, u, wagner));
    if (solver.info() != Eigen::Success) throw NumericError("flutter eigenvalue solve failed");
    point.eigenvalues = solver.eigenvalues();
    std::vector<std::pair<double, double>> modes;
    for (Eigen::Index i = 0; i < point.eigenvalues.size(); ++i) {
      const std::complex<double> lambda = point.eigenvalues[i];
      if (lambda.imag() <= 1e-9 * std::max(1.0, std::abs(lambda))) continue;
      modes.emplace_back(lambda.imag() / (2.0 * std::numbers::pi), -lambda.real() / std::abs(lambda));
    }
    std::sort(modes.begin(), modes.end());
    point.frequencies.resize(static_cast<Eigen::Index>(modes.size()));
    point.damping.resize(static_cast<Eigen::Index>(modes.size()));
    for (std::size_t i = 0; i < modes.size(); ++i) {
      point.frequencies[static_cast<Eigen::Index>(i)] = modes[i].first;
      point.damping[static_cast<Eigen::Index>(i)] = modes[i].second;
    }
    out.push_back(std::move(point));
  }
  return out;
}

std::optional<double> flutter_speed(const TypicalSectionParams& params, const WagnerCoefficients& wagner, double low,
                                    double high, int samples, double tolerance) {
  if (!(high > low) || samples < 2) throw InvalidArgument("flutter speed search needs high > low and samples >= 2");
  // Neutral in-vacuo modes come out at +-1e-15; treat them as stable.
  constexpr double kNeutral = -1e-12;
  const auto damping = [&](double u) { return flutter_eigen_oracle(params, wagner, {u}).front().least_damping(); };
  double u0 = low;
  double d0 = damping(u0);
  if (d0 <= kNeutral) return low;
  for (int i = 1; i <= samples; ++i) {
    const double u1 = low + (high - low) * i / samples;
    const double d1 = damping(u1);
    if (d1 <= kNeutral) {
      double lo = u0, hi = u1;
      while (hi - lo > tolerance * hi) {
        const double mid = 0.5 * (lo + hi);
        (damping(mid) > kNeutral ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    u0 = u1;
  }
  return std::nullopt;
}

}  // namespace aerocouple
