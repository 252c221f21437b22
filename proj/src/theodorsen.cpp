#include "aerocouple/theodorsen.hpp"

#include "aerocouple/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace aerocouple {

namespace {

constexpr double kSeam = 12.0;
constexpr double kEuler = 0.57721566490153286061;

// Ascending series for J0, J1, Y0, Y1.
struct SeriesJY {
  double j0 = 0.0, j1 = 0.0, y0 = 0.0, y1 = 0.0;
};

SeriesJY ascending(double x) {
  const double q = 0.25 * x * x;
  const double half = 0.5 * x;
  const double log_term = std::log(half) + kEuler;

  double t0 = 1.0;    // (-q)^m / (m!)^2
  double t1 = half;   // (-1)^m (x/2)^{2m+1} / (m! (m+1)!)
  double harmonic = 0.0;
  SeriesJY r;
  double s0 = 0.0;  // sum (-1)^{m+1} H_m q^m / (m!)^2
  double s1 = 0.0;  // sum (-1)^m (H_m + H_{m+1}) (x/2)^{2m+1} / (m!(m+1)!)
  for (int m = 0; m < 200; ++m) {
    r.j0 += t0;
    r.j1 += t1;
    const double next_harmonic = harmonic + 1.0 / (m + 1);
    s0 -= harmonic * t0;
    s1 += (harmonic + next_harmonic) * t1;
    if (m > 2 && std::abs(t0) < 1e-18 * std::abs(r.j0) + 1e-300 && std::abs(t1) < 1e-18 * std::abs(r.j1) + 1e-300) {
      break;
    }
    t0 *= -q / ((m + 1.0) * (m + 1.0));
    t1 *= -q / ((m + 1.0) * (m + 2.0));
    harmonic = next_harmonic;
  }
  const double pi = std::numbers::pi;
  r.y0 = (2.0 / pi) * (log_term * r.j0 + s0);
  // psi(m+1) + psi(m+2) = H_m + H_{m+1} - 2 gamma
  r.y1 = (2.0 / pi) * (std::log(half) * r.j1) - 2.0 / (pi * x) - (1.0 / pi) * (s1 - 2.0 * kEuler * r.j1);
  return r;
}

// Hankel asymptotic expansion for order nu in {0, 1}.
void asymptotic(int nu, double x, double& j, double& y) {
  const double mu = 4.0 * nu * nu;
  double p = 0.0, q = 0.0;
  double term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    // term = a_k(nu) / x^k
    const double mag = std::abs(term);
    if (mag > last) break;
    const int sign = (k / 2) % 2 == 0 ? 1 : -1;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    if (mag < 1e-17) break;
    last = mag;
    const double odd = 2.0 * k + 1.0;
    term *= (mu - odd * odd) / ((k + 1.0) * 8.0 * x);
  }
  const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
  const double scale = std::sqrt(2.0 / (std::numbers::pi * x));
  j = scale * (p * std::cos(chi) - q * std::sin(chi));
  y = scale * (p * std::sin(chi) + q * std::cos(chi));
}

void check_positive(double x) {
  if (!(x > 0.0)) throw InvalidArgument("Bessel functions of the second kind need x > 0");
}

}  // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  if (x <= kSeam) return ascending(x).j0;
  double j, y;
  asymptotic(0, x, j, y);
  return j;
}

double bessel_j1(double x) {
  const double s = x < 0.0 ? -1.0 : 1.0;
  x = std::abs(x);
  if (x == 0.0) return 0.0;
  if (x <= kSeam) return s * ascending(x).j1;
  double j, y;
  asymptotic(1, x, j, y);
  return s * j;
}

double bessel_y0(double x) {
  check_positive(x);
  if (x <= kSeam) return ascending(x).y0;
  double j, y;
  asymptotic(0, x, j, y);
  return y;
}

double bessel_y1(double x) {
  check_positive(x);
  if (x <= kSeam) return ascending(x).y1;
  double j, y;
  asymptotic(1, x, j, y);
  return y;
}

Complex theodorsen_C(double k) {
  if (!(k >= 0.0)) throw InvalidArgument("reduced frequency must be non-negative");
  if (k == 0.0) return {1.0, 0.0};
  double j0, j1, y0, y1;
  if (k <= kSeam) {
    const SeriesJY s = ascending(k);
    j0 = s.j0;
    j1 = s.j1;
    y0 = s.y0;
    y1 = s.y1;
  } else {
    asymptotic(0, k, j0, y0);
    asymptotic(1, k, j1, y1);
  }
  const Complex h0(j0, -y0);
  const Complex h1(j1, -y1);
  return h1 / (h1 + Complex(0.0, 1.0) * h0);
}

Complex rational_C(double k, const WagnerCoefficients& w) {
  if (!(k >= 0.0)) throw InvalidArgument("reduced frequency must be non-negative");
  const Complex ik(0.0, k);
  return 1.0 - w.a1 * ik / (w.b1 + ik) - w.a2 * ik / (w.b2 + ik);
}

HarmonicLift theodorsen_cl(double k, double chord, double axis_x, const Complex& c) {
  if (!(chord > 0.0)) throw InvalidArgument("chord must be positive");
  const double pi = std::numbers::pi;
  const double b = 0.5 * chord;
  const double a = (axis_x - b) / b;
  const Complex i(0.0, 1.0);
  HarmonicLift out;
  out.pitch = pi * (i * k + a * k * k) + 2.0 * pi * c * (1.0 + (0.5 - a) * i * k);
  out.plunge = pi * k * k - 2.0 * pi * c * i * k;
  return out;
}

HarmonicLift theodorsen_cl(double k, double chord, double axis_x, LiftDeficiency model, const WagnerCoefficients& w) {
  const Complex c = model == LiftDeficiency::Exact ? theodorsen_C(k) : rational_C(k, w);
  return theodorsen_cl(k, chord, axis_x, c);
}

HarmonicLift theodorsen_cl(const TypicalSectionAeroConfig& section, double frequency_hz, LiftDeficiency model) {
  if (!(section.velocity > 0.0)) throw InvalidArgument("Theodorsen lift needs a positive free-stream velocity");
  const double k = 2.0 * std::numbers::pi * frequency_hz * 0.5 * section.chord / section.velocity;
  return theodorsen_cl(k, section.chord, section.axis(), model, section.wagner);
}

}  // namespace aerocouple
