#pragma once

#include "aerocouple/config.hpp"

#include <complex>

namespace aerocouple {

using Complex = std::complex<double>;

/// Bessel functions of the first and second kind, orders 0 and 1, for x > 0
/// (J also at x = 0). Ascending series up to x = 12, Hankel asymptotics beyond.
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);
double bessel_y1(double x);

/// Exact Theodorsen function H1(k) / (H1(k) + i H0(k)), Hankel functions of the second kind.
Complex theodorsen_C(double k);

/// Two-lag rational approximation 1 - sum A_i i k / (b_i + i k).
Complex rational_C(double k, const WagnerCoefficients& w = {});

enum class LiftDeficiency { Exact, Rational };

/// Harmonic lift coefficient per unit motion amplitude.
///
/// Thin-airfoil theory with the rotation axis at x_f (measured from the leading
/// edge, x downstream); `pitch` is Cl per radian of nose-up pitch, `plunge` is Cl
/// per semichord of upward plunge. Motions are Re[amplitude e^{i omega t}].
struct HarmonicLift {
  Complex pitch;
  Complex plunge;
};

HarmonicLift theodorsen_cl(double k, double chord, double axis_x, const Complex& lift_deficiency);
HarmonicLift theodorsen_cl(double k, double chord, double axis_x, LiftDeficiency model,
                           const WagnerCoefficients& w = {});

/// Same, from dimensional inputs; throws InvalidArgument when velocity <= 0.
HarmonicLift theodorsen_cl(const TypicalSectionAeroConfig& section, double frequency_hz, LiftDeficiency model);

}  // namespace aerocouple
