#pragma once

#include <span>
#include <string>
#include <vector>

namespace aerocouple {

struct TransferFunction {
  double magnitude = 0.0;
  double phase_deg = 0.0;  // (-180, 180]
  /// Input Fourier amplitude below 1e-3 of the input RMS; phase is unreliable.
  bool ill_conditioned = false;
  int periods = 0;
};

/// Ratio of single-frequency Fourier coefficients output/input at `frequency_hz`,
/// over the largest whole number of periods left after dropping the first
/// `transient_cut` fraction of the samples. Needs uniform sampling, at least
/// 5 periods and frequency below Nyquist.
TransferFunction transfer_function(std::span<const double> time, std::span<const double> input,
                                   std::span<const double> output, double frequency_hz, double transient_cut = 0.2);

struct ModalEstimate {
  double frequency_hz = 0.0;
  double damping = 0.0;  // positive when decaying
  double amplitude = 0.0;
};

/// Matrix-pencil identification of a free response. Only oscillatory poles are
/// reported, ascending in frequency; a constant signal gives an empty list.
/// Model order follows the significant singular values, capped at 2 n_expected + 4.
/// Throws ValidationError when fewer than `n_expected` oscillatory modes are found.
std::vector<ModalEstimate> modal_identification(std::span<const double> time, std::span<const double> signal,
                                                int n_expected);

struct FlutterBoundary {
  bool found = false;
  double speed = 0.0;
  double lower = 0.0;  // bracketing sweep speeds
  double upper = 0.0;
  std::string report;
};

/// Linear interpolation of the first positive-to-non-positive crossing of the
/// damping of the least-damped mode along an ascending speed sweep.
FlutterBoundary flutter_boundary(std::span<const double> speeds, std::span<const double> damping);

}  // namespace aerocouple
