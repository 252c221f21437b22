#include "aerocouple/postproc.hpp"

#include "aerocouple/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

namespace aerocouple {

namespace {

double uniform_step(std::span<const double> time) {
  if (time.size() < 2) throw ValidationError("signal needs at least two samples");
  const double dt = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
  if (!(dt > 0.0)) throw ValidationError("signal times must increase");
  for (std::size_t i = 1; i < time.size(); ++i) {
    if (std::abs(time[i] - time[i - 1] - dt) > 1e-6 * dt) throw ValidationError("signal is not uniformly sampled");
  }
  return dt;
}

constexpr std::size_t kMaxPencilSamples = 900;

}  // namespace

TransferFunction transfer_function(std::span<const double> time, std::span<const double> input,
                                   std::span<const double> output, double frequency_hz, double transient_cut) {
  if (input.size() != time.size() || output.size() != time.size()) {
    throw InvalidArgument("transfer function inputs differ in length");
  }
  if (!(transient_cut >= 0.0 && transient_cut < 1.0)) throw InvalidArgument("transient cut must lie in [0, 1)");
  if (!(frequency_hz > 0.0)) throw InvalidArgument("excitation frequency must be positive");
  const double dt = uniform_step(time);
  if (frequency_hz >= 0.5 / dt) throw ValidationError("excitation frequency is above the Nyquist frequency");

  const std::size_t first = static_cast<std::size_t>(std::ceil(transient_cut * static_cast<double>(time.size())));
  const std::size_t kept = time.size() - first;
  const int periods = static_cast<int>(std::floor(static_cast<double>(kept) * dt * frequency_hz + 1e-9));
  if (periods < 5) {
    throw ValidationError("transfer function needs at least 5 periods after the transient cut, found " +
                          std::to_string(periods));
  }
  const std::size_t window =
      std::min(kept, static_cast<std::size_t>(std::llround(periods / (frequency_hz * dt))));
  const std::size_t start = time.size() - window;

  const double omega = 2.0 * std::numbers::pi * frequency_hz;
  std::complex<double> x = 0.0, y = 0.0;
  double mean = 0.0;
  for (std::size_t i = start; i < time.size(); ++i) mean += input[i];
  mean /= static_cast<double>(window);
  double rms = 0.0;
  for (std::size_t i = start; i < time.size(); ++i) {
    const std::complex<double> e = std::polar(1.0, -omega * (time[i] - time[start]));
    x += input[i] * e;
    y += output[i] * e;
    rms += (input[i] - mean) * (input[i] - mean);
  }
  rms = std::sqrt(rms / static_cast<double>(window));
  const double amplitude = 2.0 * std::abs(x) / static_cast<double>(window);
  // Roundoff-level content counts as none.
  if (!(amplitude > 1e-13 * (std::abs(mean) + rms))) {
    throw NumericError("input has no content at the excitation frequency");
  }

  const std::complex<double> h = y / x;
  TransferFunction tf;
  tf.magnitude = std::abs(h);
  tf.phase_deg = std::arg(h) * 180.0 / std::numbers::pi;
  if (tf.phase_deg <= -180.0) tf.phase_deg += 360.0;
  tf.ill_conditioned = amplitude < 1e-3 * rms;
  tf.periods = periods;
  return tf;
}

std::vector<ModalEstimate> modal_identification(std::span<const double> time, std::span<const double> signal,
                                                int n_expected) {
  if (signal.size() != time.size()) throw InvalidArgument("modal identification inputs differ in length");
  if (n_expected < 1) throw InvalidArgument("expected mode count must be at least 1");
  const double dt0 = uniform_step(time);
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  if (*hi - *lo == 0.0) return {};

  const std::size_t stride = (signal.size() + kMaxPencilSamples - 1) / kMaxPencilSamples;
  const double dt = dt0 * static_cast<double>(stride);
  std::vector<double> y;
  for (std::size_t i = 0; i < signal.size(); i += stride) y.push_back(signal[i]);
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  if (n < 12) throw ValidationError("modal identification needs at least 12 samples");

  const Eigen::Index pencil = n / 3;
  Eigen::MatrixXd hankel(n - pencil, pencil + 1);
  for (Eigen::Index i = 0; i < hankel.rows(); ++i) {
    for (Eigen::Index j = 0; j < hankel.cols(); ++j) hankel(i, j) = y[static_cast<std::size_t>(i + j)];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(hankel, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index order = 0;
  while (order < sv.size() && sv[order] > 1e-9 * sv[0]) ++order;
  order = std::min<Eigen::Index>({order, 2 * n_expected + 4, pencil});
  if (order == 0) return {};

  const Eigen::MatrixXd v = svd.matrixV().leftCols(order);
  const Eigen::MatrixXd v1 = v.topRows(pencil);
  const Eigen::MatrixXd v2 = v.bottomRows(pencil);
  const Eigen::MatrixXd a = v1.completeOrthogonalDecomposition().solve(v2);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a.transpose());
  const Eigen::VectorXcd z = eig.eigenvalues();

  // Residues by least squares on the decimated record.
  Eigen::MatrixXcd vandermonde(n, order);
  for (Eigen::Index k = 0; k < order; ++k) {
    std::complex<double> p = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      vandermonde(i, k) = p;
      p *= z[k];
    }
  }
  const Eigen::VectorXcd yc = Eigen::Map<const Eigen::VectorXd>(y.data(), n).cast<std::complex<double>>();
  const Eigen::VectorXcd residues = vandermonde.colPivHouseholderQr().solve(yc);

  std::vector<ModalEstimate> modes;
  double largest = 0.0;
  const double resolution = 1.0 / (static_cast<double>(n) * dt);
  for (Eigen::Index k = 0; k < order; ++k) {
    const std::complex<double> s = std::log(z[k]) / dt;
    const double f = s.imag() / (2.0 * std::numbers::pi);
    if (!(f > 1e-3 * resolution)) continue;
    ModalEstimate m;
    m.frequency_hz = f;
    m.damping = -s.real() / std::abs(s);
    m.amplitude = 2.0 * std::abs(residues[k]);
    largest = std::max(largest, m.amplitude);
    modes.push_back(m);
  }
  std::erase_if(modes, [&](const ModalEstimate& m) { return m.amplitude < 1e-8 * largest; });
  std::sort(modes.begin(), modes.end(),
            [](const ModalEstimate& l, const ModalEstimate& r) { return l.frequency_hz < r.frequency_hz; });
  if (static_cast<int>(modes.size()) < n_expected) {
    throw ValidationError("rank deficient record: found " + std::to_string(modes.size()) +
                          " oscillatory modes, expected " + std::to_string(n_expected));
  }
  return modes;
}

FlutterBoundary flutter_boundary(std::span<const double> speeds, std::span<const double> damping) {
  if (speeds.size() != damping.size()) throw InvalidArgument("flutter sweep speeds and damping differ in length");
  if (speeds.size() < 2) throw InvalidArgument("flutter sweep needs at least two speeds");
  if (!std::is_sorted(speeds.begin(), speeds.end())) throw InvalidArgument("flutter sweep speeds must ascend");
  FlutterBoundary out;
  char buf[256];
  if (damping[0] <= 0.0) {
    std::snprintf(buf, sizeof buf, "unstable at the lowest speed %.6g (damping %.4g)", speeds[0], damping[0]);
    out.report = buf;
    return out;
  }
  for (std::size_t i = 0; i + 1 < speeds.size(); ++i) {
    if (damping[i] > 0.0 && damping[i + 1] <= 0.0) {
      out.found = true;
      out.lower = speeds[i];
      out.upper = speeds[i + 1];
      out.speed = speeds[i] + damping[i] / (damping[i] - damping[i + 1]) * (speeds[i + 1] - speeds[i]);
      std::snprintf(buf, sizeof buf, "flutter at U = %.6g (between %.6g and %.6g)", out.speed, out.lower, out.upper);
      out.report = buf;
      return out;
    }
  }
  const double trend = damping.back() - damping.front();
  std::snprintf(buf, sizeof buf, "stable in range [%.6g, %.6g]; least damping %.4g at the highest speed, %s", speeds[0],
                speeds.back(), damping.back(), trend < 0.0 ? "decreasing with speed" : "not decreasing with speed");
  out.report = buf;
  return out;
}

}  // namespace aerocouple
