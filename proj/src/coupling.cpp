#include "aerocouple/coupling.hpp"

#include "aerocouple/error.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace aerocouple {

MotionSignal MotionSignal::harmonic(Eigen::VectorXd amplitude, Eigen::VectorXd frequency_hz, Eigen::VectorXd bias,
                                    Eigen::VectorXd phase_deg) {
  const Eigen::Index n = amplitude.size();
  if (frequency_hz.size() != n || bias.size() != n || phase_deg.size() != n) {
    throw ValidationError("imposed motion vectors must have one entry per mode");
  }
  MotionSignal s;
  s.amplitude_ = std::move(amplitude);
  s.frequency_ = std::move(frequency_hz);
  s.bias_ = std::move(bias);
  s.phase_ = std::move(phase_deg);
  return s;
}

MotionSignal MotionSignal::tabulated(std::vector<double> times, Eigen::MatrixXd values) {
  if (times.size() < 2) throw ValidationError("imposed motion table needs at least two rows");
  if (static_cast<Eigen::Index>(times.size()) != values.rows()) throw ValidationError("imposed motion table is ragged");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ValidationError("imposed motion table times must increase");
  }
  MotionSignal s;
  s.table_ = true;
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

MotionSignal MotionSignal::from_config(const ImposedMotionConfig& c, int num_modes) {
  if (c.table) {
    const CsvTable table = read_csv(*c.table);
    if (static_cast<int>(table.header.size()) != num_modes + 1) {
      throw ValidationError("imposed motion table needs a time column and " + std::to_string(num_modes) +
                            " mode columns");
    }
    std::vector<double> times;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), num_modes);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      times.push_back(table.rows[r][0]);
      for (int j = 0; j < num_modes; ++j) values(static_cast<Eigen::Index>(r), j) = table.rows[r][j + 1];
    }
    return tabulated(std::move(times), std::move(values));
  }
  if (c.amplitude.empty() && c.bias.empty()) {
    throw ValidationError("imposed simulation modes need IMPOSED_AMPLITUDE/IMPOSED_BIAS or IMPOSED_TABLE");
  }
  const auto vec = [&](const std::vector<double>& v, const char* name) {
    if (v.empty()) return Eigen::VectorXd::Zero(num_modes).eval();
    if (static_cast<int>(v.size()) != num_modes) {
      throw ValidationError(std::string(name) + " has " + std::to_string(v.size()) + " entries, the model has " +
                            std::to_string(num_modes) + " modes");
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), num_modes).eval();
  };
  return harmonic(vec(c.amplitude, "IMPOSED_AMPLITUDE"), vec(c.frequency_hz, "IMPOSED_FREQUENCY"),
                  vec(c.bias, "IMPOSED_BIAS"), vec(c.phase_deg, "IMPOSED_PHASE_DEG"));
}

int MotionSignal::size() const { return static_cast<int>(table_ ? values_.cols() : amplitude_.size()); }

ModalState MotionSignal::state(double t) const {
  ModalState s = ModalState::zeros(size(), t);
  if (table_) {
    if (t < times_.front() || t > times_.back()) {
      throw InvalidArgument("imposed motion is undefined at t = " + std::to_string(t));
    }
    std::size_t i = 1;
    while (i + 1 < times_.size() && times_[i] < t) ++i;
    const double h = times_[i] - times_[i - 1];
    const double u = (t - times_[i - 1]) / h;
    s.q = (1.0 - u) * values_.row(i - 1).transpose() + u * values_.row(i).transpose();
    s.qdot = (values_.row(i) - values_.row(i - 1)).transpose() / h;
    return s;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index j = 0; j < amplitude_.size(); ++j) {
    const double w = two_pi * frequency_[j];
    const double arg = w * t + phase_[j] * std::numbers::pi / 180.0;
    s.q[j] = bias_[j] + amplitude_[j] * std::sin(arg);
    s.qdot[j] = amplitude_[j] * w * std::cos(arg);
    s.qddot[j] = -amplitude_[j] * w * w * std::sin(arg);
  }
  return s;
}

Eigen::VectorXd predict_displacements(std::span<const ModalState> accepted, double dt, Predictor order) {
  if (accepted.empty()) throw InvalidArgument("prediction needs at least one accepted state");
  const ModalState& last = accepted.back();
  if (order == Predictor::None) return last.q;
  const Eigen::VectorXd& previous_rate = accepted.size() > 1 ? accepted[accepted.size() - 2].qdot : last.qdot;
  return last.q + dt * (1.5 * last.qdot - 0.5 * previous_rate);
}

double aitken_relax(double omega, const Eigen::VectorXd& r_previous, const Eigen::VectorXd& r_next, double omega_max) {
  if (r_previous.size() != r_next.size()) throw InvalidArgument("Aitken residuals differ in length");
  if (r_next.isZero(0.0)) return omega;
  const Eigen::VectorXd delta = r_next - r_previous;
  const double denom = delta.squaredNorm();
  if (denom == 0.0) {
    log::warn("Aitken relaxation: residual did not change, keeping omega = " + std::to_string(omega));
    return omega;
  }
  const double next = -omega * r_previous.dot(delta) / denom;
  if (!(next > kMinRelaxation)) return kMinRelaxation;
  return std::min(next, omega_max);
}

Eigen::VectorXd physical_translations(const StructuralModel& model, const Eigen::VectorXd& dq) {
  const Eigen::VectorXd stacked = model.modes * dq;
  Eigen::VectorXd t(3 * model.num_nodes());
  for (int i = 0; i < model.num_nodes(); ++i) t.segment<3>(3 * i) = stacked.segment<3>(kDofsPerNode * i);
  return t;
}

double residual_rms(const StructuralModel& model, const Eigen::VectorXd& q_new, const Eigen::VectorXd& q_previous) {
  if (q_new.size() != q_previous.size()) throw InvalidArgument("residual states differ in length");
  if (model.num_nodes() == 0) return 0.0;
  const Eigen::VectorXd t = physical_translations(model, q_new - q_previous);
  return std::sqrt(t.squaredNorm() / model.num_nodes());
}

namespace {

using Clock = std::chrono::steady_clock;

// Absolute tolerance, floored at the roundoff level of the current interface displacement.
bool is_converged(const StructuralModel& model, double rms, const Eigen::VectorXd& q, double tolerance) {
  const double scale =
      model.num_nodes() > 0 ? std::sqrt(physical_translations(model, q).squaredNorm() / model.num_nodes()) : 0.0;
  return rms < std::max(tolerance, 64.0 * std::numeric_limits<double>::epsilon() * scale);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

FluidMotion fluid_motion(const CouplingContext& ctx, const ModalState& state) {
  const PhysicalMotion pm = physical_motion(ctx.structure.model(), state);
  FluidMotion m;
  m.displacement = ctx.transfer.to_fluid(pm.displacement).values;
  m.velocity = ctx.transfer.to_fluid(pm.velocity).values;
  m.acceleration = ctx.transfer.to_fluid(pm.acceleration).values;
  m.grid_velocity = Eigen::MatrixX3d::Zero(m.displacement.rows(), 3);
  return m;
}

Eigen::VectorXd structural_load(const CouplingContext& ctx, CouplingResult& result) {
  result.fluid_forces = ctx.aero.forces();
  result.structural_forces = ctx.transfer.to_structure(result.fluid_forces);
  return generalized_force(ctx.structure.model(), result.structural_forces);
}

void start_monitors(const CouplingContext& ctx, CouplingResult& result) {
  result.monitors.header = {"time"};
  for (const auto& name : ctx.aero.monitor_names()) result.monitors.header.push_back(name);
}

void record(const CouplingContext& ctx, CouplingResult& result, const ModalState& state) {
  result.history.push_back({state.time, state.q, state.qdot, state.force});
  std::vector<double> row{state.time};
  for (double v : ctx.aero.monitors()) row.push_back(v);
  result.monitors.rows.push_back(std::move(row));
}

void check_finite(const ModalState& s, int step) {
  if (!s.q.allFinite() || !s.qdot.allFinite() || !s.qddot.allFinite() || !s.force.allFinite()) {
    throw NumericError("non-finite structural state at step " + std::to_string(step));
  }
}

ModalState initial_state(const CouplingConfig& config, int n) {
  ModalState s = ModalState::zeros(n);
  const auto fill = [&](const std::vector<double>& v, Eigen::VectorXd& out, const char* key) {
    if (v.empty()) return;
    if (static_cast<int>(v.size()) != n) {
      throw ValidationError(std::string(key) + " has " + std::to_string(v.size()) + " entries, the model has " +
                            std::to_string(n) + " modes");
    }
    out = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  };
  fill(config.initial_q, s.q, "INITIAL_Q");
  fill(config.initial_qdot, s.qdot, "INITIAL_QDOT");
  return s;
}

std::string trajectory(const std::vector<FsiIterationRecord>& log, int step) {
  std::string out;
  char buf[48];
  for (const auto& r : log) {
    if (r.step != step) continue;
    std::snprintf(buf, sizeof buf, "%s%.3e", out.empty() ? "" : ", ", r.residual_rms);
    out += buf;
  }
  return out;
}

}  // namespace

CouplingResult run_steady_imposed(const CouplingContext& ctx, const MotionSignal& signal) {
  const int n = ctx.structure.model().num_modes();
  if (signal.size() != n) throw ValidationError("imposed motion size does not match the model");
  CouplingResult result;
  start_monitors(ctx, result);
  ModalState state = signal.state(0.0);
  state.qdot.setZero();
  state.qddot.setZero();
  ctx.aero.initialize(0.0);
  ctx.aero.set_motion(fluid_motion(ctx, state));
  ctx.aero.solve_steady();
  state.force = structural_load(ctx, result);
  ctx.structure.set_state(state);
  record(ctx, result, state);
  result.final_state = state;
  return result;
}

CouplingResult run_steady_coupled(const CouplingContext& ctx) {
  const CouplingConfig& cfg = ctx.config;
  const StructuralModel& model = ctx.structure.model();
  const int n = model.num_modes();
  CouplingResult result;
  start_monitors(ctx, result);
  SteadyOptions options;
  options.max_pseudo_steps = cfg.steady_max_pseudo_steps;

  ModalState guess = initial_state(cfg, n);
  guess.qdot.setZero();
  Eigen::VectorXd q = guess.q;
  ctx.aero.initialize(0.0);
  double omega = cfg.aitken_omega0;
  Eigen::VectorXd previous_residual;
  const auto start = Clock::now();
  for (int k = 1; k <= cfg.max_fsi_iters; ++k) {
    ModalState current = ModalState::zeros(n);
    current.q = q;
    ctx.aero.set_motion(fluid_motion(ctx, current));
    ctx.aero.solve_steady();
    ctx.structure.apply_generalized_force(structural_load(ctx, result));
    const ModalState solved = ctx.structure.solve_steady(options);
    check_finite(solved, 0);

    const Eigen::VectorXd r = solved.q - q;
    const double rms = residual_rms(model, solved.q, q);
    const Eigen::VectorXd physical = physical_translations(model, r);
    if (k > 1) omega = aitken_relax(omega, previous_residual, physical, cfg.aitken_omega_max);
    result.iterations.push_back({0, k, rms, omega, seconds_since(start)});
    result.max_step_iterations = k;
    if (is_converged(model, rms, solved.q, cfg.fsi_tolerance)) {
      ctx.structure.set_state(solved);
      record(ctx, result, solved);
      result.final_state = solved;
      return result;
    }
    q += omega * r;
    previous_residual = physical;
  }
  throw ConvergenceError("steady coupling did not converge in " + std::to_string(cfg.max_fsi_iters) +
                         " iterations; residual RMS trajectory: " + trajectory(result.iterations, 0));
}

CouplingResult run_unsteady_imposed(const CouplingContext& ctx, const MotionSignal& signal) {
  const CouplingConfig& cfg = ctx.config;
  const StructuralModel& model = ctx.structure.model();
  if (signal.size() != model.num_modes()) throw ValidationError("imposed motion size does not match the model");
  if (!(cfg.dt > 0.0)) throw ValidationError("unsteady simulations need DT > 0");
  CouplingResult result;
  start_monitors(ctx, result);

  const Eigen::MatrixX3d& fluid_points = ctx.aero.interface_points().positions;
  ModalState state = signal.state(0.0);
  const bool initial_deformation = !state.q.isZero(0.0);
  ctx.aero.initialize(0.0);
  FluidMotion motion = fluid_motion(ctx, state);
  ctx.aero.set_motion(motion);
  ctx.aero.evaluate();
  state.force = structural_load(ctx, result);
  record(ctx, result, state);
  Eigen::MatrixX3d previous = fluid_points + motion.displacement;

  for (int step = 1; step <= cfg.n_steps; ++step) {
    const auto start = Clock::now();
    state = signal.state(step * cfg.dt);
    motion = fluid_motion(ctx, state);
    const Eigen::MatrixX3d current = fluid_points + motion.displacement;
    motion.grid_velocity = grid_velocities(previous, current, cfg.dt, step == 1 && initial_deformation);
    if (step == 1) result.first_grid_velocity = motion.grid_velocity;
    ctx.aero.set_motion(motion);
    ctx.aero.advance(cfg.dt);
    state.time = ctx.aero.time();
    state.force = structural_load(ctx, result);
    check_finite(state, step);
    record(ctx, result, state);
    result.iterations.push_back({step, 1, 0.0, 1.0, seconds_since(start)});
    previous = current;
  }
  result.max_step_iterations = cfg.n_steps > 0 ? 1 : 0;
  ctx.structure.set_state(state);
  result.final_state = state;
  return result;
}

CouplingResult run_unsteady_coupled(const CouplingContext& ctx) {
  const CouplingConfig& cfg = ctx.config;
  const StructuralModel& model = ctx.structure.model();
  const StructuralSystem& system = ctx.structure.system();
  const IntegratorParams& params = ctx.structure.params();
  const int n = model.num_modes();
  if (!(cfg.dt > 0.0)) throw ValidationError("unsteady simulations need DT > 0");
  CouplingResult result;
  start_monitors(ctx, result);

  // Initial acceleration in equilibrium with the aerodynamic loads, added mass included.
  ModalState state = initial_state(cfg, n);
  const bool initial_deformation = !state.q.isZero(0.0);
  ctx.aero.initialize(0.0);
  Eigen::PartialPivLU<Eigen::MatrixXd> mass_lu(system.mass);
  FluidMotion motion;
  bool settled = false;
  for (int j = 0; j < 100; ++j) {
    motion = fluid_motion(ctx, state);
    ctx.aero.set_motion(motion);
    ctx.aero.evaluate();
    state.force = structural_load(ctx, result);
    const Eigen::VectorXd a =
        mass_lu.solve(state.force - system.damping * state.qdot - system.stiffness * state.q);
    const double change = (a - state.qddot).norm();
    state.qddot = a;
    if (change <= 1e-13 * a.norm() || a.isZero(0.0)) {
      settled = true;
      break;
    }
  }
  if (!settled) log::warn("initial acceleration iteration did not settle; added mass may exceed structural mass");
  motion = fluid_motion(ctx, state);
  ctx.aero.set_motion(motion);
  ctx.aero.evaluate();
  state.force = structural_load(ctx, result);
  check_finite(state, 0);
  ctx.structure.set_state(state);
  record(ctx, result, state);

  const Eigen::MatrixX3d& fluid_points = ctx.aero.interface_points().positions;
  Eigen::MatrixX3d previous = fluid_points + motion.displacement;
  std::vector<ModalState> accepted{state};
  double omega_last = cfg.aitken_omega0;

  for (int step = 1; step <= cfg.n_steps; ++step) {
    const auto start = Clock::now();
    ctx.structure.checkpoint();
    ctx.aero.checkpoint();
    const ModalState& base = ctx.structure.checkpointed();
    Eigen::VectorXd q = predict_displacements(accepted, cfg.dt, cfg.predictor);
    double omega = std::min(omega_last, cfg.aitken_omega0);
    Eigen::VectorXd previous_residual;
    bool converged = false;
    Eigen::MatrixX3d current;

    for (int k = 1; k <= cfg.max_fsi_iters; ++k) {
      const ModalState trial = kinematics_for_displacement(base, q, cfg.dt, params);
      motion = fluid_motion(ctx, trial);
      current = fluid_points + motion.displacement;
      motion.grid_velocity = grid_velocities(previous, current, cfg.dt, step == 1 && initial_deformation);
      if (step == 1 && k == 1) result.first_grid_velocity = motion.grid_velocity;

      ctx.aero.restore();
      ctx.aero.set_motion(motion);
      ctx.aero.advance(cfg.dt);
      ctx.structure.restore();
      ctx.structure.apply_generalized_force(structural_load(ctx, result));
      const ModalState& solved = ctx.structure.advance(cfg.dt);
      check_finite(solved, step);

      const Eigen::VectorXd r = solved.q - q;
      const double rms = residual_rms(model, solved.q, q);
      const Eigen::VectorXd physical = physical_translations(model, r);
      if (k > 1) omega = aitken_relax(omega, previous_residual, physical, cfg.aitken_omega_max);
      result.iterations.push_back({step, k, rms, omega, seconds_since(start)});
      result.max_step_iterations = std::max(result.max_step_iterations, k);
      if (is_converged(model, rms, solved.q, cfg.fsi_tolerance)) {
        converged = true;
        break;
      }
      q += omega * r;
      previous_residual = physical;
    }
    if (!converged) {
      throw ConvergenceError("coupling did not converge at step " + std::to_string(step) + " (t = " +
                             std::to_string(step * cfg.dt) + ") in " + std::to_string(cfg.max_fsi_iters) +
                             " iterations; residual RMS trajectory: " + trajectory(result.iterations, step));
    }
    omega_last = omega;
    previous = current;
    accepted.push_back(ctx.structure.state());
    if (accepted.size() > 2) accepted.erase(accepted.begin());
    record(ctx, result, ctx.structure.state());
  }
  result.final_state = ctx.structure.state();
  return result;
}

}  // namespace aerocouple
