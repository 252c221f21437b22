#include "aerocouple/structural.hpp"

#include "aerocouple/error.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace aerocouple {

ModalState ModalState::zeros(Eigen::Index n, double time) {
  ModalState s;
  s.time = time;
  s.q = Eigen::VectorXd::Zero(n);
  s.qdot = Eigen::VectorXd::Zero(n);
  s.qddot = Eigen::VectorXd::Zero(n);
  s.force = Eigen::VectorXd::Zero(n);
  return s;
}

IntegratorParams IntegratorParams::from_spectral_radius(double rho_inf) {
  if (!(rho_inf >= 0.0 && rho_inf <= 1.0)) throw InvalidArgument("spectral radius must lie in [0, 1]");
  IntegratorParams p;
  p.rho_inf = rho_inf;
  p.alpha_m = (2.0 * rho_inf - 1.0) / (rho_inf + 1.0);
  p.alpha_f = rho_inf / (rho_inf + 1.0);
  p.gamma = 0.5 - p.alpha_m + p.alpha_f;
  p.beta = 0.25 * (1.0 - p.alpha_m + p.alpha_f) * (1.0 - p.alpha_m + p.alpha_f);
  return p;
}

IntegratorParams IntegratorParams::newmark() {
  IntegratorParams p;
  p.rho_inf = 1.0;
  p.alpha_m = 0.0;
  p.alpha_f = 0.0;
  p.beta = 0.25;
  p.gamma = 0.5;
  return p;
}

namespace {

struct ModalBasis {
  Eigen::VectorXd omega;  // natural angular frequencies d_i
  Eigen::MatrixXd vectors;
};

ModalBasis modal_basis(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiffness, mass);
  if (solver.info() != Eigen::Success) throw NumericError("generalized eigenanalysis of (K, M) failed");
  ModalBasis basis;
  basis.omega = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  basis.vectors = solver.eigenvectors();
  if (!basis.vectors.allFinite()) throw NumericError("generalized eigenanalysis produced non-finite vectors");
  return basis;
}

}  // namespace

Eigen::MatrixXd build_damping(const StructuralModel& model, const Eigen::VectorXd& ratios, bool force_modal_path) {
  const Eigen::Index n = model.num_modes();
  if (ratios.size() != n) throw InvalidArgument("damping ratio list does not match the number of modes");
  if (ratios.isZero(0.0)) return Eigen::MatrixXd::Zero(n, n);
  if (model.diagonal && !force_modal_path) {
    return (2.0 * ratios.array() * model.frequencies.array()).matrix().asDiagonal();
  }

  const ModalBasis basis = modal_basis(model.stiffness, model.mass);
  const Eigen::MatrixXd& v = basis.vectors;
  const Eigen::MatrixXd modal_mass = v.transpose() * model.mass * v;
  Eigen::VectorXd modal_damping(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index dominant = 0;
    v.col(i).cwiseAbs().cwiseProduct(model.mass.diagonal().cwiseSqrt()).maxCoeff(&dominant);
    modal_damping[i] = 2.0 * ratios[dominant] * basis.omega[i] * modal_mass(i, i);
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  if (!lu.isInvertible()) throw NumericError("eigenvector matrix is singular");
  const Eigen::MatrixXd v_inv = lu.inverse();
  Eigen::MatrixXd c = v_inv.transpose() * modal_damping.asDiagonal() * v_inv;
  return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd build_damping(const StructuralModel& model) {
  if (model.damping_matrix) return *model.damping_matrix;
  return build_damping(model, model.damping_ratios);
}

StructuralSystem make_system(const StructuralModel& model, std::optional<double> uniform_damping) {
  model.validate();
  StructuralSystem system;
  system.mass = model.mass;
  system.stiffness = model.stiffness;
  if (uniform_damping) {
    system.damping = build_damping(model, Eigen::VectorXd::Constant(model.num_modes(), *uniform_damping));
  } else {
    system.damping = build_damping(model);
  }
  return system;
}

Eigen::VectorXd generalized_force(const StructuralModel& model, const InterfaceField& nodal_loads) {
  nodal_loads.validate();
  std::unordered_map<int, Eigen::Index> index;
  for (Eigen::Index i = 0; i < model.num_nodes(); ++i) index.emplace(model.nodes[i].id, i);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.num_modes());
  for (Eigen::Index p = 0; p < nodal_loads.size(); ++p) {
    const auto it = index.find(nodal_loads.ids[p]);
    if (it == index.end()) {
      throw InvalidArgument("load on node " + std::to_string(nodal_loads.ids[p]) + " which is not in the model");
    }
    const Eigen::Index row = kDofsPerNode * it->second;
    out.noalias() += model.modes.middleRows(row, 3).transpose() * nodal_loads.values.row(p).transpose();
    if (nodal_loads.rotational) {
      out.noalias() += model.modes.middleRows(row + 3, 3).transpose() * nodal_loads.rotational->row(p).transpose();
    }
  }
  return out;
}

Eigen::VectorXd equilibrium_acceleration(const StructuralSystem& system, const ModalState& state) {
  const Eigen::VectorXd rhs = state.force - system.damping * state.qdot - system.stiffness * state.q;
  return system.mass.llt().solve(rhs);
}

ModalState step_dynamic(const StructuralSystem& system, const ModalState& s, const Eigen::VectorXd& force_next,
                        double dt, const IntegratorParams& p) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const auto& m = system.mass;
  const auto& c = system.damping;
  const auto& k = system.stiffness;

  const Eigen::MatrixXd effective =
      (1.0 - p.alpha_m) * m + (1.0 - p.alpha_f) * p.gamma * dt * c + (1.0 - p.alpha_f) * p.beta * dt * dt * k;
  const Eigen::VectorXd q_pred = s.q + dt * s.qdot + dt * dt * (0.5 - p.beta) * s.qddot;
  const Eigen::VectorXd v_pred = s.qdot + dt * (1.0 - p.gamma) * s.qddot;
  const Eigen::VectorXd rhs = (1.0 - p.alpha_f) * force_next + p.alpha_f * s.force - p.alpha_m * (m * s.qddot) -
                              c * ((1.0 - p.alpha_f) * v_pred + p.alpha_f * s.qdot) -
                              k * ((1.0 - p.alpha_f) * q_pred + p.alpha_f * s.q);

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(effective);
  const double det = std::abs(lu.determinant());
  if (!(det > 0.0) || !std::isfinite(det)) throw NumericError("singular effective stiffness matrix");

  ModalState next;
  next.time = s.time + dt;
  next.qddot = lu.solve(rhs);
  next.q = q_pred + p.beta * dt * dt * next.qddot;
  next.qdot = v_pred + p.gamma * dt * next.qddot;
  next.force = force_next;
  if (!next.q.allFinite() || !next.qdot.allFinite() || !next.qddot.allFinite()) {
    throw NumericError("non-finite structural state at t = " + std::to_string(next.time));
  }
  return next;
}

Eigen::VectorXd step_residual(const StructuralSystem& system, const ModalState& a, const ModalState& b,
                              const IntegratorParams& p) {
  const auto mix = [](double alpha, const Eigen::VectorXd& old_v, const Eigen::VectorXd& new_v) {
    return Eigen::VectorXd((1.0 - alpha) * new_v + alpha * old_v);
  };
  return system.mass * mix(p.alpha_m, a.qddot, b.qddot) + system.damping * mix(p.alpha_f, a.qdot, b.qdot) +
         system.stiffness * mix(p.alpha_f, a.q, b.q) - mix(p.alpha_f, a.force, b.force);
}

ModalState kinematics_for_displacement(const ModalState& s, const Eigen::VectorXd& q_next, double dt,
                                       const IntegratorParams& p) {
  ModalState next;
  next.time = s.time + dt;
  next.q = q_next;
  next.qddot = (q_next - s.q - dt * s.qdot - dt * dt * (0.5 - p.beta) * s.qddot) / (p.beta * dt * dt);
  next.qdot = s.qdot + dt * ((1.0 - p.gamma) * s.qddot + p.gamma * next.qddot);
  next.force = s.force;
  return next;
}

ModalState solve_steady(const StructuralSystem& system, const Eigen::VectorXd& force, const SteadyOptions& options) {
  const Eigen::Index n = system.size();
  if (force.size() != n) throw InvalidArgument("generalized force size mismatch");
  ModalState state = ModalState::zeros(n);
  state.force = force;
  if (force.isZero(0.0)) return state;

  const ModalBasis basis = modal_basis(system.stiffness, system.mass);
  const double omega_max = basis.omega.maxCoeff();
  const double omega_min = basis.omega.minCoeff();
  if (!(omega_min > 1e-6 * omega_max) || !(omega_min > 0.0)) throw NumericError("singular generalized stiffness");

  // Critical damping on every (K, M) mode; eigenvectors are mass-normalized.
  const Eigen::MatrixXd mv = system.mass * basis.vectors;
  StructuralSystem pseudo = system;
  pseudo.damping = mv * (2.0 * basis.omega).asDiagonal() * mv.transpose();

  const double dt = 10.0 / omega_min;
  const IntegratorParams params = IntegratorParams::from_spectral_radius(0.0);
  state.qddot = equilibrium_acceleration(pseudo, state);
  for (int step = 0; step < options.max_pseudo_steps; ++step) {
    ModalState next = step_dynamic(pseudo, state, force, dt, params);
    const double change = (next.q - state.q).lpNorm<Eigen::Infinity>();
    const double scale = next.q.lpNorm<Eigen::Infinity>();
    state = std::move(next);
    if (change <= options.relative_tolerance * scale) {
      ModalState out = ModalState::zeros(n);
      out.q = state.q;
      out.force = force;
      return out;
    }
  }
  throw ConvergenceError("steady structural solve did not converge in " + std::to_string(options.max_pseudo_steps) +
                         " pseudo-steps");
}

PhysicalMotion physical_motion(const StructuralModel& model, const ModalState& state) {
  PointCloud cloud;
  cloud.positions = model.node_positions();
  for (const auto& node : model.nodes) cloud.ids.push_back(node.id);

  const auto make = [&](const Eigen::VectorXd& generalized, FieldKind kind) {
    InterfaceField field = InterfaceField::zeros(cloud, kind);
    const Eigen::VectorXd stacked = model.modes * generalized;
    Eigen::MatrixX3d rotations(cloud.size(), 3);
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      field.values.row(i) = stacked.segment<3>(kDofsPerNode * i).transpose();
      rotations.row(i) = stacked.segment<3>(kDofsPerNode * i + 3).transpose();
    }
    field.rotational = std::move(rotations);
    return field;
  };
  return {make(state.q, FieldKind::Displacement), make(state.qdot, FieldKind::Velocity),
          make(state.qddot, FieldKind::Acceleration)};
}

ModalSolver::ModalSolver(StructuralModel model, const StructuralSystem& system, IntegratorParams params)
    : model_(std::move(model)), system_(system), params_(params) {
  current_ = ModalState::zeros(model_.num_modes());
  saved_ = current_;
  pending_force_ = Eigen::VectorXd::Zero(model_.num_modes());
}

PointCloud ModalSolver::interface_points() const {
  PointCloud cloud;
  cloud.positions = model_.node_positions();
  for (const auto& node : model_.nodes) cloud.ids.push_back(node.id);
  return cloud;
}

void ModalSolver::set_state(ModalState state) {
  if (state.q.size() != model_.num_modes()) throw InvalidArgument("state size does not match the model");
  current_ = std::move(state);
  saved_ = current_;
  pending_force_ = current_.force;
}

void ModalSolver::apply_loads(const InterfaceField& nodal_loads) {
  pending_force_ = aerocouple::generalized_force(model_, nodal_loads);
}

void ModalSolver::apply_generalized_force(Eigen::VectorXd force) {
  if (force.size() != model_.num_modes()) throw InvalidArgument("generalized force size mismatch");
  pending_force_ = std::move(force);
}

const ModalState& ModalSolver::advance(double dt) {
  current_ = step_dynamic(system_, saved_, pending_force_, dt, params_);
  return current_;
}

const ModalState& ModalSolver::solve_steady(const SteadyOptions& options) {
  current_ = aerocouple::solve_steady(system_, pending_force_, options);
  current_.time = saved_.time;
  return current_;
}

void ModalSolver::checkpoint() { saved_ = current_; }

void ModalSolver::restore() { current_ = saved_; }

void ModalSolver::write_solution(std::ostream& out) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", current_.time);
  out << buf;
  for (Eigen::Index i = 0; i < current_.q.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12e", current_.q[i]);
    out << ',' << buf;
  }
  out << '\n';
}

}  // namespace aerocouple
