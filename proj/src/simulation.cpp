#include "aerocouple/simulation.hpp"

#include "aerocouple/error.hpp"
#include "aerocouple/history.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

namespace aerocouple {

Simulation::Simulation(CouplingConfig config, StructuralModel model) : config_(std::move(config)) {
  config_.validate();
  model.validate();
  const StructuralSystem system = make_system(model, config_.structural_damping);
  structure_ = std::make_unique<ModalSolver>(std::move(model), system,
                                             IntegratorParams::from_spectral_radius(config_.spectral_radius));
  aero_ = make_aero_solver(config_);
  transfer_ = std::make_unique<InterfaceTransfer>(structure_->interface_points(), aero_->interface_points(),
                                                  aero_->interface_areas(), config_.transfer_mode,
                                                  config_.rbf_support_radius);
}

std::string Simulation::check_summary() const {
  const RbfMap& map = transfer_->structure_to_fluid();
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "mode: %s\nmodes: %d\nstructural nodes: %d\nfluid points: %ld\n",
                std::string(to_string(config_.mode)).c_str(), model().num_modes(), model().num_nodes(),
                static_cast<long>(aero_->interface_points().size()));
  out += buf;
  std::snprintf(buf, sizeof buf, "structure->fluid map: %dD, support radius %.6g m, condition estimate %.3e\n",
                map.dimension(), map.support_radius(), map.condition_estimate());
  out += buf;
  if (const auto& f2s = transfer_->fluid_to_structure()) {
    std::snprintf(buf, sizeof buf, "fluid->structure map: %dD, support radius %.6g m, condition estimate %.3e\n",
                  f2s->dimension(), f2s->support_radius(), f2s->condition_estimate());
    out += buf;
  }
  for (const auto& w : config_.warnings) out += "warning: " + w + "\n";
  return out;
}

CouplingResult Simulation::run() {
  const CouplingContext ctx{config_, *structure_, *aero_, *transfer_};
  switch (config_.mode) {
    case SimulationMode::SteadyImposed:
      return run_steady_imposed(ctx, MotionSignal::from_config(config_.imposed, model().num_modes()));
    case SimulationMode::SteadyCoupled:
      return run_steady_coupled(ctx);
    case SimulationMode::UnsteadyImposed:
      return run_unsteady_imposed(ctx, MotionSignal::from_config(config_.imposed, model().num_modes()));
    case SimulationMode::UnsteadyCoupled:
      return run_unsteady_coupled(ctx);
  }
  throw InvalidArgument("unknown simulation mode");
}

std::string summarize(const Simulation& sim, const CouplingResult& result) {
  char buf[256];
  std::string out;
  const auto& names = result.monitors.header;
  const auto h = std::find(names.begin(), names.end(), "plunge");
  const auto th = std::find(names.begin(), names.end(), "pitch");
  if (h != names.end() && th != names.end() && !result.monitors.rows.empty()) {
    const auto& last = result.monitors.rows.back();
    std::snprintf(buf, sizeof buf, "h = %.3f m, theta = %.3e rad", last[h - names.begin()], last[th - names.begin()]);
    out = buf;
  } else {
    out = "q = [";
    for (Eigen::Index i = 0; i < result.final_state.q.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6e", i ? ", " : "", result.final_state.q[i]);
      out += buf;
    }
    out += "]";
  }
  const auto cl = std::find(names.begin(), names.end(), "cl");
  if (cl != names.end() && !result.monitors.rows.empty()) {
    std::snprintf(buf, sizeof buf, ", cl = %.6f", result.monitors.rows.back()[cl - names.begin()]);
    out += buf;
  }
  if (!is_imposed(sim.config().mode)) {
    std::snprintf(buf, sizeof buf, ", %zu FSI iterations (max %d per step)", result.iterations.size(),
                  result.max_step_iterations);
    out += buf;
  }
  return out;
}

void write_outputs(const std::filesystem::path& dir, const CouplingResult& result, int num_modes,
                   const std::string& summary) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_history(dir / "history.csv", result.history, num_modes);
  write_fsi_log(dir / "fsi_log.csv", result.iterations);
  write_csv(dir / "monitors.csv", result.monitors);
  if (result.fluid_forces.size() > 0) write_field_csv(dir / "fluid_forces.csv", result.fluid_forces);
  if (result.structural_forces.size() > 0) write_field_csv(dir / "structural_forces.csv", result.structural_forces);
  std::ofstream out(dir / "summary.txt", std::ios::trunc);
  if (!out) throw IoError("cannot write '" + (dir / "summary.txt").string() + "'");
  out << summary << '\n';
}

DominantMode least_damped_mode(const CouplingResult& result, double transient_cut) {
  const std::size_t total = result.history.size();
  const std::size_t first = static_cast<std::size_t>(std::ceil(transient_cut * static_cast<double>(total)));
  if (total < first + 12) throw ValidationError("history too short for modal identification");
  std::vector<double> time;
  for (std::size_t i = first; i < total; ++i) time.push_back(result.history[i].time);

  std::vector<ModalEstimate> all;
  const Eigen::Index n = result.history.front().q.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> y;
    for (std::size_t i = first; i < total; ++i) y.push_back(result.history[i].q[j]);
    for (const auto& m : modal_identification(time, y, 1)) all.push_back(m);
  }
  if (all.empty()) throw ValidationError("no oscillatory mode found in the response");
  double largest = 0.0;
  for (const auto& m : all) largest = std::max(largest, m.amplitude);
  DominantMode best{0.0, std::numeric_limits<double>::infinity()};
  for (const auto& m : all) {
    if (m.amplitude < 1e-3 * largest) continue;
    if (m.damping < best.damping) best = {m.frequency_hz, m.damping};
  }
  return best;
}

std::string SweepResult::table() const {
  std::string out = "value,frequency_hz,damping\n";
  char buf[256];
  for (const auto& r : rows) {
    if (!r.ok) continue;
    std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", r.value, r.frequency_hz, r.damping);
    out += buf;
  }
  return out;
}

SweepResult run_sweep(const CouplingConfig& base, const StructuralModel& model, const std::string& key,
                      const std::vector<double>& values, int threads) {
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");
  SweepResult out;
  out.key = key;
  out.rows.resize(values.size());
  // Validate the key once up front so a typo fails before any work.
  {
    CouplingConfig probe = base;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", values.front());
    set_config_value(probe, key, buf);
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = out.rows[i];
      row.value = values[i];
      try {
        CouplingConfig cfg = base;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        set_config_value(cfg, key, buf);
        Simulation sim(std::move(cfg), model);
        const CouplingResult result = sim.run();
        const DominantMode mode = least_damped_mode(result, sim.config().transient_cut);
        row.frequency_hz = mode.frequency_hz;
        row.damping = mode.damping;
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
        row.damping = std::numeric_limits<double>::quiet_NaN();
        row.frequency_hz = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> speeds, damping;
  for (const auto& r : out.rows) {
    if (!r.ok) continue;
    speeds.push_back(r.value);
    damping.push_back(r.damping);
  }
  if (speeds.size() >= 2 && std::is_sorted(speeds.begin(), speeds.end())) {
    out.boundary = flutter_boundary(speeds, damping);
  } else {
    out.boundary.report = "boundary not evaluated: needs at least two successful, ascending sweep points";
  }
  return out;
}

int sweep_threads() {
  if (const char* env = std::getenv("AEROCOUPLE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 256L));
    log::warn("ignoring invalid AEROCOUPLE_THREADS value '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace aerocouple
