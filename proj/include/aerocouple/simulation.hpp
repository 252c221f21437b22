#pragma once

#include "aerocouple/aero.hpp"
#include "aerocouple/config.hpp"
#include "aerocouple/coupling.hpp"
#include "aerocouple/model.hpp"
#include "aerocouple/postproc.hpp"
#include "aerocouple/structural.hpp"
#include "aerocouple/transfer.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace aerocouple {

/// One configured simulation: structural solver, aerodynamic solver and interface maps.
class Simulation {
public:
  /// Validates both inputs and builds the solvers and maps; degenerate
  /// interfaces are rejected here.
  Simulation(CouplingConfig config, StructuralModel model);

  const CouplingConfig& config() const { return config_; }
  const StructuralModel& model() const { return structure_->model(); }
  ModalSolver& structure() { return *structure_; }
  AeroSolver& aero() { return *aero_; }
  const InterfaceTransfer& transfer() const { return *transfer_; }

  /// Mode count, node count, interface sizes and map conditioning.
  std::string check_summary() const;

  CouplingResult run();

private:
  CouplingConfig config_;
  std::unique_ptr<ModalSolver> structure_;
  std::unique_ptr<AeroSolver> aero_;
  std::unique_ptr<InterfaceTransfer> transfer_;
};

/// One-line result description, e.g. "h = 0.289 m, theta = 1.2e-17 rad".
std::string summarize(const Simulation& sim, const CouplingResult& result);

/// history.csv, fsi_log.csv, monitors.csv, fluid_forces.csv, structural_forces.csv, summary.txt
void write_outputs(const std::filesystem::path& dir, const CouplingResult& result, int num_modes,
                   const std::string& summary);

struct DominantMode {
  double frequency_hz = 0.0;
  double damping = 0.0;
};

/// Least-damped significant mode over all generalized coordinates of a free response.
DominantMode least_damped_mode(const CouplingResult& result, double transient_cut);

struct SweepRow {
  double value = 0.0;
  double frequency_hz = 0.0;
  double damping = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::string key;
  std::vector<SweepRow> rows;
  FlutterBoundary boundary;

  /// CSV "value,frequency_hz,damping" over the successful rows.
  std::string table() const;
};

/// Runs one simulation per value of `key`, on up to `threads` workers; rows keep sweep order.
SweepResult run_sweep(const CouplingConfig& base, const StructuralModel& model, const std::string& key,
                      const std::vector<double>& values, int threads);

/// Worker count from AEROCOUPLE_THREADS, else the hardware concurrency.
int sweep_threads();

}  // namespace aerocouple
