#include "aerocouple/error.hpp"
#include "aerocouple/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace aerocouple;

namespace {

const std::filesystem::path kData = AEROCOUPLE_DATA_DIR;

CouplingConfig flutter_config(int steps) {
  CouplingConfig c = load_config(kData / "flutter.cfg");
  c.n_steps = steps;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

HistoryRecord free_response(double t) {
  const double two_pi = 2.0 * std::numbers::pi;
  HistoryRecord r;
  r.time = t;
  r.q = Eigen::Vector2d(std::exp(-0.8 * t) * std::sin(two_pi * 2.0 * t), 0.5 * std::exp(-0.1 * t) * std::cos(two_pi * 5.0 * t));
  r.qdot = Eigen::Vector2d::Zero();
  r.force = Eigen::Vector2d::Zero();
  return r;
}

}  // namespace

TEST(Simulation, RunsAreDeterministic) {
  const StructuralModel model = load_structural_model(kData / "flutter.bdf");
  Simulation a(flutter_config(400), model);
  Simulation b(flutter_config(400), model);
  const CouplingResult ra = a.run();
  const CouplingResult rb = b.run();
  ASSERT_EQ(ra.history.size(), rb.history.size());
  EXPECT_EQ(format_history(ra.history, 2), format_history(rb.history, 2));
  EXPECT_EQ(ra.monitors.rows, rb.monitors.rows);
  EXPECT_EQ(summarize(a, ra), summarize(b, rb));
  ASSERT_EQ(ra.iterations.size(), rb.iterations.size());
  for (std::size_t i = 0; i < ra.iterations.size(); ++i) {
    EXPECT_EQ(ra.iterations[i].residual_rms, rb.iterations[i].residual_rms);
    EXPECT_EQ(ra.iterations[i].omega, rb.iterations[i].omega);
  }
}

TEST(Simulation, CheckSummaryDescribesInterface) {
  Simulation sim(load_config(kData / "naca_static.cfg"), load_structural_model(kData / "naca.bdf"));
  const std::string s = sim.check_summary();
  EXPECT_NE(s.find("mode: STEADY_COUPLED"), std::string::npos) << s;
  EXPECT_NE(s.find("modes: 2"), std::string::npos);
  EXPECT_NE(s.find("structural nodes: 5"), std::string::npos);
  EXPECT_NE(s.find("fluid points: 200"), std::string::npos);
  EXPECT_NE(s.find("2D"), std::string::npos);
}

TEST(Simulation, RejectsCollinearStructure) {
  try {
    Simulation sim(load_config(kData / "naca_static.cfg"), load_structural_model(kData / "collinear.bdf"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("collinear"), std::string::npos);
  }
}

TEST(Simulation, RejectsInvalidConfig) {
  CouplingConfig c = load_config(kData / "naca_static.cfg");
  c.fsi_tolerance = -1.0;
  EXPECT_THROW(Simulation(c, load_structural_model(kData / "naca.bdf")), ValidationError);
}

TEST(Simulation, StaticSummaryLine) {
  Simulation sim(load_config(kData / "naca_static.cfg"), load_structural_model(kData / "naca.bdf"));
  const CouplingResult r = sim.run();
  const std::string s = summarize(sim, r);
  EXPECT_EQ(s.rfind("h = 0.289 m, theta = ", 0), 0u) << s;
  EXPECT_NE(s.find("cl = 0.3289"), std::string::npos) << s;
  EXPECT_NE(s.find("FSI iterations"), std::string::npos);
}

TEST(Simulation, WritesOutputFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "aerocouple_sim_outputs";
  std::filesystem::remove_all(dir);
  Simulation sim(flutter_config(50), load_structural_model(kData / "flutter.bdf"));
  const CouplingResult r = sim.run();
  write_outputs(dir, r, 2, summarize(sim, r));
  for (const char* f : {"history.csv", "fsi_log.csv", "monitors.csv", "fluid_forces.csv", "structural_forces.csv",
                        "summary.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto back = read_history(dir / "history.csv");
  ASSERT_EQ(back.size(), 51u);
  EXPECT_NEAR(back.back().q[1], r.final_state.q[1], 1e-12 * std::abs(r.final_state.q[1]));
  EXPECT_EQ(slurp(dir / "summary.txt"), summarize(sim, r) + "\n");
  EXPECT_EQ(read_csv(dir / "fsi_log.csv").header,
            (std::vector<std::string>{"step", "iter", "residual_rms", "omega", "seconds"}));
  std::filesystem::remove_all(dir);
}

TEST(LeastDampedMode, PicksSmallestDampingOverCoordinates) {
  CouplingResult r;
  for (int i = 0; i < 2000; ++i) r.history.push_back(free_response(i * 2e-3));
  const DominantMode m = least_damped_mode(r, 0.2);
  EXPECT_NEAR(m.frequency_hz, 5.0, 1e-6);
  EXPECT_NEAR(m.damping, 0.1 / std::hypot(0.1, 2.0 * std::numbers::pi * 5.0), 1e-6);
}

TEST(LeastDampedMode, RejectsShortOrSilentHistories) {
  CouplingResult r;
  for (int i = 0; i < 10; ++i) r.history.push_back(free_response(i * 2e-3));
  EXPECT_THROW(least_damped_mode(r, 0.2), ValidationError);
  CouplingResult quiet;
  for (int i = 0; i < 100; ++i) {
    HistoryRecord rec = free_response(i * 2e-3);
    rec.q.setZero();
    quiet.history.push_back(rec);
  }
  EXPECT_THROW(least_damped_mode(quiet, 0.2), ValidationError);
}

TEST(Sweep, RowsKeepOrderAndMatchSerialRuns) {
  const StructuralModel model = load_structural_model(kData / "flutter.bdf");
  const CouplingConfig base = flutter_config(2500);
  const std::vector<double> speeds{110.0, 140.0, 90.0};
  const SweepResult parallel = run_sweep(base, model, "UINF", speeds, 3);
  const SweepResult serial = run_sweep(base, model, "UINF", speeds, 1);
  ASSERT_EQ(parallel.rows.size(), 3u);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    EXPECT_EQ(parallel.rows[i].value, speeds[i]);
    ASSERT_TRUE(parallel.rows[i].ok) << parallel.rows[i].error;
    EXPECT_EQ(parallel.rows[i].damping, serial.rows[i].damping);
    EXPECT_EQ(parallel.rows[i].frequency_hz, serial.rows[i].frequency_hz);
  }
  EXPECT_GT(parallel.rows[0].damping, 0.0);
  EXPECT_LT(parallel.rows[1].damping, 0.0);
  EXPECT_FALSE(parallel.boundary.found);
  EXPECT_NE(parallel.boundary.report.find("not evaluated"), std::string::npos);
  EXPECT_EQ(parallel.table(), serial.table());
}

TEST(Sweep, FailedPointsAreReportedNotFatal) {
  const StructuralModel model = load_structural_model(kData / "flutter.bdf");
  const SweepResult s = run_sweep(flutter_config(2500), model, "UINF", {-5.0, 100.0, 140.0}, 2);
  EXPECT_FALSE(s.rows[0].ok);
  EXPECT_FALSE(s.rows[0].error.empty());
  EXPECT_TRUE(s.rows[1].ok);
  EXPECT_TRUE(s.rows[2].ok);
  EXPECT_TRUE(s.boundary.found);
  EXPECT_GT(s.boundary.speed, 100.0);
  EXPECT_LT(s.boundary.speed, 140.0);
  const CsvTable t = parse_csv(s.table());
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.header, (std::vector<std::string>{"value", "frequency_hz", "damping"}));
}

TEST(Sweep, UnknownKeyFailsUpFront) {
  const StructuralModel model = load_structural_model(kData / "flutter.bdf");
  EXPECT_THROW(run_sweep(flutter_config(10), model, "NOT_A_KEY", {1.0}, 1), ParseError);
  EXPECT_THROW(run_sweep(flutter_config(10), model, "UINF", {}, 1), InvalidArgument);
}

TEST(Sweep, ThreadCountFromEnvironment) {
  setenv("AEROCOUPLE_THREADS", "3", 1);
  EXPECT_EQ(sweep_threads(), 3);
  setenv("AEROCOUPLE_THREADS", "many", 1);
  EXPECT_GE(sweep_threads(), 1);
  unsetenv("AEROCOUPLE_THREADS");
  EXPECT_GE(sweep_threads(), 1);
}
