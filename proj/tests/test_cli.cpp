#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kData = AEROCOUPLE_DATA_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aerocouple_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd \"" + dir_.string() + "\" && \"" + AEROCOUPLE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  std::string inputs(const std::string& cfg, const std::string& bdf) const {
    return "--config \"" + cfg + "\" --model \"" + bdf + "\"";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RunStaticCase) {
  const Outcome o = run("run " + inputs(kData + "/naca_static.cfg", kData + "/naca.bdf") + " --out-dir \"" +
                        (dir_ / "out").string() + "\"");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("h = 0.289 m", 0), 0u) << o.out;
  for (const char* f : {"history.csv", "fsi_log.csv", "monitors.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  EXPECT_EQ(slurp(dir_ / "out" / "summary.txt"), o.out);
}

TEST_F(Cli, QuietRunPrintsNothing) {
  const Outcome o = run("run -q " + inputs(kData + "/naca_static.cfg", kData + "/naca.bdf"));
  EXPECT_EQ(o.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "output" / "history.csv"));
  EXPECT_TRUE(o.out.empty());
  EXPECT_TRUE(o.err.empty());
}

TEST_F(Cli, RunsAreReproducible) {
  const std::string args = "run -q " + inputs(kData + "/flutter.cfg", kData + "/flutter.bdf");
  ASSERT_EQ(run(args + " --out-dir \"" + (dir_ / "a").string() + "\"").code, 0);
  ASSERT_EQ(run(args + " --out-dir \"" + (dir_ / "b").string() + "\"").code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "b" / "history.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "monitors.csv"), slurp(dir_ / "b" / "monitors.csv"));
}

TEST_F(Cli, CheckPrintsSummaryAndWritesNothing) {
  const Outcome o = run("check " + inputs(kData + "/naca_static.cfg", kData + "/naca.bdf"));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("modes: 2"), std::string::npos);
  EXPECT_NE(o.out.find("structural nodes: 5"), std::string::npos);
  EXPECT_NE(o.out.find("condition estimate"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "output"));
}

TEST_F(Cli, CheckRejectsCollinearStructure) {
  const Outcome o = run("check " + inputs(kData + "/naca_static.cfg", kData + "/collinear.bdf"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("validation error"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("collinear"), std::string::npos) << o.err;
}

TEST_F(Cli, ParseErrorsNameTheLine) {
  const fs::path cfg = write("bad.cfg", "MODE = STEADY_COUPLED\nUINF = fast\n");
  const Outcome o = run("check " + inputs(cfg.string(), kData + "/naca.bdf"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("parse error"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("line 2"), std::string::npos) << o.err;
}

TEST_F(Cli, ConvergenceFailureExitsWithTwo) {
  const fs::path cfg = write("tight.cfg", slurp(kData + "/naca_static.cfg") + "MAX_FSI_ITERS = 1\nFSI_TOLERANCE = 1e-15\n");
  const Outcome o = run("run " + inputs(cfg.string(), kData + "/naca.bdf") + " --out-dir \"" +
                        (dir_ / "out").string() + "\"");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("convergence error"), std::string::npos) << o.err;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("launch").code, 1);
  EXPECT_EQ(run("run --config /nonexistent.cfg --model /nonexistent.bdf").code, 1);
  EXPECT_EQ(run("run --config \"" + kData + "/naca_static.cfg\"").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, SweepWritesTableAndBoundary) {
  const fs::path cfg = write("flutter.cfg", slurp(kData + "/flutter.cfg") + "N_STEPS = 2500\n");
  const Outcome o = run("sweep -q " + inputs(cfg.string(), kData + "/flutter.bdf") +
                        " --key UINF --values 100,140 --out-dir \"" + (dir_ / "sw").string() + "\"");
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string table = slurp(dir_ / "sw" / "sweep.csv");
  EXPECT_EQ(table.rfind("value,frequency_hz,damping\n", 0), 0u);
  EXPECT_NE(slurp(dir_ / "sw" / "summary.txt").find("flutter at U = "), std::string::npos);

  const Outcome b = run("analyze \"" + (dir_ / "sw" / "sweep.csv").string() + "\" --boundary");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(b.out.rfind("flutter speed ", 0), 0u) << b.out;
}

TEST_F(Cli, AnalyzeForcedResponse) {
  const fs::path cfg = write("forced.cfg", slurp(kData + "/naca_forced.cfg") + "N_STEPS = 2000\n");
  ASSERT_EQ(run("run -q " + inputs(cfg.string(), kData + "/naca.bdf") + " --out-dir \"" + (dir_ / "f").string() +
                "\"")
                .code,
            0);
  const Outcome tf = run("analyze \"" + (dir_ / "f" / "monitors.csv").string() +
                         "\" --column cl --input pitch --frequency 8");
  ASSERT_EQ(tf.code, 0) << tf.err;
  EXPECT_NE(tf.out.find("cl/pitch at 8 Hz: magnitude 5.1"), std::string::npos) << tf.out;

  const Outcome bad = run("analyze \"" + (dir_ / "f" / "monitors.csv").string() +
                          "\" --column cl --input pitch --frequency 0.5");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("5 periods"), std::string::npos) << bad.err;

  EXPECT_EQ(run("analyze \"" + (dir_ / "f" / "monitors.csv").string() + "\"").code, 1);
  EXPECT_EQ(run("analyze \"" + (dir_ / "missing.csv").string() + "\" --column cl").code, 1);
}

TEST_F(Cli, AnalyzeFreeResponseModes) {
  ASSERT_EQ(run("run -q " + inputs(kData + "/flutter.cfg", kData + "/flutter.bdf") + " --out-dir \"" +
                (dir_ / "fr").string() + "\"")
                .code,
            0);
  const Outcome o = run("analyze \"" + (dir_ / "fr" / "history.csv").string() + "\" --column q_2 --modes 2");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("frequency_hz,damping\n", 0), 0u) << o.out;
  EXPECT_GE(std::count(o.out.begin(), o.out.end(), '\n'), 3);
}
