#include "aerocouple/aerocouple.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace {

bool g_quiet = false;

int exit_code(ac_status s) {
  switch (s) {
    case AC_OK: return 0;
    case AC_ERR_CONVERGENCE:
    case AC_ERR_NUMERIC:
    case AC_ERR_INTERNAL: return 2;
    default: return 1;
  }
}

const char* status_name(ac_status s) {
  switch (s) {
    case AC_ERR_PARSE: return "parse error";
    case AC_ERR_VALIDATION: return "validation error";
    case AC_ERR_CONVERGENCE: return "convergence error";
    case AC_ERR_IO: return "i/o error";
    case AC_ERR_NUMERIC: return "numeric error";
    case AC_ERR_INVALID_ARGUMENT: return "invalid argument";
    default: return "internal error";
  }
}

struct Failure {
  ac_status status;
};

void check(ac_status s) {
  if (s == AC_OK) return;
  std::fprintf(stderr, "aerocouple: %s: %s\n", status_name(s), ac_last_error());
  throw Failure{s};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Model = std::unique_ptr<ac_model, Deleter<ac_model, ac_model_free>>;
using Config = std::unique_ptr<ac_config, Deleter<ac_config, ac_config_free>>;
using Sim = std::unique_ptr<ac_simulation, Deleter<ac_simulation, ac_simulation_free>>;
using Result = std::unique_ptr<ac_result, Deleter<ac_result, ac_result_free>>;
using Sweep = std::unique_ptr<ac_sweep, Deleter<ac_sweep, ac_sweep_free>>;
using Table = std::unique_ptr<ac_table, Deleter<ac_table, ac_table_free>>;

template <class F>
std::string text_of(F&& fill) {
  size_t needed = 0;
  check(fill(nullptr, 0, &needed));
  std::string out(needed, '\0');
  check(fill(out.data(), out.size(), &needed));
  out.resize(needed - 1);
  return out;
}

void say(const std::string& s) {
  if (!g_quiet) std::printf("%s\n", s.c_str());
}

Model load_model(const std::string& path) {
  ac_model* m = nullptr;
  check(ac_model_load(path.c_str(), &m));
  return Model(m);
}

Config load_config(const std::string& path) {
  ac_config* c = nullptr;
  check(ac_config_load(path.c_str(), &c));
  return Config(c);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) {
    std::fprintf(stderr, "aerocouple: i/o error: cannot write '%s'\n", path.string().c_str());
    throw Failure{AC_ERR_IO};
  }
}

struct Options {
  std::string config;
  std::string model;
  std::string out_dir = "output";
  std::string key;
  std::vector<double> values;
  std::string file;
  std::string column;
  std::string input;
  double frequency = 0.0;
  double cut = 0.2;
  int modes = 1;
  bool boundary = false;
};

void cmd_run(const Options& o) {
  const Config cfg = load_config(o.config);
  const Model model = load_model(o.model);
  ac_simulation* s = nullptr;
  check(ac_simulation_create(cfg.get(), model.get(), &s));
  const Sim sim(s);
  ac_result* r = nullptr;
  check(ac_simulation_run(sim.get(), &r));
  const Result result(r);
  check(ac_result_write(result.get(), o.out_dir.c_str()));
  say(text_of([&](char* b, size_t c, size_t* n) { return ac_result_summary(result.get(), b, c, n); }));
}

void cmd_check(const Options& o) {
  const Config cfg = load_config(o.config);
  const Model model = load_model(o.model);
  ac_simulation* s = nullptr;
  check(ac_simulation_create(cfg.get(), model.get(), &s));
  const Sim sim(s);
  say(text_of([&](char* b, size_t c, size_t* n) { return ac_simulation_check(sim.get(), b, c, n); }));
}

void cmd_sweep(const Options& o) {
  const Config cfg = load_config(o.config);
  const Model model = load_model(o.model);
  ac_sweep* sw = nullptr;
  check(ac_sweep_run(cfg.get(), model.get(), o.key.c_str(), o.values.data(), o.values.size(), 0, &sw));
  const Sweep sweep(sw);
  const std::string table = text_of([&](char* b, size_t c, size_t* n) { return ac_sweep_table(sweep.get(), b, c, n); });
  const std::string report = text_of([&](char* b, size_t c, size_t* n) {
    return ac_sweep_boundary(sweep.get(), nullptr, nullptr, nullptr, nullptr, b, c, n);
  });
  write_file(std::filesystem::path(o.out_dir) / "sweep.csv", table);
  write_file(std::filesystem::path(o.out_dir) / "summary.txt", report + "\n");
  say(table + report);
}

std::vector<double> column(const ac_table* t, const std::string& name) {
  std::vector<double> v(ac_table_num_rows(t));
  check(ac_table_column(t, name.c_str(), v.data(), v.size()));
  return v;
}

void cmd_analyze(const Options& o) {
  ac_table* t = nullptr;
  check(ac_table_load(o.file.c_str(), &t));
  const Table table(t);
  char line[256];

  if (o.boundary) {
    const auto speeds = column(table.get(), "value");
    const auto damping = column(table.get(), "damping");
    int found = 0;
    double speed = 0.0;
    check(ac_flutter_boundary(speeds.data(), damping.data(), speeds.size(), &found, &speed));
    if (found) {
      std::snprintf(line, sizeof line, "flutter speed %.6g", speed);
    } else {
      std::snprintf(line, sizeof line, "no stability crossing in the sampled range");
    }
    say(line);
    return;
  }

  if (o.column.empty()) {
    std::fprintf(stderr, "aerocouple: invalid argument: analyze needs --column or --boundary\n");
    throw Failure{AC_ERR_INVALID_ARGUMENT};
  }
  const auto time = column(table.get(), "time");
  const auto output = column(table.get(), o.column);
  if (!o.input.empty()) {
    const auto input = column(table.get(), o.input);
    double mag = 0.0, phase = 0.0;
    int ill = 0;
    check(ac_transfer_function(time.data(), input.data(), output.data(), time.size(), o.frequency, o.cut, &mag,
                               &phase, &ill));
    std::snprintf(line, sizeof line, "%s/%s at %.6g Hz: magnitude %.6e, phase %.4f deg%s", o.column.c_str(),
                  o.input.c_str(), o.frequency, mag, phase, ill ? " (ill-conditioned: weak input)" : "");
    say(line);
    return;
  }
  size_t found = 0;
  check(ac_modal_identification(time.data(), output.data(), time.size(), o.modes, nullptr, nullptr, 0, &found));
  std::vector<double> freq(found), damp(found);
  check(ac_modal_identification(time.data(), output.data(), time.size(), o.modes, freq.data(), damp.data(), found,
                                &found));
  say("frequency_hz,damping");
  for (size_t i = 0; i < found; ++i) {
    std::snprintf(line, sizeof line, "%.9e,%.9e", freq[i], damp[i]);
    say(line);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned aeroelastic coupling driver"};
  app.require_subcommand(1);
  Options o;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only report errors");

  auto* run = app.add_subcommand("run", "Run one simulation");
  auto* check_cmd = app.add_subcommand("check", "Validate inputs and print the interface summary");
  auto* sweep = app.add_subcommand("sweep", "Run one simulation per value of a configuration key");
  for (auto* sub : {run, check_cmd, sweep}) {
    sub->add_option("--config", o.config, "Coupling configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--model", o.model, "Structural model")->required()->check(CLI::ExistingFile);
    sub->add_flag("-q,--quiet", quiet, "Only report errors");
  }
  run->add_option("--out-dir", o.out_dir, "Output directory");
  sweep->add_option("--out-dir", o.out_dir, "Output directory");
  sweep->add_option("--key", o.key, "Configuration key to vary")->required();
  sweep->add_option("--values", o.values, "Comma-separated values")->required()->delimiter(',');

  auto* analyze = app.add_subcommand("analyze", "Postprocess an existing CSV file");
  analyze->add_option("file", o.file, "CSV with a time column, or a sweep table")->required();
  analyze->add_option("--column", o.column, "Response column");
  analyze->add_option("--input", o.input, "Excitation column; computes the transfer function");
  analyze->add_option("--frequency", o.frequency, "Excitation frequency in Hz");
  analyze->add_option("--cut", o.cut, "Leading fraction discarded as transient");
  analyze->add_option("--modes", o.modes, "Expected number of modes");
  analyze->add_flag("--boundary", o.boundary, "Locate the stability crossing in a sweep table");
  analyze->add_flag("-q,--quiet", quiet, "Only report errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  g_quiet = quiet;
  ac_set_log_threshold(quiet ? AC_LOG_WARNING + 1 : AC_LOG_WARNING);
  try {
    if (*run) cmd_run(o);
    if (*check_cmd) cmd_check(o);
    if (*sweep) cmd_sweep(o);
    if (*analyze) cmd_analyze(o);
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
