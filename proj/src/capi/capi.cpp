#include "aerocouple/aerocouple.h"

#include "aerocouple/error.hpp"
#include "aerocouple/history.hpp"
#include "aerocouple/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <new>
#include <string>
#include <vector>

struct ac_model {
  aerocouple::StructuralModel value;
};
struct ac_config {
  aerocouple::CouplingConfig value;
};
struct ac_simulation {
  std::unique_ptr<aerocouple::Simulation> value;
};
struct ac_result {
  aerocouple::CouplingResult value;
  int num_modes = 0;
  std::string summary;
};
struct ac_sweep {
  aerocouple::SweepResult value;
};
struct ac_table {
  aerocouple::CsvTable value;
};

namespace {

thread_local std::string g_error;
thread_local int g_line = 0;
thread_local int g_column = 0;

std::atomic<int> g_threshold{AC_LOG_WARNING};
std::mutex g_callback_mutex;
ac_log_fn g_callback = nullptr;
void* g_user = nullptr;

ac_status fail(ac_status status, const std::string& message) {
  g_error = message;
  g_line = 0;
  g_column = 0;
  return status;
}

template <class F>
ac_status guarded(F&& body) {
  try {
    body();
    return AC_OK;
  } catch (const aerocouple::ParseError& e) {
    fail(AC_ERR_PARSE, e.what());
    g_line = e.line();
    g_column = e.column();
    return AC_ERR_PARSE;
  } catch (const aerocouple::Error& e) {
    return fail(static_cast<ac_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(AC_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw aerocouple::InvalidArgument(std::string(what) + " must not be NULL");
}

ac_status copy_text(const std::string& text, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buffer && capacity > 0) {
    const size_t n = std::min(capacity - 1, text.size());
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  }
  return AC_OK;
}

void install_sink() {
  aerocouple::log::set_sink([](aerocouple::log::Level level, const std::string& message) {
    const int lvl = static_cast<int>(level);
    if (lvl < g_threshold.load()) return;
    std::lock_guard<std::mutex> lock(g_callback_mutex);
    if (g_callback) {
      g_callback(static_cast<ac_log_level>(lvl), message.c_str(), g_user);
    } else if (level == aerocouple::log::Level::Warning) {
      std::fprintf(stderr, "warning: %s\n", message.c_str());
    }
  });
}

struct SinkInstaller {
  SinkInstaller() { install_sink(); }
} g_installer;

}  // namespace

extern "C" {

const char* ac_version(void) { return "0.1.0"; }

const char* ac_last_error(void) { return g_error.c_str(); }

void ac_last_error_location(int* line, int* column) {
  if (line) *line = g_line;
  if (column) *column = g_column;
}

void ac_set_log_callback(ac_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_callback_mutex);
  g_callback = fn;
  g_user = user;
}

void ac_set_log_threshold(int level) { g_threshold.store(level); }

ac_status ac_model_load(const char* path, ac_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ac_model{aerocouple::load_structural_model(path)};
  });
}

ac_status ac_model_parse(const char* text, ac_model** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new ac_model{aerocouple::parse_structural_model(text)};
  });
}

ac_status ac_model_info(const ac_model* model, int* num_modes, int* num_nodes) {
  return guarded([&] {
    require(model, "model");
    if (num_modes) *num_modes = model->value.num_modes();
    if (num_nodes) *num_nodes = model->value.num_nodes();
  });
}

ac_status ac_model_serialize(const ac_model* model, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(model, "model");
    copy_text(aerocouple::serialize_structural_model(model->value), buffer, capacity, needed);
  });
}

void ac_model_free(ac_model* model) { delete model; }

ac_status ac_config_load(const char* path, ac_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ac_config{aerocouple::load_config(path)};
  });
}

ac_status ac_config_parse(const char* text, ac_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new ac_config{aerocouple::parse_config(text)};
  });
}

ac_status ac_config_set(ac_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    aerocouple::set_config_value(config->value, key, value);
  });
}

void ac_config_free(ac_config* config) { delete config; }

ac_status ac_simulation_create(const ac_config* config, const ac_model* model, ac_simulation** out) {
  return guarded([&] {
    require(config, "config");
    require(model, "model");
    require(out, "out");
    auto sim = std::make_unique<aerocouple::Simulation>(config->value, model->value);
    *out = new ac_simulation{std::move(sim)};
  });
}

ac_status ac_simulation_check(const ac_simulation* sim, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(sim, "simulation");
    copy_text(sim->value->check_summary(), buffer, capacity, needed);
  });
}

ac_status ac_simulation_run(ac_simulation* sim, ac_result** out) {
  return guarded([&] {
    require(sim, "simulation");
    require(out, "out");
    auto result = std::make_unique<ac_result>();
    result->value = sim->value->run();
    result->num_modes = sim->value->model().num_modes();
    result->summary = aerocouple::summarize(*sim->value, result->value);
    *out = result.release();
  });
}

void ac_simulation_free(ac_simulation* sim) { delete sim; }

ac_status ac_result_summary(const ac_result* result, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(result, "result");
    copy_text(result->summary, buffer, capacity, needed);
  });
}

ac_status ac_result_write(const ac_result* result, const char* out_dir) {
  return guarded([&] {
    require(result, "result");
    require(out_dir, "out_dir");
    aerocouple::write_outputs(out_dir, result->value, result->num_modes, result->summary);
  });
}

size_t ac_result_num_records(const ac_result* result) { return result ? result->value.history.size() : 0; }

int ac_result_num_modes(const ac_result* result) { return result ? result->num_modes : 0; }

ac_status ac_result_record(const ac_result* result, size_t index, double* time, double* q, double* qdot,
                           double* force) {
  return guarded([&] {
    require(result, "result");
    if (index >= result->value.history.size()) throw aerocouple::InvalidArgument("record index out of range");
    const auto& r = result->value.history[index];
    if (time) *time = r.time;
    const auto copy = [](const Eigen::VectorXd& v, double* dst) {
      if (dst) std::copy(v.data(), v.data() + v.size(), dst);
    };
    copy(r.q, q);
    copy(r.qdot, qdot);
    copy(r.force, force);
  });
}

ac_status ac_result_monitor(const ac_result* result, const char* name, size_t index, double* value) {
  return guarded([&] {
    require(result, "result");
    require(name, "name");
    require(value, "value");
    const auto& table = result->value.monitors;
    const int col = table.column_index(name);
    if (col < 0) throw aerocouple::InvalidArgument(std::string("no monitor named '") + name + "'");
    if (index >= table.rows.size()) throw aerocouple::InvalidArgument("monitor index out of range");
    *value = table.rows[index][static_cast<size_t>(col)];
  });
}

void ac_result_free(ac_result* result) { delete result; }

ac_status ac_sweep_run(const ac_config* config, const ac_model* model, const char* key, const double* values,
                       size_t count, int threads, ac_sweep** out) {
  return guarded([&] {
    require(config, "config");
    require(model, "model");
    require(key, "key");
    require(values, "values");
    require(out, "out");
    const int workers = threads > 0 ? threads : aerocouple::sweep_threads();
    auto sweep = std::make_unique<ac_sweep>();
    sweep->value = aerocouple::run_sweep(config->value, model->value, key,
                                         std::vector<double>(values, values + count), workers);
    *out = sweep.release();
  });
}

ac_status ac_sweep_table(const ac_sweep* sweep, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(sweep, "sweep");
    copy_text(sweep->value.table(), buffer, capacity, needed);
  });
}

ac_status ac_sweep_boundary(const ac_sweep* sweep, int* found, double* speed, double* lower, double* upper,
                            char* report, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(sweep, "sweep");
    const auto& b = sweep->value.boundary;
    if (found) *found = b.found ? 1 : 0;
    if (speed) *speed = b.speed;
    if (lower) *lower = b.lower;
    if (upper) *upper = b.upper;
    std::string text = b.report;
    for (const auto& row : sweep->value.rows) {
      if (!row.ok) text += "\n" + sweep->value.key + " = " + std::to_string(row.value) + " failed: " + row.error;
    }
    copy_text(text, report, capacity, needed);
  });
}

void ac_sweep_free(ac_sweep* sweep) { delete sweep; }

ac_status ac_table_load(const char* path, ac_table** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ac_table{aerocouple::read_csv(path)};
  });
}

size_t ac_table_num_rows(const ac_table* table) { return table ? table->value.rows.size() : 0; }

ac_status ac_table_column(const ac_table* table, const char* name, double* values, size_t capacity) {
  return guarded([&] {
    require(table, "table");
    require(name, "name");
    const std::vector<double> column = table->value.column(name);
    if (values) std::copy_n(column.begin(), std::min(capacity, column.size()), values);
  });
}

void ac_table_free(ac_table* table) { delete table; }

ac_status ac_transfer_function(const double* time, const double* input, const double* output, size_t count,
                               double frequency_hz, double transient_cut, double* magnitude, double* phase_deg,
                               int* ill_conditioned) {
  return guarded([&] {
    require(time, "time");
    require(input, "input");
    require(output, "output");
    const auto tf = aerocouple::transfer_function({time, count}, {input, count}, {output, count}, frequency_hz,
                                                  transient_cut);
    if (magnitude) *magnitude = tf.magnitude;
    if (phase_deg) *phase_deg = tf.phase_deg;
    if (ill_conditioned) *ill_conditioned = tf.ill_conditioned ? 1 : 0;
  });
}

ac_status ac_modal_identification(const double* time, const double* signal, size_t count, int n_expected,
                                  double* frequency_hz, double* damping, size_t capacity, size_t* found) {
  return guarded([&] {
    require(time, "time");
    require(signal, "signal");
    const auto modes = aerocouple::modal_identification({time, count}, {signal, count}, n_expected);
    if (found) *found = modes.size();
    for (size_t i = 0; i < std::min(capacity, modes.size()); ++i) {
      if (frequency_hz) frequency_hz[i] = modes[i].frequency_hz;
      if (damping) damping[i] = modes[i].damping;
    }
  });
}

ac_status ac_flutter_boundary(const double* speeds, const double* damping, size_t count, int* found, double* speed) {
  return guarded([&] {
    require(speeds, "speeds");
    require(damping, "damping");
    const auto b = aerocouple::flutter_boundary({speeds, count}, {damping, count});
    if (found) *found = b.found ? 1 : 0;
    if (speed) *speed = b.speed;
  });
}

}  // extern "C"
