#include "aerocouple/config.hpp"

#include "aerocouple/error.hpp"
#include "aerocouple/model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace aerocouple {

bool is_steady(SimulationMode mode) {
  return mode == SimulationMode::SteadyImposed || mode == SimulationMode::SteadyCoupled;
}

bool is_imposed(SimulationMode mode) {
  return mode == SimulationMode::SteadyImposed || mode == SimulationMode::UnsteadyImposed;
}

std::string_view to_string(SimulationMode mode) {
  switch (mode) {
    case SimulationMode::SteadyImposed: return "STEADY_IMPOSED";
    case SimulationMode::SteadyCoupled: return "STEADY_COUPLED";
    case SimulationMode::UnsteadyImposed: return "UNSTEADY_IMPOSED";
    case SimulationMode::UnsteadyCoupled: return "UNSTEADY_COUPLED";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

double real_value(std::string_view key, std::string_view value) {
  const auto v = parse_real(value);
  if (!v) throw ParseError("cannot parse '" + std::string(value) + "' as a number for " + std::string(key));
  return *v;
}

int int_value(std::string_view key, std::string_view value) {
  value = trim(value);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError("cannot parse '" + std::string(value) + "' as an integer for " + std::string(key));
  }
  return out;
}

std::vector<double> list_value(std::string_view key, std::string_view value) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    const auto piece = value.substr(start, comma == std::string_view::npos ? value.size() - start : comma - start);
    out.push_back(real_value(key, piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Eigen::Vector3d vec3_value(std::string_view key, std::string_view value) {
  const auto v = list_value(key, value);
  if (v.size() != 3) throw ParseError(std::string(key) + " expects three comma-separated values");
  return {v[0], v[1], v[2]};
}

template <typename Enum>
Enum enum_value(std::string_view key, std::string_view value,
                std::initializer_list<std::pair<std::string_view, Enum>> choices) {
  const auto word = upper(trim(value));
  for (const auto& [name, e] : choices) {
    if (word == name) return e;
  }
  std::string allowed;
  for (const auto& [name, e] : choices) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw ParseError("invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected one of " +
                   allowed + ")");
}

using Setter = std::function<void(CouplingConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"MODE",
       [](CouplingConfig& c, auto k, auto v) {
         c.mode = enum_value<SimulationMode>(k, v,
                                             {{"STEADY_IMPOSED", SimulationMode::SteadyImposed},
                                              {"STEADY_COUPLED", SimulationMode::SteadyCoupled},
                                              {"UNSTEADY_IMPOSED", SimulationMode::UnsteadyImposed},
                                              {"UNSTEADY_COUPLED", SimulationMode::UnsteadyCoupled}});
       }},
      {"DT", [](CouplingConfig& c, auto k, auto v) { c.dt = real_value(k, v); }},
      {"N_STEPS", [](CouplingConfig& c, auto k, auto v) { c.n_steps = int_value(k, v); }},
      {"FSI_TOLERANCE", [](CouplingConfig& c, auto k, auto v) { c.fsi_tolerance = real_value(k, v); }},
      {"MAX_FSI_ITERS", [](CouplingConfig& c, auto k, auto v) { c.max_fsi_iters = int_value(k, v); }},
      {"AITKEN_OMEGA0", [](CouplingConfig& c, auto k, auto v) { c.aitken_omega0 = real_value(k, v); }},
      {"AITKEN_OMEGA_MAX", [](CouplingConfig& c, auto k, auto v) { c.aitken_omega_max = real_value(k, v); }},
      {"PREDICTOR",
       [](CouplingConfig& c, auto k, auto v) {
         c.predictor = enum_value<Predictor>(k, v, {{"NONE", Predictor::None}, {"LINEAR", Predictor::Linear}});
       }},
      {"RBF_SUPPORT_RADIUS", [](CouplingConfig& c, auto k, auto v) { c.rbf_support_radius = real_value(k, v); }},
      {"TRANSFER_MODE",
       [](CouplingConfig& c, auto k, auto v) {
         c.transfer_mode = enum_value<TransferMode>(
             k, v, {{"CONSISTENT", TransferMode::Consistent}, {"CONSERVATIVE", TransferMode::Conservative}});
       }},
      {"STRUCT_DAMPING", [](CouplingConfig& c, auto k, auto v) { c.structural_damping = real_value(k, v); }},
      {"SPECTRAL_RADIUS", [](CouplingConfig& c, auto k, auto v) { c.spectral_radius = real_value(k, v); }},
      {"STEADY_MAX_PSEUDO_STEPS",
       [](CouplingConfig& c, auto k, auto v) { c.steady_max_pseudo_steps = int_value(k, v); }},
      {"TRANSIENT_CUT", [](CouplingConfig& c, auto k, auto v) { c.transient_cut = real_value(k, v); }},
      {"AERO_MODEL",
       [](CouplingConfig& c, auto k, auto v) {
         c.aero_model = enum_value<AeroModel>(k, v,
                                              {{"QUASI_STEADY", AeroModel::QuasiSteady},
                                               {"UNSTEADY", AeroModel::Unsteady},
                                               {"SYNTHETIC_PRESSURE", AeroModel::SyntheticPressure}});
       }},
      {"FLUID_DENSITY", [](CouplingConfig& c, auto k, auto v) { c.section.density = real_value(k, v); }},
      {"UINF", [](CouplingConfig& c, auto k, auto v) { c.section.velocity = real_value(k, v); }},
      {"ALPHA_DEG", [](CouplingConfig& c, auto k, auto v) { c.section.alpha_deg = real_value(k, v); }},
      {"CHORD", [](CouplingConfig& c, auto k, auto v) { c.section.chord = real_value(k, v); }},
      {"SPAN", [](CouplingConfig& c, auto k, auto v) { c.section.span = real_value(k, v); }},
      {"AXIS_X", [](CouplingConfig& c, auto k, auto v) { c.section.axis_x = real_value(k, v); }},
      {"LEADING_EDGE", [](CouplingConfig& c, auto k, auto v) { c.section.leading_edge = vec3_value(k, v); }},
      {"AERO_POINTS", [](CouplingConfig& c, auto k, auto v) { c.section.contour_points = int_value(k, v); }},
      {"WAGNER_A1", [](CouplingConfig& c, auto k, auto v) { c.section.wagner.a1 = real_value(k, v); }},
      {"WAGNER_B1", [](CouplingConfig& c, auto k, auto v) { c.section.wagner.b1 = real_value(k, v); }},
      {"WAGNER_A2", [](CouplingConfig& c, auto k, auto v) { c.section.wagner.a2 = real_value(k, v); }},
      {"WAGNER_B2", [](CouplingConfig& c, auto k, auto v) { c.section.wagner.b2 = real_value(k, v); }},
      {"PRESSURE_P0", [](CouplingConfig& c, auto k, auto v) { c.pressure.p0 = real_value(k, v); }},
      {"PRESSURE_GRADIENT", [](CouplingConfig& c, auto k, auto v) { c.pressure.gradient = vec3_value(k, v); }},
      {"PRESSURE_RATE", [](CouplingConfig& c, auto k, auto v) { c.pressure.rate = real_value(k, v); }},
      {"SURFACE",
       [](CouplingConfig& c, auto k, auto v) {
         c.pressure.surface =
             enum_value<SurfaceKind>(k, v, {{"AIRFOIL", SurfaceKind::Airfoil}, {"CUBE", SurfaceKind::Cube}});
       }},
      {"CUBE_CENTER", [](CouplingConfig& c, auto k, auto v) { c.pressure.cube_center = vec3_value(k, v); }},
      {"CUBE_SIZE", [](CouplingConfig& c, auto k, auto v) { c.pressure.cube_size = real_value(k, v); }},
      {"CUBE_DIVISIONS", [](CouplingConfig& c, auto k, auto v) { c.pressure.cube_divisions = int_value(k, v); }},
      {"IMPOSED_AMPLITUDE", [](CouplingConfig& c, auto k, auto v) { c.imposed.amplitude = list_value(k, v); }},
      {"IMPOSED_FREQUENCY", [](CouplingConfig& c, auto k, auto v) { c.imposed.frequency_hz = list_value(k, v); }},
      {"IMPOSED_BIAS", [](CouplingConfig& c, auto k, auto v) { c.imposed.bias = list_value(k, v); }},
      {"IMPOSED_PHASE_DEG", [](CouplingConfig& c, auto k, auto v) { c.imposed.phase_deg = list_value(k, v); }},
      {"IMPOSED_TABLE",
       [](CouplingConfig& c, auto, auto v) { c.imposed.table = std::filesystem::path(std::string(trim(v))); }},
      {"INITIAL_Q", [](CouplingConfig& c, auto k, auto v) { c.initial_q = list_value(k, v); }},
      {"INITIAL_QDOT", [](CouplingConfig& c, auto k, auto v) { c.initial_qdot = list_value(k, v); }},
  };
  return table;
}

}  // namespace

void set_config_value(CouplingConfig& config, std::string_view key, std::string_view value) {
  const auto name = upper(trim(key));
  const auto it = setters().find(name);
  if (it == setters().end()) throw ParseError("unknown configuration key '" + std::string(trim(key)) + "'");
  const auto v = trim(value);
  if (v.empty()) throw ParseError("empty value for " + name);
  it->second(config, name, v);
}

void CouplingConfig::validate() const {
  if (!is_steady(mode) && !(dt > 0.0)) throw ValidationError("DT must be positive for unsteady modes");
  if (!is_steady(mode) && n_steps < 1) throw ValidationError("N_STEPS must be at least 1");
  if (!(fsi_tolerance > 0.0)) throw ValidationError("FSI_TOLERANCE must be positive");
  if (max_fsi_iters < 1) throw ValidationError("MAX_FSI_ITERS must be at least 1");
  if (!(aitken_omega0 > 0.0 && aitken_omega0 <= aitken_omega_max && aitken_omega_max <= 1.0)) {
    throw ValidationError("Aitken factors must satisfy 0 < AITKEN_OMEGA0 <= AITKEN_OMEGA_MAX <= 1");
  }
  if (rbf_support_radius && !(*rbf_support_radius > 0.0)) throw ValidationError("RBF_SUPPORT_RADIUS must be positive");
  if (structural_damping && *structural_damping < 0.0) throw ValidationError("STRUCT_DAMPING must be non-negative");
  if (!(spectral_radius >= 0.0 && spectral_radius <= 1.0)) throw ValidationError("SPECTRAL_RADIUS must lie in [0, 1]");
  if (steady_max_pseudo_steps < 1) throw ValidationError("STEADY_MAX_PSEUDO_STEPS must be at least 1");
  if (!(transient_cut >= 0.0 && transient_cut < 1.0)) throw ValidationError("TRANSIENT_CUT must lie in [0, 1)");
  if (aero_model != AeroModel::SyntheticPressure) {
    if (!(section.density >= 0.0)) throw ValidationError("FLUID_DENSITY must be non-negative");
    if (!(section.velocity >= 0.0)) throw ValidationError("UINF must be non-negative");
    if (!(section.chord > 0.0) || !(section.span > 0.0)) throw ValidationError("CHORD and SPAN must be positive");
    if (section.contour_points < 8) throw ValidationError("AERO_POINTS must be at least 8");
    const auto& w = section.wagner;
    if (!(w.b1 > 0.0 && w.b2 > 0.0) || !(w.a1 + w.a2 < 1.0)) {
      throw ValidationError("Wagner coefficients require b1, b2 > 0 and a1 + a2 < 1");
    }
  } else {
    if (!(pressure.cube_size > 0.0) || pressure.cube_divisions < 1) {
      throw ValidationError("CUBE_SIZE must be positive and CUBE_DIVISIONS at least 1");
    }
  }
}

CouplingConfig parse_config(std::string_view text) {
  CouplingConfig config;
  bool have_mode = false;
  bool have_dt = false;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::size_t line_start = pos;
    auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    ++number;
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'KEY = value'", number, 1);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("missing key before '='", number, 1);
    try {
      set_config_value(config, key, line.substr(eq + 1));
    } catch (const ParseError& e) {
      const auto column = static_cast<int>(static_cast<std::size_t>(line.data() - text.data()) - line_start) + 1;
      throw ParseError(e.what(), number, column);
    }
    const auto name = upper(key);
    have_mode |= name == "MODE";
    have_dt |= name == "DT";
  }
  if (!have_mode) throw ParseError("MODE missing");
  if (have_dt && is_steady(config.mode)) {
    config.warnings.push_back("DT is ignored for steady mode " + std::string(to_string(config.mode)));
    log::warn(config.warnings.back());
  }
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return config;
}

CouplingConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open configuration '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  CouplingConfig config;
  try {
    config = parse_config(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
  if (config.imposed.table && config.imposed.table->is_relative()) {
    config.imposed.table = path.parent_path() / *config.imposed.table;
  }
  return config;
}

}  // namespace aerocouple
