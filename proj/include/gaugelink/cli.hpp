#pragma once
// Run configuration, scenario execution and CSV/manifest persistence for the command-line driver.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "gaugelink/doublewell.hpp"
#include "gaugelink/errors.hpp"
#include "gaugelink/fourlevel.hpp"
#include "gaugelink/lattice.hpp"
#include "gaugelink/meanfield.hpp"
#include "gaugelink/tdse.hpp"

namespace gaugelink::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.4.0";

enum class Subcommand { spectrum, fourlevel, tdse, lattice_spectrum, lattice_quench, josephson, meanfield };

inline const std::vector<std::pair<Subcommand, std::string>>& subcommand_names() {
  static const std::vector<std::pair<Subcommand, std::string>> n = {
      {Subcommand::spectrum, "spectrum"},
      {Subcommand::fourlevel, "fourlevel"},
      {Subcommand::tdse, "tdse"},
      {Subcommand::lattice_spectrum, "lattice-spectrum"},
      {Subcommand::lattice_quench, "lattice-quench"},
      {Subcommand::josephson, "josephson"},
      {Subcommand::meanfield, "meanfield"},
  };
  return n;
}

inline std::string to_string(Subcommand s) {
  for (const auto& [k, v] : subcommand_names())
    if (k == s) return v;
  return "?";
}

inline Subcommand subcommand_from(const std::string& name) {
  for (const auto& [k, v] : subcommand_names())
    if (v == name) return k;
  throw ConfigError(fmt::format("unknown subcommand '{}'", name));
}

/// Every accepted parameter with its default; the value type is enforced on input.
inline json defaults(Subcommand s) {
  switch (s) {
    case Subcommand::spectrum:
      return {{"d_R", 2.0}, {"r", 1.0}, {"delta", 0.5}, {"g_e", 0.0}, {"g_o", 0.0}, {"n_levels", 4}};
    case Subcommand::fourlevel:
      return {{"scenario", "green"}, {"d_R", 2.0},   {"r", 1.0},
              {"delta", 0.5},        {"t_final", 600.0}, {"dt_out", 0.5}, {"literal_O_L_plus", false}};
    case Subcommand::tdse:
      return {{"scenario", "fig4_static"}, {"n_particle_basis", 12}, {"n_impurity_basis", 8}, {"omega_i", nullptr},
              {"omega_rf", 2500.0},        {"q", 0.2},               {"t_final", 200.0},      {"dt_out", 0.5},
              {"rel_tol", 1e-9}};
    case Subcommand::lattice_spectrum:
      return {{"sites", 6},    {"J", 1.0},      {"m", nullptr},  {"m_min", -3.0}, {"m_max", 3.0},
              {"m_step", 0.25}, {"n_max", 1}, {"k_lowest", 6}, {"g_electric", 0.0}};
    case Subcommand::lattice_quench:
      return {{"sites", 6}, {"J", 1.0}, {"m", 1.0}, {"n_max", 1}, {"initial", "g_plus"}, {"t_final", 50.0},
              {"dt_out", 0.1}};
    case Subcommand::josephson:
      return {{"N_values", json::array({2, 4, 8, 16, 32, 64, 128})}, {"theta", 0.0}, {"J_z", -0.011}};
    case Subcommand::meanfield:
      return {{"N", 10},           {"g", 0.21},       {"d_R", 2.0},        {"r", 1.0},
              {"delta", 0.5},      {"g_e_up", 1.0},   {"g_e_down", -1.0},  {"x_max", 10.0},
              {"n_points", 512},   {"tol", 1e-9},     {"abs_tol", 1e-10},  {"pulse", "compensating"},
              {"pulse_magnitude", false}, {"omega_R", 0.5}, {"t_final", 200.0}, {"dt_out", 0.5}};
  }
  return json::object();
}

struct Sweep {
  std::string key;
  std::vector<json> values;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::fourlevel;
  json parameters;
  std::optional<Sweep> sweep;
  std::string output_dir = "out";
};

namespace detail {

inline bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  return false;
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Fills defaults and rejects unknown keys or mistyped values.
inline json merge_parameters(Subcommand s, const json& given) {
  json p = defaults(s);
  if (!given.is_object()) throw ConfigError("'parameters' must be an object");
  for (const auto& [k, v] : given.items()) {
    if (!p.contains(k)) throw ConfigError(fmt::format("unknown parameter '{}' for {}", k, to_string(s)));
    if (!detail::same_kind(p[k], v)) throw ConfigError(fmt::format("parameter '{}' has the wrong type", k));
    p[k] = v;
  }
  return p;
}

inline void validate(const RunConfig& c);

inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::vector<std::string> known = {"subcommand", "parameters", "sweep", "output_dir"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(fmt::format("unknown key '{}'", k));
  }
  if (!j.contains("subcommand") || !j["subcommand"].is_string()) throw ConfigError("missing key 'subcommand'");
  RunConfig c;
  c.subcommand = subcommand_from(j["subcommand"].get<std::string>());
  c.parameters = merge_parameters(c.subcommand, j.value("parameters", json::object()));
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("'output_dir' must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_object() || !s.contains("key") || !s.contains("values") || !s["values"].is_array() ||
        s["values"].empty()) {
      throw ConfigError("'sweep' needs a 'key' and a non-empty 'values' array");
    }
    Sweep sw{s["key"].get<std::string>(), {}};
    if (!c.parameters.contains(sw.key)) throw ConfigError(fmt::format("unknown sweep key '{}'", sw.key));
    for (const auto& v : s["values"]) {
      if (!detail::same_kind(c.parameters[sw.key], v)) {
        throw ConfigError(fmt::format("sweep value for '{}' has the wrong type", sw.key));
      }
      sw.values.push_back(v);
    }
    c.sweep = sw;
  }
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(fmt::format("parse error at line {}, column {}: {}", line, col, e.what()));
  }
  return config_from_json(j);
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline json to_json(const RunConfig& c) {
  json j = {{"subcommand", to_string(c.subcommand)}, {"parameters", c.parameters}};
  if (c.sweep) j["sweep"] = {{"key", c.sweep->key}, {"values", c.sweep->values}};
  j["output_dir"] = c.output_dir;
  return j;
}

// Module configurations built from a parameter document.
namespace build {

inline doublewell::DoubleWellParams well(const json& p) {
  return doublewell::from_geometry(p["d_R"].get<double>(), p["r"].get<double>(), p["delta"].get<double>());
}

inline fourlevel::Scenario fourlevel_scenario(const std::string& s) {
  if (s == "green") return fourlevel::Scenario::green;
  if (s == "blue") return fourlevel::Scenario::blue;
  if (s == "magenta") return fourlevel::Scenario::magenta;
  throw ConfigError(fmt::format("unknown fourlevel scenario '{}'", s));
}

inline tdse::Scenario tdse_scenario(const json& p) {
  const std::string name = p["scenario"].get<std::string>();
  tdse::Scenario s;
  if (name == "fig4_static") {
    s = tdse::fig4_static();
  } else if (name == "fig4_quench") {
    s = p["omega_i"].is_null() ? tdse::fig4_quench() : tdse::fig4_quench(p["omega_i"].get<double>());
  } else if (name == "fig4_micromotion") {
    const double wi = p["omega_i"].is_null() ? 100.0 : p["omega_i"].get<double>();
    s = tdse::fig4_micromotion(p["omega_rf"].get<double>(), wi, p["q"].get<double>());
  } else {
    throw ConfigError(fmt::format("unknown tdse scenario '{}'", name));
  }
  s.n_particle_basis = p["n_particle_basis"].get<int>();
  s.n_impurity_basis = p["n_impurity_basis"].get<int>();
  return s;
}

inline lattice::LatticeConfig lattice(const json& p) {
  lattice::LatticeConfig c;
  c.sites = p["sites"].get<int>();
  c.J = p["J"].get<double>();
  c.m = p["m"].is_null() ? 0.0 : p["m"].get<double>();
  c.n_max = p["n_max"].get<int>();
  if (p.contains("g_electric")) c.g_electric = p["g_electric"].get<double>();
  return c;
}

inline lattice::Reference reference(const std::string& s) {
  if (s == "g_plus") return lattice::Reference::g_plus;
  if (s == "g_minus") return lattice::Reference::g_minus;
  if (s == "g_zero") return lattice::Reference::g_zero;
  throw ConfigError(fmt::format("unknown initial state '{}'", s));
}

inline meanfield::MeanFieldConfig meanfield(const json& p) {
  meanfield::MeanFieldConfig c;
  c.N = p["N"].get<int>();
  c.g = p["g"].get<double>();
  c.well = well(p);
  c.couplings = {p["g_e_up"].get<double>(), p["g_e_down"].get<double>(), 0.0, 0.0};
  c.grid = {p["x_max"].get<double>(), p["n_points"].get<int>()};
  c.tol = p["tol"].get<double>();
  return c;
}

}  // namespace build

/// Parameter-level checks against the module invariants, for every sweep entry.
inline void validate_parameters(Subcommand s, const json& p) {
  auto positive = [&](const char* k) {
    if (!(p[k].get<double>() > 0.0)) throw ConfigError(fmt::format("parameter '{}' must be positive", k));
  };
  try {
    switch (s) {
      case Subcommand::spectrum:
        build::well(p);
        if (p["n_levels"].get<int>() < 1 || p["n_levels"].get<int>() > 40) {
          throw ConfigError("parameter 'n_levels' must be in [1, 40]");
        }
        break;
      case Subcommand::fourlevel:
        build::well(p);
        build::fourlevel_scenario(p["scenario"].get<std::string>());
        positive("t_final");
        positive("dt_out");
        break;
      case Subcommand::tdse:
        build::tdse_scenario(p);
        positive("t_final");
        positive("dt_out");
        positive("rel_tol");
        if (p["n_particle_basis"].get<int>() < 2) throw ConfigError("parameter 'n_particle_basis' must be >= 2");
        if (p["n_impurity_basis"].get<int>() < 1) throw ConfigError("parameter 'n_impurity_basis' must be >= 1");
        break;
      case Subcommand::lattice_spectrum:
        build::lattice(p).validate();
        positive("m_step");
        if (p["k_lowest"].get<int>() < 3) throw ConfigError("parameter 'k_lowest' must be >= 3");
        break;
      case Subcommand::lattice_quench:
        build::lattice(p).validate();
        build::reference(p["initial"].get<std::string>());
        positive("t_final");
        positive("dt_out");
        break;
      case Subcommand::josephson:
        for (const auto& n : p["N_values"]) {
          if (!n.is_number_integer() || n.get<int>() < 2 || n.get<int>() % 2 != 0 || n.get<int>() > 128) {
            throw ConfigError("parameter 'N_values' must hold even integers in [2, 128]");
          }
        }
        break;
      case Subcommand::meanfield: {
        build::meanfield(p).validate();
        const std::string pulse = p["pulse"].get<std::string>();
        if (pulse != "compensating" && pulse != "constant") throw ConfigError("parameter 'pulse' must be compensating or constant");
        positive("t_final");
        positive("dt_out");
        positive("abs_tol");
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("invalid {} parameters: {}", to_string(s), e.what()));
  }
}

inline std::vector<json> expand(const RunConfig& c) {
  if (!c.sweep) return {c.parameters};
  std::vector<json> out;
  for (const auto& v : c.sweep->values) {
    json p = c.parameters;
    p[c.sweep->key] = v;
    out.push_back(p);
  }
  return out;
}

inline void validate(const RunConfig& c) {
  for (const auto& p : expand(c)) validate_parameters(c.subcommand, p);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  json meta = json::object();
};

inline std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += fmt::format("{}{:.15g}", i ? "," : "", r[i]);
    s += "\n";
  }
  return s;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

// Frozen from the first run at m/J = 1, L = 6 (measured average -0.108).
inline constexpr double kFluxAverageThreshold = 0.15;

// Scenario runners: each returns the tables of one parameter point.
namespace run {

inline std::vector<Table> spectrum(const json& p) {
  const auto well = build::well(p);
  const auto ch = doublewell::ChannelInteraction::from_static_couplings(p["g_e"].get<double>(), p["g_o"].get<double>());
  const auto st = doublewell::solve_interacting(well, ch, p["n_levels"].get<int>());
  Table t{"spectrum", {"level", "energy", "nu1", "nu2", "near_degenerate"}, {}};
  for (std::size_t i = 0; i < st.size(); ++i) {
    t.rows.push_back({double(i), st[i].energy, st[i].nu1, st[i].nu2, st[i].near_degenerate ? 1.0 : 0.0});
  }
  return {t};
}

inline std::vector<Table> fourlevel(const json& p) {
  const auto m = fourlevel::scenario_model(build::fourlevel_scenario(p["scenario"].get<std::string>()), build::well(p));
  const auto tr = fourlevel::evolve(m, fourlevel::state_R_minus(), p["t_final"].get<double>(), p["dt_out"].get<double>());
  const auto ob = fourlevel::observables(tr, p["literal_O_L_plus"].get<bool>());
  Table t{"fourlevel", {"t", "O_L_plus", "O_R_minus", "correlation", "g_L", "g_R"}, {}};
  for (std::size_t k = 0; k < ob.size(); ++k) {
    t.rows.push_back({tr.times[k], ob[k].O_L_plus, ob[k].O_R_minus, ob[k].correlation, ob[k].g_L, ob[k].g_R});
  }
  return {t};
}

inline std::vector<Table> tdse(const json& p) {
  const auto model = tdse::build_model(build::tdse_scenario(p));
  const auto init = tdse::initial_state(model);
  tdse::PropagateOptions opt;
  opt.dt_out = p["dt_out"].get<double>();
  opt.rel_tol = p["rel_tol"].get<double>();
  const auto tr = tdse::propagate(model, init.coefficients, p["t_final"].get<double>(), opt);
  const auto ob = tdse::observables(model, tr);
  Table t{"tdse", {"t", "O_L_plus", "O_R_minus", "correlation", "g_L", "g_R", "norm"}, {}};
  for (std::size_t k = 0; k < ob.size(); ++k) {
    t.rows.push_back(
        {tr.times[k], ob[k].O_L_plus, ob[k].O_R_minus, ob[k].correlation, ob[k].g_L, ob[k].g_R, ob[k].norm});
  }
  t.meta = {{"scenario", p["scenario"]},
            {"n_particle_basis", model.n_particle},
            {"n_impurity_basis", model.n_impurity},
            {"initial_completeness", init.completeness},
            {"steps", tr.stats.steps},
            {"rhs_calls", tr.stats.rhs_calls},
            {"max_step", tr.stats.max_step},
            {"integrator_seconds", tr.stats.wall_seconds}};
  return {t};
}

inline std::vector<Table> lattice_spectrum(const json& p) {
  auto c = build::lattice(p);
  const int k = p["k_lowest"].get<int>();
  const auto basis = lattice::enumerate_gauge_sector(c);
  std::vector<double> masses;
  if (!p["m"].is_null()) {
    masses.push_back(p["m"].get<double>());
  } else {
    const double lo = p["m_min"].get<double>(), hi = p["m_max"].get<double>(), st = p["m_step"].get<double>();
    const long n = std::lround((hi - lo) / st);
    for (long i = 0; i <= n; ++i) masses.push_back(lo + i * st);
  }
  Table t{"lattice_spectrum", {"m"}, {}};
  for (int i = 0; i < k; ++i) t.columns.push_back(fmt::format("E{}", i));
  t.columns.push_back("gap_ratio");
  for (double m : masses) {
    c.m = m;
    const auto s = lattice::spectrum(c, basis, k);
    std::vector<double> row{m};
    for (int i = 0; i < s.values.size(); ++i) row.push_back(s.values(i));
    row.push_back((s.values(1) - s.values(0)) / (s.values(2) - s.values(0)));
    t.rows.push_back(row);
  }
  return {t};
}

inline std::vector<Table> lattice_quench(const json& p) {
  const auto c = build::lattice(p);
  const double tf = p["t_final"].get<double>(), dt = p["dt_out"].get<double>();
  std::vector<double> times;
  const long n = static_cast<long>(std::floor(tf / dt + 1e-9));
  for (long i = 0; i <= n; ++i) times.push_back(i * dt);
  const auto r = lattice::quench_evolve(c, build::reference(p["initial"].get<std::string>()), times);
  Table t{"lattice_quench", {"t", "flux_density", "P0", "Pplus", "Pminus"}, {}};
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    t.rows.push_back({r.times[i], r.flux_density[i], r.p_zero[i], r.p_plus[i], r.p_minus[i]});
  }
  double avg = 0.0;
  for (std::size_t i = 1; i < r.times.size(); ++i) {
    avg += 0.5 * (r.flux_density[i] + r.flux_density[i - 1]) * (r.times[i] - r.times[i - 1]);
  }
  if (r.times.size() > 1) avg /= r.times.back() - r.times.front();
  t.meta = {{"flux_time_average", avg}, {"flux_average_threshold", kFluxAverageThreshold}};
  return {t};
}

inline std::vector<Table> josephson(const json& p) {
  Table t{"josephson", {"N", "theta", "residual", "inv_sqrt_N"}, {}};
  const double theta = p["theta"].get<double>(), jz = p["J_z"].get<double>();
  for (const auto& nv : p["N_values"]) {
    const int N = nv.get<int>();
    t.rows.push_back({double(N), theta, lattice::josephson_residual(N, theta, jz), 1.0 / std::sqrt(double(N))});
  }
  return {t};
}

inline std::vector<Table> meanfield(const json& p) {
  const auto cfg = build::meanfield(p);
  const meanfield::Discretization d(cfg);
  std::function<double(double)> pulse;
  if (p["pulse"].get<std::string>() == "compensating") {
    pulse = meanfield::compensating_pulse(meanfield::well_mode_energies(cfg), p["pulse_magnitude"].get<bool>());
  } else {
    pulse = meanfield::constant_pulse(p["omega_R"].get<double>());
  }
  meanfield::PropagateOptions opt;
  opt.dt_out = p["dt_out"].get<double>();
  opt.abs_tol = p["abs_tol"].get<double>();
  const auto tr = meanfield::propagate(d, meanfield::initial_state(d), pulse, p["t_final"].get<double>(), opt);
  const auto ob = meanfield::mf_observables(d, tr);
  Table t{"meanfield", {"t", "O_L", "O_R", "O_L_plus", "correlation", "g_L", "omega_R"}, {}};
  for (std::size_t k = 0; k < ob.size(); ++k) {
    t.rows.push_back(
        {tr.times[k], ob[k].O_L, ob[k].O_R, ob[k].O_L_plus, ob[k].correlation, ob[k].g_L, pulse(tr.times[k])});
  }
  t.meta = {{"steps", tr.steps}, {"max_norm_drift", tr.max_norm_drift}, {"integrator_seconds", tr.wall_seconds}};
  return {t};
}

}  // namespace run

inline std::vector<Table> run_point(Subcommand s, const json& p) {
  switch (s) {
    case Subcommand::spectrum: return run::spectrum(p);
    case Subcommand::fourlevel: return run::fourlevel(p);
    case Subcommand::tdse: return run::tdse(p);
    case Subcommand::lattice_spectrum: return run::lattice_spectrum(p);
    case Subcommand::lattice_quench: return run::lattice_quench(p);
    case Subcommand::josephson: return run::josephson(p);
    case Subcommand::meanfield: return run::meanfield(p);
  }
  return {};
}

inline int thread_cap() {
  if (const char* env = std::getenv("GAUGELINK_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string value_label(const json& v) {
  std::string s = v.is_number_float() ? fmt::format("{:.15g}", v.get<double>()) : v.dump();
  for (char& ch : s)
    if (ch == '"' || ch == '/' || ch == ' ') ch = '_';
  return s;
}

struct Output {
  std::string file;
  std::string csv;
  json meta = json::object();
};

/// Runs every sweep entry (at most GAUGELINK_THREADS at once) and renders the CSV files.
inline std::vector<Output> execute_tables(const RunConfig& c) {
  const auto points = expand(c);
  std::vector<std::vector<Table>> results(points.size());
  const std::size_t cap = static_cast<std::size_t>(thread_cap());
  for (std::size_t start = 0; start < points.size(); start += cap) {
    std::vector<std::future<std::vector<Table>>> jobs;
    for (std::size_t i = start; i < std::min(points.size(), start + cap); ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] { return run_point(c.subcommand, points[i]); }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) results[start + i] = jobs[i].get();
  }
  std::vector<Output> out;
  if (!c.sweep) {
    for (const auto& t : results[0]) out.push_back({t.name + ".csv", to_csv(t), t.meta});
    return out;
  }
  // Per-entry files plus one table with the swept value prepended to each row.
  std::map<std::string, Table> combined;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const json& v = c.sweep->values[i];
    for (const auto& t : results[i]) {
      out.push_back({fmt::format("{}__{}={}.csv", t.name, c.sweep->key, value_label(v)), to_csv(t), t.meta});
      if (!v.is_number()) continue;
      auto [it, fresh] = combined.try_emplace(t.name);
      if (fresh) {
        order.push_back(t.name);
        it->second.name = t.name + "__sweep";
        it->second.columns = {"sweep_" + c.sweep->key};
        it->second.columns.insert(it->second.columns.end(), t.columns.begin(), t.columns.end());
      }
      for (const auto& r : t.rows) {
        std::vector<double> row{v.get<double>()};
        row.insert(row.end(), r.begin(), r.end());
        it->second.rows.push_back(row);
      }
    }
  }
  for (const auto& n : order) out.push_back({combined[n].name + ".csv", to_csv(combined[n])});
  return out;
}

inline json tolerances(const RunConfig& c) {
  const json& p = c.parameters;
  switch (c.subcommand) {
    case Subcommand::spectrum: return {{"root", 1e-12}, {"norm", 1e-12}};
    case Subcommand::fourlevel: return {{"method", "eigendecomposition"}};
    case Subcommand::tdse: return {{"rel_tol", p["rel_tol"]}, {"abs_tol", 1e-12}};
    case Subcommand::lattice_spectrum: return {{"degeneracy", 1e-8}, {"dense_limit", lattice::kDenseLimit}};
    case Subcommand::lattice_quench: return {{"dense_limit", lattice::kDenseLimit}, {"krylov", 1e-10}};
    case Subcommand::josephson: return json::object();
    case Subcommand::meanfield: return {{"rel_tol", p["tol"]}, {"abs_tol", p["abs_tol"]}};
  }
  return json::object();
}

/// Writes the CSVs and manifest.json; 0 on success, 1 on numerical failure, 2 on config error.
inline int execute(const RunConfig& c, std::ostream& log) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Output> out;
  try {
    out = execute_tables(c);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::create_directories(c.output_dir);
  json sums = json::object();
  json meta = json::object();
  for (const auto& o : out) {
    std::ofstream f(fs::path(c.output_dir) / o.file, std::ios::binary);
    f << o.csv;
    sums[o.file] = sha256_hex(o.csv);
    if (!o.meta.empty()) meta[o.file] = o.meta;
  }
  json manifest = {{"artifact_version", kVersion},
                   {"config", to_json(c)},
                   {"tolerances", tolerances(c)},
                   {"wall_seconds", wall},
                   {"checksums", sums},
                   {"outputs", meta}};
  if (c.subcommand == Subcommand::meanfield) {
    manifest["notes"] = "impurity couplings default to the opposite even-wave pair (+1, -1); odd-wave terms are not used";
  }
  std::ofstream(fs::path(c.output_dir) / "manifest.json") << manifest.dump(2) << "\n";
  log << fmt::format("wrote {} file(s) to {} in {:.2f} s\n", out.size(), c.output_dir, wall);
  return 0;
}

struct Recipe {
  std::string name;
  std::string target;
  json config;
};

inline const std::vector<Recipe>& recipes() {
  static const std::vector<Recipe> r = {
      {"fig3_green", "figure 3, green: four-level model, opposite couplings at resonance",
       {{"subcommand", "fourlevel"}, {"parameters", {{"scenario", "green"}}}}},
      {"fig3_blue", "figure 3, blue: same-sign couplings, drive at E_R - E_L",
       {{"subcommand", "fourlevel"}, {"parameters", {{"scenario", "blue"}}}}},
      {"fig3_magenta", "figure 3, magenta: same-sign couplings at the shifted resonance",
       {{"subcommand", "fourlevel"}, {"parameters", {{"scenario", "magenta"}}}}},
      {"fig4_static", "figure 4: static impurity",
       {{"subcommand", "tdse"}, {"parameters", {{"scenario", "fig4_static"}}}}},
      {"fig4_quench", "figure 4: well quench, trapped impurity",
       {{"subcommand", "tdse"}, {"parameters", {{"scenario", "fig4_quench"}}}}},
      {"fig4_micromotion", "figure 4: Paul-trap impurity with micromotion",
       {{"subcommand", "tdse"}, {"parameters", {{"scenario", "fig4_micromotion"}}}}},
      {"fig5_pulse", "figure 5: condensate with the compensating pulse",
       {{"subcommand", "meanfield"}, {"parameters", json::object()}}},
      {"spectrum_scan", "lattice spectrum versus m/J, L = 6",
       {{"subcommand", "lattice-spectrum"}, {"parameters", json::object()}}},
      {"quench_L6", "flux oscillation after a quench from |g+>, m/J = 1",
       {{"subcommand", "lattice-quench"}, {"parameters", json::object()}}},
  };
  return r;
}

inline const Recipe& find_recipe(const std::string& name) {
  for (const auto& r : recipes())
    if (r.name == name) return r;
  throw ConfigError(fmt::format("unknown recipe '{}'", name));
}

inline RunConfig recipe_config(const std::string& name, const std::string& output_dir) {
  json j = find_recipe(name).config;
  j["output_dir"] = output_dir;
  return config_from_json(j);
}

}  // namespace gaugelink::cli
