#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wkam/controls.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/lax_oleinik.hpp"

namespace wkam {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit codes: 0 success, 2 invariant/check failure, 3 numerical
// non-convergence, 4 config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitConfigError = 4;

struct RunConfig {
  // frame
  std::string frame_name = "grushin-periodic";
  std::string frame_file;
  int frame_table_n = 0;
  // lagrangian
  std::string lagrangian_kind = "mane";
  std::string V_name = "zero";
  std::vector<double> V_constant;
  std::string G_name = "zero";
  double G_constant = 0.0;
  bool G_is_constant = false;
  // grid
  int d = 2;
  int n = 32;
  // controls
  int n_u = 9;
  double control_radius = -1.0; // < 0 means "auto" via the coercivity bound
  // time
  double dt = 0.02;
  double T_max = 20.0;
  // critical
  int K_modes = 3;
  int critical_iters = 120;
  double critical_tol = 1e-6;
  // barrier
  double barrier_T_min = 2.0;
  double barrier_T_max = 32.0;
  int barrier_sources = 1024;
  // lp
  int lp_n = 16;
  int lp_n_u = 5;
  int lp_K_modes = 3;
  double lp_tol = 1e-6;
  // thresholds
  double aubry_eps = -1.0; // < 0 means "auto"
  double w_min = 1e-6;

  std::uint64_t seed = 0;
  std::string output_dir = "out";

  std::string canonical; // serialized form used for the config hash
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  detail::require_keys(j, {"frame", "lagrangian", "grid", "controls", "time", "critical",
                           "barrier", "lp", "thresholds", "seed", "output_dir"},
                       "config root");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::require_keys(g, {"n", "d"}, "grid");
    cfg.n = g.value("n", cfg.n);
    cfg.d = g.value("d", cfg.d);
  }
  if (j.contains("frame")) {
    const auto& f = j.at("frame");
    if (f.is_string()) {
      cfg.frame_name = f.get<std::string>();
    } else {
      detail::require_keys(f, {"file", "d", "m", "n"}, "frame");
      cfg.frame_name = "tabulated";
      cfg.frame_file = f.at("file").get<std::string>();
      cfg.frame_table_n = f.value("n", cfg.n);
    }
  }
  if (j.contains("lagrangian")) {
    const auto& l = j.at("lagrangian");
    detail::require_keys(l, {"kind", "V", "G"}, "lagrangian");
    cfg.lagrangian_kind = l.value("kind", cfg.lagrangian_kind);
    if (cfg.lagrangian_kind != "mane")
      throw ConfigError("only the \"mane\" Lagrangian kind is configurable; custom tables go "
                        "through the library API");
    if (l.contains("V")) {
      const auto& v = l.at("V");
      if (v.is_string()) {
        cfg.V_name = v.get<std::string>();
      } else if (v.is_object() && v.contains("constant")) {
        detail::require_keys(v, {"constant"}, "lagrangian.V");
        cfg.V_name = "constant";
        cfg.V_constant = v.at("constant").get<std::vector<double>>();
      } else {
        throw ConfigError("lagrangian.V must be a name or {\"constant\": [..]}");
      }
    }
    if (l.contains("G")) {
      const auto& g = l.at("G");
      if (g.is_string()) {
        cfg.G_name = g.get<std::string>();
      } else if (g.is_number()) {
        cfg.G_is_constant = true;
        cfg.G_constant = g.get<double>();
      } else {
        throw ConfigError("lagrangian.G must be a name or a number");
      }
    }
  }
  if (j.contains("controls")) {
    const auto& c = j.at("controls");
    detail::require_keys(c, {"n_u", "radius"}, "controls");
    cfg.n_u = c.value("n_u", cfg.n_u);
    if (c.contains("radius")) {
      const auto& r = c.at("radius");
      if (r.is_string()) {
        if (r.get<std::string>() != "auto") throw ConfigError("controls.radius: \"auto\" or number");
      } else {
        cfg.control_radius = r.get<double>();
      }
    }
  }
  if (j.contains("time")) {
    const auto& t = j.at("time");
    detail::require_keys(t, {"dt", "T_max"}, "time");
    cfg.dt = t.value("dt", cfg.dt);
    cfg.T_max = t.value("T_max", cfg.T_max);
  }
  if (j.contains("critical")) {
    const auto& c = j.at("critical");
    detail::require_keys(c, {"K_modes", "iters", "tol"}, "critical");
    cfg.K_modes = c.value("K_modes", cfg.K_modes);
    cfg.critical_iters = c.value("iters", cfg.critical_iters);
    cfg.critical_tol = c.value("tol", cfg.critical_tol);
  }
  if (j.contains("barrier")) {
    const auto& b = j.at("barrier");
    detail::require_keys(b, {"T_min", "T_max", "sources"}, "barrier");
    cfg.barrier_T_min = b.value("T_min", cfg.barrier_T_min);
    cfg.barrier_T_max = b.value("T_max", cfg.barrier_T_max);
    cfg.barrier_sources = b.value("sources", cfg.barrier_sources);
  }
  if (j.contains("lp")) {
    const auto& l = j.at("lp");
    detail::require_keys(l, {"n_lp", "n_u_lp", "K_modes", "tol"}, "lp");
    cfg.lp_n = l.value("n_lp", cfg.lp_n);
    cfg.lp_n_u = l.value("n_u_lp", cfg.lp_n_u);
    cfg.lp_K_modes = l.value("K_modes", cfg.lp_K_modes);
    cfg.lp_tol = l.value("tol", cfg.lp_tol);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    detail::require_keys(t, {"aubry_eps", "w_min"}, "thresholds");
    if (t.contains("aubry_eps")) {
      const auto& e = t.at("aubry_eps");
      if (e.is_string()) {
        if (e.get<std::string>() != "auto")
          throw ConfigError("thresholds.aubry_eps: \"auto\" or number");
      } else {
        cfg.aubry_eps = e.get<double>();
      }
    }
    cfg.w_min = t.value("w_min", cfg.w_min);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);

  if (cfg.critical_tol <= 0.0 || cfg.lp_tol <= 0.0 || cfg.w_min <= 0.0)
    throw ConfigError("all tolerances must be > 0");
  if (cfg.dt <= 0.0 || cfg.T_max <= 0.0) throw ConfigError("time.dt and time.T_max must be > 0");
  if (cfg.n < 4) throw ConfigError("grid.n must be >= 4");

  cfg.canonical = j.dump();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

// Instantiated problem pieces shared by all commands.
struct Problem {
  TorusGrid grid;
  FieldSystem sys;
  LagrangianSpec spec;
  ControlGrid ctrl;
  double radius = 0.0;
};

inline Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.grid = TorusGrid(cfg.d, cfg.n);
  try {
    if (cfg.frame_name == "tabulated")
      p.sys = load_tabulated_frame(cfg.frame_file, cfg.d, cfg.d, cfg.frame_table_n);
    else
      p.sys = make_frame_by_name(cfg.frame_name, cfg.d);
  } catch (const std::exception& e) {
    throw ConfigError(e.what()); // unknown name or unreadable table
  }
  if (p.sys.d != cfg.d) throw ConfigError("frame dimension does not match grid.d");

  if (cfg.V_name == "constant" && static_cast<int>(cfg.V_constant.size()) != p.sys.m)
    throw ConfigError("lagrangian.V constant must have m components");
  VectorFn V = cfg.V_name == "zero"      ? make_zero_V(p.sys.m)
               : cfg.V_name == "constant" ? make_constant_V(cfg.V_constant)
                                          : throw ConfigError("unknown V: " + cfg.V_name);
  ScalarFn G;
  try {
    G = cfg.G_is_constant ? make_constant_G(cfg.G_constant) : make_builtin_G(cfg.G_name);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  p.spec = make_mane_lagrangian(p.sys.m, std::move(V), std::move(G), p.grid);

  p.radius = cfg.control_radius > 0.0 ? cfg.control_radius : control_radius_bound(p.spec);
  p.ctrl = ControlGrid(p.sys.m, p.radius, cfg.n_u);
  check_cfl(cfg.dt, p.radius, max_frame_norm(p.sys, p.grid));
  return p;
}

}  // namespace wkam
