#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "wkam/config.hpp"
#include "wkam/io.hpp"

using namespace wkam;

TEST_CASE("double formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-308, -2.5e17, 0.1}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(kMask) == "inf");
  CHECK(format_double(-kMask) == "-inf");
  CHECK(parse_double("inf") == kMask);
}

TEST_CASE("field save/load is bit-exact") {
  const std::string path = "io_field_test.txt";
  TorusGrid g(2, 8);
  ScalarField f(g);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  for (double& v : f.values) v = val(rng);
  f.values[5] = kMask; // masked entries survive the trip
  f.meta.time_horizon = 2.5;
  f.meta.shift = -0.125;

  save_field(f, path, "test field");
  auto f2 = load_field(path);
  CHECK(f2.grid.d == 2);
  CHECK(f2.grid.n == 8);
  CHECK(f2.meta.time_horizon == 2.5);
  CHECK(f2.meta.shift == -0.125);
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(f.values[i] == f2.values[i]);
  std::remove(path.c_str());

  SECTION("short files are rejected") {
    {
      std::ofstream out(path);
      out << "2 8 0 0\n1 2 3\n";
    }
    CHECK_THROWS(load_field(path));
    std::remove(path.c_str());
  }

  SECTION("missing files are rejected") { CHECK_THROWS(load_field("does_not_exist.txt")); }
}

TEST_CASE("config hash is stable and content-sensitive") {
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") != fnv1a("b"));
  CHECK(fnv1a("config") == fnv1a("config"));
}

TEST_CASE("config parsing") {
  SECTION("defaults from an empty object") {
    auto cfg = parse_config(nlohmann::json::object());
    CHECK(cfg.n == 32);
    CHECK(cfg.d == 2);
    CHECK(cfg.frame_name == "grushin-periodic");
    CHECK(cfg.control_radius == -1.0);
  }

  SECTION("unknown top-level keys are rejected") {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"grdi": {"n": 16}})")), ConfigError);
  }

  SECTION("unknown nested keys are rejected") {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"grid": {"n": 16, "m": 3}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"time": {"dt": 0.02, "step": 1}})")),
                    ConfigError);
  }

  SECTION("values land in the right fields") {
    auto cfg = parse_config(nlohmann::json::parse(R"({
      "frame": "riemannian-identity",
      "grid": {"n": 16, "d": 2},
      "controls": {"n_u": 7, "radius": 1.5},
      "time": {"dt": 0.01, "T_max": 8.0},
      "lagrangian": {"kind": "mane", "V": {"constant": [0.1, 0.2]}, "G": "sin2"},
      "thresholds": {"aubry_eps": "auto", "w_min": 1e-5},
      "seed": 7,
      "output_dir": "runs"
    })"));
    CHECK(cfg.frame_name == "riemannian-identity");
    CHECK(cfg.n == 16);
    CHECK(cfg.n_u == 7);
    CHECK(cfg.control_radius == 1.5);
    CHECK(cfg.dt == 0.01);
    CHECK(cfg.V_name == "constant");
    CHECK(cfg.V_constant == std::vector<double>{0.1, 0.2});
    CHECK(cfg.G_name == "sin2");
    CHECK(cfg.aubry_eps == -1.0); // still "auto"
    CHECK(cfg.w_min == 1e-5);
    CHECK(cfg.seed == 7);
    CHECK(cfg.output_dir == "runs");
  }

  SECTION("invalid values are rejected") {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"grid": {"n": 3}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"time": {"dt": -1}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"lagrangian": {"kind": "table"}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"controls": {"radius": "fast"}})")),
                    ConfigError);
  }

  SECTION("malformed json file reports a config error") {
    const std::string path = "bad_config_test.json";
    {
      std::ofstream out(path);
      out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("missing_config.json"), ConfigError);
  }
}

TEST_CASE("problem assembly") {
  SECTION("auto control radius uses the coercivity bound") {
    RunConfig cfg;
    cfg.frame_name = "riemannian-identity";
    cfg.G_name = "sin2";
    cfg.n = 16;
    auto p = build_problem(cfg);
    // R_u = 2 * sqrt(kappa0) with kappa0 = (sup L(.,0) + K2) / K1 = 8 here
    CHECK(p.radius == Catch::Approx(2.0 * std::sqrt((2.0 + 0.0) / 0.25)).epsilon(0.05));
    CHECK(p.radius > 1.0);
    CHECK(p.ctrl.radius == p.radius);
  }

  SECTION("V constant must match the control dimension") {
    RunConfig cfg;
    cfg.frame_name = "riemannian-identity";
    cfg.V_name = "constant";
    cfg.V_constant = {0.1};
    CHECK_THROWS_AS(build_problem(cfg), ConfigError);
  }

  SECTION("CFL violations are caught at assembly time") {
    RunConfig cfg;
    cfg.frame_name = "riemannian-identity";
    cfg.control_radius = 2.0;
    cfg.dt = 1.0;
    CHECK_THROWS(build_problem(cfg));
  }
}

TEST_CASE("plot field output") {
  const std::string path = "plot_field_test.dat";
  TorusGrid g(1, 4);
  ScalarField f(g);
  f.values = {0.0, 1.0, 2.0, 3.0};
  save_plot_field(f, path, "ramp");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# ramp");
  std::getline(in, line);
  CHECK(line == "# x1 value");
  std::getline(in, line);
  CHECK(line == "0 0");
  in.close();
  std::remove(path.c_str());
}
