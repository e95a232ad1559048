#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "wkam/aubry.hpp"
#include "wkam/critical.hpp"

using namespace wkam;

namespace {

struct Setup {
  TorusGrid grid{2, 16};
  FieldSystem sys = make_identity_frame(2);
  LagrangianSpec spec;
  ControlGrid ctrl{2, 2.0, 13};
  double dt = 0.05;

  explicit Setup(const std::string& g_name)
      : spec(make_mane_lagrangian(2, make_zero_V(2), make_builtin_G(g_name), TorusGrid(2, 32))) {}
};

}  // namespace

TEST_CASE("barrier node set") {
  SECTION("small grids keep every node") {
    TorusGrid g(2, 16);
    CHECK(barrier_node_set(g).size() == 256);
  }
  SECTION("large grids subsample to a sublattice") {
    TorusGrid g(2, 64); // 4096 nodes
    auto nodes = barrier_node_set(g, 1024);
    CHECK(nodes.size() <= 1024);
    CHECK(nodes.size() >= 256);
  }
}

TEST_CASE("peierls barrier structure") {
  Setup s("sin2");
  auto erg = ergodic_iteration(s.grid, s.dt, 1e-8, 40000, s.spec, s.sys, s.ctrl);
  REQUIRE(erg.converged);
  auto nodes = barrier_node_set(s.grid);
  auto h = peierls_barrier(erg.c_est, nodes, 2.0, 16.0, s.grid, s.dt, s.spec, s.sys, s.ctrl);
  const std::size_t K = nodes.size();

  SECTION("diagonal bounded below by the numerical slack") {
    for (std::size_t i = 0; i < K; ++i) CHECK(h.at(i, i) >= -h.eps_num);
  }

  SECTION("triangle inequality up to discretization error") {
    for (std::size_t i = 0; i < K; i += 37) {
      for (std::size_t j = 0; j < K; j += 41) {
        for (std::size_t k = 0; k < K; k += 43) {
          CHECK(h.at(i, k) <= h.at(i, j) + h.at(j, k) + 2.0 * h.eps_num + 0.05);
        }
      }
    }
  }

  SECTION("diagonal separates the well bottom from the rest") {
    const std::size_t at_min = s.grid.flatten({0, 0});
    const std::size_t far = s.grid.flatten({8, 8});
    std::size_t i_min = 0, i_far = 0;
    for (std::size_t i = 0; i < K; ++i) {
      if (nodes[i] == at_min) i_min = i;
      if (nodes[i] == far) i_far = i;
    }
    CHECK(std::abs(h.at(i_min, i_min)) <= 3.0 * h.eps_num);
    CHECK(h.at(i_far, i_far) > 0.5); // resting there pays G ~ 2 per unit time
  }

  SECTION("fixed point property of barrier rows, and failure at a wrong c") {
    std::size_t i_min = 0;
    for (std::size_t i = 0; i < K; ++i)
      if (nodes[i] == s.grid.flatten({0, 0})) i_min = i;
    auto row = h.row_field(i_min);
    const double good =
        barrier_fixed_point_check(row, erg.c_est, 1.0, s.dt, s.spec, s.sys, s.ctrl);
    const double bad =
        barrier_fixed_point_check(row, erg.c_est + 0.2, 1.0, s.dt, s.spec, s.sys, s.ctrl);
    CHECK(good < 0.05);
    CHECK(bad >= 0.1);
  }
}

TEST_CASE("aubry set extraction") {
  SECTION("free Lagrangian: every node rests for free") {
    Setup s("zero");
    auto nodes = barrier_node_set(s.grid);
    auto h = peierls_barrier(0.0, nodes, 2.0, 16.0, s.grid, s.dt, s.spec, s.sys, s.ctrl);
    auto a = aubry_set(h);
    CHECK(a.nodes.size() == nodes.size());
    CHECK_FALSE(a.eps_auto_raised);
  }

  SECTION("well potential: concentrated at the bottom") {
    Setup s("sin2");
    auto erg = ergodic_iteration(s.grid, s.dt, 1e-8, 40000, s.spec, s.sys, s.ctrl);
    REQUIRE(erg.converged);
    auto nodes = barrier_node_set(s.grid);
    auto h = peierls_barrier(erg.c_est, nodes, 2.0, 16.0, s.grid, s.dt, s.spec, s.sys, s.ctrl);
    auto a = aubry_set(h);
    REQUIRE_FALSE(a.nodes.empty());
    for (std::size_t node : a.nodes)
      CHECK(torus_dist(s.grid.node_point(node), {0.0, 0.0}) <= 0.15);
  }

  SECTION("two-bump: secondary minimum is excluded") {
    Setup s("two-bump");
    auto erg = ergodic_iteration(s.grid, s.dt, 1e-8, 40000, s.spec, s.sys, s.ctrl);
    REQUIRE(erg.converged);
    auto nodes = barrier_node_set(s.grid);
    auto h = peierls_barrier(erg.c_est, nodes, 2.0, 16.0, s.grid, s.dt, s.spec, s.sys, s.ctrl);
    std::size_t i_second = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == s.grid.flatten({8, 0})) i_second = i;
    CHECK(h.at(i_second, i_second) > 0.05); // the 0.3-deep well is not critical
    auto a = aubry_set(h);
    for (std::size_t node : a.nodes)
      CHECK(torus_dist(s.grid.node_point(node), {0.0, 0.0}) <= 0.15);
  }

  SECTION("potential shift leaves the barrier invariant") {
    Setup base("sin2");
    const double pi = std::numbers::pi;
    auto shifted_spec = make_mane_lagrangian(
        2, make_zero_V(2),
        [pi](const Point& x) {
          double g = 0.9;
          for (double xk : x) g += std::sin(pi * xk) * std::sin(pi * xk);
          return g;
        },
        TorusGrid(2, 32));
    auto nodes = barrier_node_set(base.grid);
    auto h0 = peierls_barrier(0.0, nodes, 2.0, 8.0, base.grid, base.dt, base.spec, base.sys,
                              base.ctrl);
    auto h1 = peierls_barrier(0.9, nodes, 2.0, 8.0, base.grid, base.dt, shifted_spec, base.sys,
                              base.ctrl);
    for (std::size_t p = 0; p < nodes.size() * nodes.size(); p += 97)
      CHECK(h1.values[p] == Catch::Approx(h0.values[p]).margin(1e-8));
  }

  SECTION("auto-raised threshold when the diagonal never vanishes") {
    BarrierMatrix h;
    h.grid = TorusGrid(2, 4);
    h.nodes = {0, 1, 2};
    h.values = {0.5, 9, 9, 9, 0.4, 9, 9, 9, 0.6};
    h.eps_num = 1e-6;
    auto a = aubry_set(h);
    CHECK(a.eps_auto_raised);
    REQUIRE(a.nodes.size() == 1);
    CHECK(a.nodes[0] == 1); // smallest diagonal entry wins
  }

  SECTION("invalid horizons are rejected") {
    Setup s("zero");
    CHECK_THROWS(peierls_barrier(0.0, {0}, -1.0, 4.0, s.grid, s.dt, s.spec, s.sys, s.ctrl));
    CHECK_THROWS(peierls_barrier(0.0, {0}, 4.0, 2.0, s.grid, s.dt, s.spec, s.sys, s.ctrl));
  }
}

TEST_CASE("horizontal gradient") {
  TorusGrid grid(2, 64);
  ScalarField f(grid);
  const double twopi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < grid.size(); ++i)
    f.values[i] = std::cos(twopi * grid.node_point(i)[0]);

  SECTION("identity frame recovers the coordinate derivative") {
    auto sys = make_identity_frame(2);
    const Point x = {0.3, 0.5};
    auto hg = horizontal_gradient(f, sys, x, grid.h);
    CHECK(hg.central[0] == Catch::Approx(-twopi * std::sin(twopi * 0.3)).margin(0.05));
    CHECK(hg.central[1] == Catch::Approx(0.0).margin(1e-9));
    CHECK(hg.max_one_sided_gap < 0.5);
  }

  SECTION("grushin chart scales the second direction by x1") {
    auto sys = make_grushin_chart();
    ScalarField g(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      g.values[i] = std::cos(twopi * grid.node_point(i)[1]);
    const Point x = {0.25, 0.3};
    auto hg = horizontal_gradient(g, sys, x, grid.h);
    CHECK(hg.central[1] == Catch::Approx(-0.25 * twopi * std::sin(twopi * 0.3)).margin(0.05));
  }
}

TEST_CASE("domination sampling") {
  Setup s("sin2");
  auto erg = ergodic_iteration(s.grid, s.dt, 1e-8, 40000, s.spec, s.sys, s.ctrl);
  REQUIRE(erg.converged);

  SECTION("converged corrector is dominated along random arcs") {
    auto rep = check_domination(erg.chi, erg.c_est, 200, 17, s.dt, s.spec, s.sys, s.ctrl);
    CHECK(rep.samples == 200);
    CHECK(rep.max_defect <= 0.05);
  }

  SECTION("an inflated constant breaks domination") {
    // random arcs are far from optimal, so the inflation must exceed the
    // worst per-unit-time running cost (max L = 2 + max G = 4 here) to be
    // certain to surface
    auto rep = check_domination(erg.chi, erg.c_est + 5.0, 200, 17, s.dt, s.spec, s.sys, s.ctrl);
    CHECK(rep.max_defect > 1.0);
  }

  SECTION("deterministic in the seed") {
    auto a = check_domination(erg.chi, erg.c_est, 50, 23, s.dt, s.spec, s.sys, s.ctrl);
    auto b = check_domination(erg.chi, erg.c_est, 50, 23, s.dt, s.spec, s.sys, s.ctrl);
    CHECK(a.max_defect == b.max_defect);
  }
}

TEST_CASE("sub-riemannian lipschitz estimate") {
  Setup s("sin2");
  auto erg = ergodic_iteration(s.grid, s.dt, 1e-8, 40000, s.spec, s.sys, s.ctrl);
  REQUIRE(erg.converged);
  std::vector<std::pair<std::size_t, ScalarField>> fields;
  for (auto idx : {std::vector<int>{0, 0}, std::vector<int>{8, 8}}) {
    const std::size_t node = s.grid.flatten(idx);
    auto d = sr_distance(s.sys, s.grid, s.grid.node_point(node), 1e-9);
    REQUIRE(d.converged);
    fields.emplace_back(node, std::move(d.field));
  }
  const double lip = lipschitz_check(erg.chi, fields);
  CHECK(lip > 0.0);
  CHECK(lip < 5.0); // bounded by max |D_F chi| ~ sqrt(2 max G)
}
