#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wkam/sr_distance.hpp"

using namespace wkam;

TEST_CASE("identity frame distance is the torus metric") {
  auto sys = make_identity_frame(2);
  TorusGrid grid(2, 32);
  auto res = sr_distance(sys, grid, {0.0, 0.0}, 1e-9);
  REQUIRE(res.converged);
  CHECK(res.unreachable.empty());

  SECTION("zero at the source") {
    CHECK(res.field.values[grid.flatten({0, 0})] == 0.0);
  }

  SECTION("straight-line value along an axis") {
    // d((0,0),(0.25,0)) = 0.25 up to first-order grid error
    const double v = res.field.values[grid.flatten({8, 0})];
    CHECK(v == Catch::Approx(0.25).margin(3.0 * grid.h));
  }

  SECTION("symmetry under negation of the offset") {
    const double a = res.field.values[grid.flatten({5, 3})];
    const double b = res.field.values[grid.flatten({-5, -3})];
    CHECK(a == Catch::Approx(b).margin(1e-9));
  }

  SECTION("upper-bounded by torus distance plus discretization error") {
    for (std::size_t f = 0; f < grid.size(); f += 7) {
      const double exact = torus_dist(grid.node_point(f), {0.0, 0.0});
      CHECK(res.field.values[f] >= exact - 3.0 * grid.h);
      // |u|_2 <= 1 admits diagonal moves, so W <= Euclidean torus distance + error
      CHECK(res.field.values[f] <= exact + 4.0 * grid.h);
    }
  }
}

TEST_CASE("grushin chart distance") {
  auto sys = make_grushin_chart();
  TorusGrid coarse(2, 16);
  auto res = sr_distance(sys, coarse, {0.25, 0.25}, 1e-9, 20000);
  REQUIRE(res.converged);
  CHECK(res.unreachable.empty()); // horizontally connected despite the rank drop

  SECTION("matches a 4x-resolution run within two coarse spacings") {
    TorusGrid fine(2, 64);
    auto oracle = sr_distance(sys, fine, {0.25, 0.25}, 1e-9, 40000);
    REQUIRE(oracle.converged);
    for (std::size_t f = 0; f < coarse.size(); f += 3) {
      const auto idx = coarse.unflatten(f);
      const std::size_t g = fine.flatten({idx[0] * 4, idx[1] * 4});
      CHECK(res.field.values[f] ==
            Catch::Approx(oracle.field.values[g]).margin(2.0 * coarse.h));
    }
  }

  SECTION("vertical motion is slower near the singular line") {
    // moving in x2 from x1 ~ 0 costs more than from x1 ~ 1/4
    const double near_line = res.field.values[coarse.flatten({0, 8})];
    const double away = res.field.values[coarse.flatten({4, 8})];
    CHECK(near_line > away - 1e-12);
  }

  SECTION("approximate triangle inequality through a second source") {
    auto res2 = sr_distance(sys, coarse, {0.5, 0.5}, 1e-9, 20000);
    REQUIRE(res2.converged);
    const std::size_t mid = coarse.nearest_node({0.5, 0.5});
    for (std::size_t f = 0; f < coarse.size(); f += 11) {
      CHECK(res.field.values[f] <=
            res.field.values[mid] + res2.field.values[f] + 4.0 * coarse.h);
    }
  }
}

TEST_CASE("sr_distance argument validation") {
  auto sys = make_identity_frame(2);
  TorusGrid grid(2, 8);
  CHECK_THROWS(sr_distance(sys, grid, {0.0, 0.0}, 0.0));
}
