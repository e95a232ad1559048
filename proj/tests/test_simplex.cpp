#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "wkam/simplex.hpp"

using namespace wkam;
using Status = DenseSimplex::Status;

TEST_CASE("simplex hand cases") {
  SECTION("single equality, pick the cheaper variable") {
    // min 2a + b  s.t. a + b = 1  ->  b = 1, objective 1
    DenseSimplex lp({1.0, 1.0}, {1.0}, {2.0, 1.0});
    auto r = lp.solve();
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == Catch::Approx(1.0));
    CHECK(r.x[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(r.x[1] == Catch::Approx(1.0));
    CHECK(r.max_primal_residual < 1e-10);
  }

  SECTION("2x4 transportation-style case") {
    // min x1 + 2 x2 + 3 x3 + x4
    // s.t. x1 + x2 = 1, x3 + x4 = 1  ->  x1 = 1, x4 = 1, objective 2
    DenseSimplex lp({1, 1, 0, 0, 0, 0, 1, 1}, {1.0, 1.0}, {1.0, 2.0, 3.0, 1.0});
    auto r = lp.solve();
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == Catch::Approx(2.0));
    CHECK(r.x[0] == Catch::Approx(1.0));
    CHECK(r.x[3] == Catch::Approx(1.0));
  }

  SECTION("negative right-hand side is normalized") {
    // -a - b = -1 is a + b = 1
    DenseSimplex lp({-1.0, -1.0}, {-1.0}, {3.0, 1.0});
    auto r = lp.solve();
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == Catch::Approx(1.0));
  }

  SECTION("infeasible system") {
    // a = 1 and a = 2 with a single variable
    DenseSimplex lp({1.0, 1.0}, {1.0, 2.0}, {1.0});
    auto r = lp.solve();
    CHECK(r.status == Status::Infeasible);
  }

  SECTION("unbounded objective") {
    // min -a - b s.t. a - b = 0: ray a = b -> infinity
    DenseSimplex lp({1.0, -1.0}, {0.0}, {-1.0, -1.0});
    auto r = lp.solve();
    CHECK(r.status == Status::Unbounded);
  }

  SECTION("redundant row leaves a zero-level artificial") {
    // duplicate constraint rows; still solvable
    DenseSimplex lp({1, 1, 1, 1}, {1.0, 1.0}, {5.0, 2.0});
    auto r = lp.solve();
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == Catch::Approx(2.0));
  }

  SECTION("shape validation") {
    CHECK_THROWS(DenseSimplex({1.0, 2.0, 3.0}, {1.0}, {1.0, 1.0}));
  }
}

TEST_CASE("simplex duality and complementarity") {
  // random feasible problems: build A, pick a nonnegative w0 for b = A w0
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> entry(-1.0, 1.0), weight(0.0, 1.0), cost(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 4, n = 9;
    std::vector<double> A(m * n), c(n), w0(n);
    for (double& v : A) v = entry(rng);
    for (double& v : c) v = cost(rng);
    for (double& v : w0) v = weight(rng);
    std::vector<double> b(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) b[i] += A[i * n + j] * w0[j];
    DenseSimplex lp(A, b, c);
    auto r = lp.solve();
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.max_primal_residual < 1e-8);

    // dual feasibility: reduced costs c_j - y^T a_j >= 0
    double min_rc = 0.0, comp = 0.0, dual_obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double rc = c[j];
      for (std::size_t i = 0; i < m; ++i) rc -= r.duals[i] * A[i * n + j];
      min_rc = std::min(min_rc, rc);
      comp = std::max(comp, std::abs(r.x[j] * rc));
    }
    for (std::size_t i = 0; i < m; ++i) dual_obj += r.duals[i] * b[i];
    CHECK(min_rc > -1e-7);
    CHECK(comp < 1e-7);                                  // complementary slackness
    CHECK(dual_obj == Catch::Approx(r.objective).margin(1e-7)); // strong duality
  }
}

TEST_CASE("simplex degenerate problem terminates") {
  // heavily degenerate: many variables mapping to the same column pattern
  const std::size_t m = 3, n = 12;
  std::vector<double> A(m * n, 0.0), c(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    A[(j % m) * n + j] = 1.0;
    c[j] = 1.0 + 0.001 * static_cast<double>(j);
  }
  std::vector<double> b = {1.0, 0.0, 0.0}; // two rows at zero level
  DenseSimplex lp(A, b, c);
  auto r = lp.solve();
  REQUIRE(r.status == Status::Optimal);
  CHECK(r.objective == Catch::Approx(1.0).margin(1e-9));
}
