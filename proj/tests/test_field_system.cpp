#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "wkam/field_system.hpp"

using namespace wkam;

TEST_CASE("builtin frame evaluation") {
  SECTION("grushin-chart matches the chart formula") {
    auto sys = make_grushin_chart();
    const auto F = sys.eval({0.25, 0.80});
    CHECK(F(0, 0) == 1.0);
    CHECK(F(0, 1) == 0.0);
    CHECK(F(1, 0) == 0.0);
    CHECK(F(1, 1) == Catch::Approx(0.25));
  }

  SECTION("identity frame") {
    auto sys = make_identity_frame(2);
    const auto F = sys.eval({0.123, 0.456});
    CHECK(F(0, 0) == 1.0);
    CHECK(F(1, 1) == 1.0);
    CHECK(F(0, 1) == 0.0);
  }

  SECTION("grushin-periodic vanishes at x1 = 1/2") {
    auto sys = make_grushin_periodic();
    CHECK(sys.eval({0.5, 0.3})(1, 1) == Catch::Approx(0.0).margin(1e-15));
  }

  SECTION("dimension mismatch") {
    auto sys = make_grushin_periodic();
    CHECK_THROWS(sys.eval({0.5}));
  }

  SECTION("1-periodicity under unit translations") {
    for (const auto* name : {"grushin-chart", "grushin-periodic"}) {
      auto sys = make_frame_by_name(name);
      for (double x1 : {0.1, 0.49, 0.75}) {
        const auto a = sys.eval({x1, 0.2});
        const auto b = sys.eval({x1 + 1.0, 0.2 - 1.0});
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) CHECK(a(i, j) == Catch::Approx(b(i, j)).margin(1e-14));
      }
    }
  }

  SECTION("grushin-chart rank drops exactly on the singular line") {
    auto sys = make_grushin_chart();
    CHECK(sys.eval({0.0, 0.3})(1, 1) == 0.0);   // rank 1
    CHECK(sys.eval({0.25, 0.3})(1, 1) != 0.0);  // rank 2
    CHECK_FALSE(sys.full_rank_everywhere);
  }
}

TEST_CASE("tabulated frame file") {
  // constant-rotation frame on a 4-node 1d... use d=2, n=4: 16 lines, 4 values
  const std::string path = "frame_tab_test.txt";
  {
    std::ofstream out(path);
    out << "# test frame\n";
    for (int i = 0; i < 16; ++i) out << "1 0 0 0.5\n";
  }
  auto sys = load_tabulated_frame(path, 2, 2, 4);
  const auto F = sys.eval({0.3, 0.9});
  CHECK(F(0, 0) == Catch::Approx(1.0));
  CHECK(F(1, 1) == Catch::Approx(0.5));
  std::remove(path.c_str());

  SECTION("short file is rejected") {
    {
      std::ofstream out(path);
      out << "1 0 0 0.5\n";
    }
    CHECK_THROWS(load_tabulated_frame(path, 2, 2, 4));
    std::remove(path.c_str());
  }
}
