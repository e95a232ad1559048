#pragma once

#include <cmath>
#include <vector>

#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"

namespace wkam {

// Central differences of the interpolant along the frame columns,
// q_i = [chi(x + delta F(x) e_i) - chi(x - delta F(x) e_i)] / (2 delta),
// together with the forward/backward one-sided pair so that
// nondifferentiability shows up as one-sided disagreement.
struct HorizontalGradient {
  std::vector<double> central;   // m components
  std::vector<double> forward;   // one-sided, +delta
  std::vector<double> backward;  // one-sided, -delta
  double max_one_sided_gap = 0.0;
};

inline HorizontalGradient horizontal_gradient(const ScalarField& chi, const FieldSystem& sys,
                                              const Point& x, double delta) {
  const FrameMatrix F = sys.eval(x);
  const int m = sys.m;
  HorizontalGradient out;
  out.central.resize(static_cast<std::size_t>(m));
  out.forward.resize(static_cast<std::size_t>(m));
  out.backward.resize(static_cast<std::size_t>(m));
  const double phi0 = interpolate(chi, x);
  Point xp(x.size()), xm(x.size());
  for (int i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double col = F(static_cast<int>(k), i);
      xp[k] = x[k] + delta * col;
      xm[k] = x[k] - delta * col;
    }
    const double fp = interpolate(chi, xp);
    const double fm = interpolate(chi, xm);
    out.central[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * delta);
    out.forward[static_cast<std::size_t>(i)] = (fp - phi0) / delta;
    out.backward[static_cast<std::size_t>(i)] = (phi0 - fm) / delta;
    out.max_one_sided_gap =
        std::max(out.max_one_sided_gap,
                 std::abs(out.forward[static_cast<std::size_t>(i)] -
                          out.backward[static_cast<std::size_t>(i)]));
  }
  return out;
}

}  // namespace wkam
