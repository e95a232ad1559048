#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wkam/controls.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

struct SrDistanceResult {
  ScalarField field;                    // y -> d_SR(x, y), minimal time
  bool converged = false;
  int sweeps = 0;
  std::vector<std::size_t> unreachable; // nodes still masked at exit
  double control_ball = 1.0;            // Euclidean control ball radius used
};

// Minimal-time value iteration for the control-affine system with
// admissible controls |u|_2 <= 1: synchronous Jacobi sweeps of
//   W(y) <- min_u { dt + W(y - dt F(y) u) },  W(source) = 0.
// The converged W is the sub-Riemannian distance from the source.
// Values start at a large finite ceiling (interpolated feet fall between
// nodes, so an infinite mask would never let the front expand); nodes that
// stay near the ceiling after convergence are reported unreachable.
inline SrDistanceResult sr_distance(const FieldSystem& sys, const TorusGrid& grid, const Point& x,
                                    double tol, int max_sweeps = 10000, int n_u = 13) {
  if (tol <= 0.0) throw std::invalid_argument("sr_distance: tol must be > 0");
  constexpr double kCeiling = 1.0e4;
  ControlGrid ball(sys.m, 1.0, n_u);
  const double maxF = max_frame_norm(sys, grid);
  const double dt = maxF > 0.0 ? 0.8 * grid.h / maxF : grid.h;
  const std::size_t N = grid.size();
  const std::size_t d = static_cast<std::size_t>(grid.d);
  const std::size_t src = grid.nearest_node(x);

  // frozen foot points, as in the Lax-Oleinik sweeps
  std::vector<double> feet(N * ball.size() * d);
  parallel_for(0, N, [&](std::size_t f) {
    const Point y = grid.node_point(f);
    const FrameMatrix F = sys.eval(y);
    Point vel(d);
    for (std::size_t a = 0; a < ball.size(); ++a) {
      F.apply(ball[a], vel);
      for (std::size_t k = 0; k < d; ++k)
        feet[(f * ball.size() + a) * d + k] = y[k] - dt * vel[k];
    }
  });

  ScalarField W(grid, kCeiling);
  W.values[src] = 0.0;
  W.meta.provenance = "sr_distance (|u|_2 <= 1 Euclidean control ball)";
  SrDistanceResult res;
  ScalarField next(grid, kCeiling);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    parallel_for(0, N, [&](std::size_t f) {
      if (f == src) {
        next.values[f] = 0.0;
        return;
      }
      double best = W.values[f];
      for (std::size_t a = 0; a < ball.size(); ++a) {
        const double v = interpolate_at(W, &feet[(f * ball.size() + a) * d]);
        if (dt + v < best) best = dt + v;
      }
      next.values[f] = best;
    });
    const double diff = sup_distance(next, W);
    std::swap(W.values, next.values);
    res.sweeps = sweep + 1;
    if (diff < tol) {
      res.converged = true;
      break;
    }
  }
  for (std::size_t f = 0; f < N; ++f)
    if (W.values[f] >= 0.5 * kCeiling) res.unreachable.push_back(f);
  res.field = std::move(W);
  return res;
}

}  // namespace wkam
