#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkam/controls.hpp"
#include "wkam/differential.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

inline constexpr double kCflBound = 0.25; // max foot-point displacement per step

inline void check_cfl(double dt, double radius, double max_F) {
  if (dt <= 0.0) throw std::invalid_argument("time step must be > 0");
  if (dt * radius * max_F > kCflBound)
    throw std::invalid_argument("CFL violation: dt * R_u * max||F|| = " +
                                std::to_string(dt * radius * max_F) + " > " +
                                std::to_string(kCflBound));
}

// Semi-Lagrangian one-step operator on grid functions. Foot points and
// stage costs are frozen at construction (explicit Euler, F evaluated at
// the node), so repeated sweeps only pay for interpolation.
//
// direction -1: (T_dt phi)(x) = min_u { phi(x - dt F(x) u) + dt L(x, u) }
//              (the Lax-Oleinik backward step; also propagates the
//               arrival-formulated action field)
// direction +1: foot point x + dt F(x) u (value-function recursion for
//               trajectories emanating from x).
class StepOperator {
 public:
  StepOperator(const TorusGrid& grid, double dt, const LagrangianSpec& spec,
               const FieldSystem& sys, const ControlGrid& ctrl, int direction)
      : grid_(grid), dt_(dt), n_controls_(ctrl.size()), controls_(ctrl.points) {
    if (direction != 1 && direction != -1)
      throw std::invalid_argument("StepOperator: direction must be +1 or -1");
    check_cfl(dt, ctrl.radius, max_frame_norm(sys, grid));
    const std::size_t N = grid.size();
    const std::size_t d = static_cast<std::size_t>(grid.d);
    feet_.resize(N * n_controls_ * d);
    stage_cost_.resize(N * n_controls_);
    parallel_for(0, N, [&](std::size_t f) {
      const Point x = grid.node_point(f);
      const FrameMatrix F = sys.eval(x);
      Point vel(d);
      for (std::size_t a = 0; a < n_controls_; ++a) {
        F.apply(controls_[a], vel);
        for (std::size_t k = 0; k < d; ++k)
          feet_[(f * n_controls_ + a) * d + k] = x[k] + direction * dt * vel[k];
        stage_cost_[f * n_controls_ + a] = dt * eval_L(spec, x, controls_[a]);
      }
    });
  }

  double dt() const { return dt_; }
  const TorusGrid& grid() const { return grid_; }
  std::size_t n_controls() const { return n_controls_; }
  const Control& control(std::size_t a) const { return controls_[a]; }

  // One synchronous Jacobi sweep. Ties in the argmin break toward the
  // lowest control index. argmin_out, when given, receives the winning
  // control index per node.
  ScalarField apply(const ScalarField& phi, std::vector<std::uint32_t>* argmin_out = nullptr) const {
    const std::size_t N = grid_.size();
    const std::size_t d = static_cast<std::size_t>(grid_.d);
    ScalarField out(grid_);
    out.meta = phi.meta;
    out.meta.time_horizon += dt_;
    if (argmin_out) argmin_out->assign(N, 0);
    parallel_for(0, N, [&](std::size_t f) {
      double best = kMask;
      std::uint32_t best_a = 0;
      for (std::size_t a = 0; a < n_controls_; ++a) {
        const double v = interpolate_at(phi, &feet_[(f * n_controls_ + a) * d]);
        if (v == kMask) continue;
        const double total = v + stage_cost_[f * n_controls_ + a];
        if (total < best) {
          best = total;
          best_a = static_cast<std::uint32_t>(a);
        }
      }
      out.values[f] = best;
      if (argmin_out) (*argmin_out)[f] = best_a;
    });
    return out;
  }

 private:
  TorusGrid grid_;
  double dt_;
  std::size_t n_controls_;
  std::vector<Control> controls_;
  std::vector<double> feet_;       // node-major, then control, then coord
  std::vector<double> stage_cost_; // node-major, then control
};

inline ScalarField backward_step(const ScalarField& phi, double dt, const LagrangianSpec& spec,
                                 const FieldSystem& sys, const ControlGrid& ctrl) {
  StepOperator op(phi.grid, dt, spec, sys, ctrl, -1);
  return op.apply(phi);
}

// Value function V^T via V^0 = 0 and the forward recursion. When history
// is requested the returned vector holds V^{k dt} for k = 0..K (used to
// replay optimal trajectories).
inline ScalarField forward_value(const TorusGrid& grid, double T, double dt,
                                 const LagrangianSpec& spec, const FieldSystem& sys,
                                 const ControlGrid& ctrl,
                                 std::vector<ScalarField>* history = nullptr) {
  const double steps_real = T / dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - steps) > 1e-9)
    throw std::invalid_argument("forward_value: T must be an integer multiple of dt");
  StepOperator op(grid, dt, spec, sys, ctrl, +1);
  ScalarField v(grid, 0.0);
  v.meta.provenance = "forward_value";
  if (history) {
    history->clear();
    history->push_back(v);
  }
  for (long k = 0; k < steps; ++k) {
    v = op.apply(v);
    if (history) history->push_back(v);
  }
  return v;
}

// Short-time surrogate for the Dirac initial condition of the fundamental
// solution: A_0(y) = d(x,y)^2 / (2 eps), exactly 0 at the source node.
// (A literal {0, +inf} delta cannot propagate: interpolated foot points
// always touch a masked corner, so the mask would never clear. The
// quadratic matches the short-time action of the quadratic-in-u running
// cost and shifts the effective horizon by O(eps).)
inline ScalarField delta_action_init(std::size_t src_node, const TorusGrid& grid, double eps) {
  ScalarField a(grid);
  const Point x = grid.node_point(src_node);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const double dist = torus_dist(grid.node_point(f), x);
    a.values[f] = dist * dist / (2.0 * eps);
  }
  a.values[src_node] = 0.0;
  return a;
}

// Fundamental solution y -> A_t(x_src, y) for each requested horizon.
// Initialized by the one-step quadratic surrogate of the delta; a source
// off the grid is snapped to the nearest node (reported via
// meta.provenance).
inline std::vector<ScalarField> action_field(const Point& x_src, const std::vector<double>& t_list,
                                             const TorusGrid& grid, double dt,
                                             const LagrangianSpec& spec, const FieldSystem& sys,
                                             const ControlGrid& ctrl) {
  for (double t : t_list) {
    const double k = t / dt;
    if (std::abs(k - std::lround(k)) > 1e-9)
      throw std::invalid_argument("action_field: every t must be a multiple of dt");
  }
  StepOperator op(grid, dt, spec, sys, ctrl, -1);
  const std::size_t src = grid.nearest_node(x_src);
  const Point snapped = grid.node_point(src);
  const bool off_grid = torus_dist(snapped, x_src) > 1e-12;
  ScalarField a = delta_action_init(src, grid, dt);
  a.meta.provenance = off_grid ? "action_field (source snapped to nearest node)" : "action_field";
  std::vector<ScalarField> out;
  long step = 0;
  for (double t : t_list) {
    const long target = std::lround(t / dt);
    for (; step < target; ++step) a = op.apply(a);
    out.push_back(a);
    out.back().meta.time_horizon = t;
  }
  return out;
}

// Min-plus matrix square: A_{2t}(x,z) = min_y { A_t(x,y) + A_t(y,z) } on a
// shared node set. Row-major K x K.
inline std::vector<double> minplus_double(const std::vector<double>& A, std::size_t K) {
  if (A.size() != K * K) throw std::invalid_argument("minplus_double: matrix must be K x K");
  std::vector<double> out(K * K, kMask);
  parallel_for(0, K, [&](std::size_t i) {
    for (std::size_t y = 0; y < K; ++y) {
      const double aiy = A[i * K + y];
      if (aiy == kMask) continue;
      const double* row = &A[y * K];
      double* orow = &out[i * K];
      for (std::size_t z = 0; z < K; ++z) {
        const double v = aiy + row[z];
        if (v < orow[z]) orow[z] = v;
      }
    }
  });
  return out;
}

struct ErgodicResult {
  double c_est = 0.0;
  ScalarField chi;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;            // final sup-norm update
  double oscillation = 0.0;         // amplitude over the tail when not converged
  std::vector<double> c_trace;      // c_est per iteration (convergence trace)
};

// Relative value iteration for the critical constant: normalize at the
// origin node and read the constant off the normalization shift.
inline ErgodicResult ergodic_iteration(const TorusGrid& grid, double dt, double tol, int max_iters,
                                       const LagrangianSpec& spec, const FieldSystem& sys,
                                       const ControlGrid& ctrl) {
  if (tol <= 0.0) throw std::invalid_argument("ergodic_iteration: tol must be > 0");
  StepOperator op(grid, dt, spec, sys, ctrl, -1);
  std::vector<int> origin(static_cast<std::size_t>(grid.d), 0);
  const std::size_t ref = grid.flatten(origin);
  ScalarField chi(grid, 0.0);
  ErgodicResult res;
  double osc_min = kMask, osc_max = -kMask;
  for (int it = 0; it < max_iters; ++it) {
    ScalarField next = op.apply(chi);
    const double shift = next.values[ref];
    for (double& v : next.values) v -= shift;
    const double diff = sup_distance(next, chi);
    chi = std::move(next);
    res.c_est = shift / dt;
    res.c_trace.push_back(res.c_est);
    res.iterations = it + 1;
    res.residual = diff;
    if (it >= max_iters - 50) { // track tail oscillation for diagnostics
      osc_min = std::min(osc_min, res.c_est);
      osc_max = std::max(osc_max, res.c_est);
    }
    if (diff < tol * dt) {
      res.converged = true;
      break;
    }
  }
  res.oscillation = res.converged ? 0.0 : osc_max - osc_min;
  chi.meta.provenance = "ergodic_iteration";
  res.chi = std::move(chi);
  return res;
}

struct TrajectorySample {
  std::vector<double> times;
  std::vector<Point> states;
  std::vector<Control> controls;
  double running_cost = 0.0;
  double step_defect = 0.0;      // max one-step consistency defect
  double calibration_defect = 0.0;
};

// Extract the calibrated curve ending at x0 by integrating the optimal
// feedback u = D_p L*(x, D_F chi(x)) backward in time with explicit Euler
// (the backward branch is the stable one: it relaxes onto the Aubry set,
// whereas forward characteristics leave it). states[k] is the curve at
// time -times[k]; the calibration defect is
// |chi(x0) - chi(gamma(-T)) - int L + c T|.
inline TrajectorySample calibrated_curve(const ScalarField& chi, double c_est, const Point& x0,
                                         double horizon, double dt, const LagrangianSpec& spec,
                                         const FieldSystem& sys) {
  TrajectorySample traj;
  const double delta = chi.grid.h;
  Point x = x0;
  for (double& xk : x) xk = wrap01(xk);
  double t = 0.0;
  const long steps = std::lround(horizon / dt);
  Point vel(x.size());
  for (long k = 0; k <= steps; ++k) {
    const auto hg = horizontal_gradient(chi, sys, x, delta);
    const Control u = legendre_gradient(spec, x, hg.central);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    if (k == steps) break;
    traj.running_cost += dt * eval_L(spec, x, u);
    const FrameMatrix F = sys.eval(x);
    F.apply(u, vel);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = wrap01(x[i] - dt * vel[i]);
    t += dt;
  }
  traj.calibration_defect = std::abs(interpolate(chi, traj.states.front()) -
                                     interpolate(chi, traj.states.back()) - traj.running_cost +
                                     c_est * (traj.times.back() - traj.times.front()));
  return traj;
}

}  // namespace wkam
