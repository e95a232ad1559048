#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkam/controls.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/lax_oleinik.hpp"
#include "wkam/measures.hpp"

namespace wkam {

struct SandwichViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CriticalCertificate {
  double c_longtime = 0.0;
  double c_ergodic = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double gap = 0.0;
  double slack = 0.0;
  int n = 0;
  int n_u = 0;
  double dt = 0.0;
  int K_modes = 0;
};

// Long-time average V^{T}(0)/T.
inline double c_longtime(const TorusGrid& grid, double T_max, double dt,
                         const LagrangianSpec& spec, const FieldSystem& sys,
                         const ControlGrid& ctrl) {
  const ScalarField v = forward_value(grid, T_max, dt, spec, sys, ctrl);
  std::vector<int> origin(static_cast<std::size_t>(grid.d), 0);
  return v.values[grid.flatten(origin)] / T_max;
}

struct SubsolutionResult {
  double c_lb = 0.0;                 // -max_x H(x, D psi), unsmoothed
  std::vector<double> coeffs;        // a_k then b_k per mode
  std::vector<double> stage_bounds;  // best bound per K stage 0..K_modes
  double grid_sampling_note = 0.0;   // spacing of the max-sampling grid
};

namespace detail {

// D psi(x) for the Fourier ansatz with coefficients (a_k, b_k).
inline void fourier_gradient(const std::vector<FourierMode>& modes, const std::vector<double>& cf,
                             const Point& x, std::vector<double>& grad) {
  const double twopi = 2.0 * std::numbers::pi;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    double phase = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) phase += modes[mi].k[i] * x[i];
    phase *= twopi;
    const double a = cf[2 * mi], b = cf[2 * mi + 1];
    const double amp = twopi * (-a * std::sin(phase) + b * std::cos(phase));
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] += amp * modes[mi].k[i];
  }
}

}  // namespace detail

// Lower bound on the critical constant from a truncated Fourier
// subsolution ansatz: minimize the softmax-smoothed max over grid nodes of
// H(x, D psi(x)) by normalized subgradient descent (step 1/sqrt(k),
// geometric temperature decay across restarts), then report the unsmoothed
// bound -max_x H. Stages are warm-started so the bound is nondecreasing in
// the mode cutoff. Any returned value is a valid lower bound for the
// grid-sampled max.
inline SubsolutionResult c_lower_subsolution(const TorusGrid& grid, int K_modes, int iters,
                                             const LagrangianSpec& spec, const FieldSystem& sys,
                                             double step0 = 0.05, std::uint64_t seed = 0,
                                             int restarts = 3) {
  if (K_modes < 0) throw std::invalid_argument("c_lower_subsolution: K_modes must be >= 0");
  SubsolutionResult out;
  out.grid_sampling_note = grid.h;

  const std::size_t N = grid.size();
  std::vector<Point> nodes(N);
  for (std::size_t f = 0; f < N; ++f) nodes[f] = grid.node_point(f);
  std::vector<double> grad_psi(static_cast<std::size_t>(grid.d));
  std::vector<double> dHdp(static_cast<std::size_t>(grid.d));

  const auto unsmoothed_max = [&](const std::vector<FourierMode>& modes,
                                  const std::vector<double>& cf) {
    double worst = -kMask;
    for (std::size_t f = 0; f < N; ++f) {
      detail::fourier_gradient(modes, cf, nodes[f], grad_psi);
      worst = std::max(worst, hamiltonian(spec, sys, nodes[f], grad_psi));
    }
    return worst;
  };

  std::vector<double> best_cf; // for the previous stage's modes
  std::vector<FourierMode> prev_modes;
  for (int stage = 0; stage <= K_modes; ++stage) {
    const auto modes = fourier_modes(grid.d, stage);
    std::vector<double> cf(2 * modes.size(), 0.0);
    // warm start: carry the previous stage's coefficients over by matching
    // mode vectors (the enumeration order differs between cutoffs)
    for (std::size_t pi = 0; pi < prev_modes.size(); ++pi) {
      for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        if (modes[mi].k == prev_modes[pi].k) {
          cf[2 * mi] = best_cf[2 * pi];
          cf[2 * mi + 1] = best_cf[2 * pi + 1];
          break;
        }
      }
    }
    double best_obj = unsmoothed_max(modes, cf);
    std::vector<double> stage_best_cf = cf;

    if (!modes.empty() && iters > 0) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(stage));
      double temperature = 0.05;
      for (int r = 0; r < restarts; ++r, temperature *= 0.3) {
        std::vector<double> w = stage_best_cf;
        if (r > 0) { // Polyak-style restart around the incumbent
          std::normal_distribution<double> jitter(0.0, 0.02);
          for (double& wi : w) wi += jitter(rng);
        }
        std::vector<double> g(w.size());
        for (int it = 1; it <= iters; ++it) {
          // softmax weights over nodes at the current temperature
          double hmax = -kMask;
          std::vector<double> hvals(N);
          for (std::size_t f = 0; f < N; ++f) {
            detail::fourier_gradient(modes, w, nodes[f], grad_psi);
            hvals[f] = hamiltonian(spec, sys, nodes[f], grad_psi);
            hmax = std::max(hmax, hvals[f]);
          }
          double zsum = 0.0;
          for (std::size_t f = 0; f < N; ++f) {
            hvals[f] = std::exp((hvals[f] - hmax) / temperature);
            zsum += hvals[f];
          }
          std::fill(g.begin(), g.end(), 0.0);
          const double twopi = 2.0 * std::numbers::pi;
          for (std::size_t f = 0; f < N; ++f) {
            const double sw = hvals[f] / zsum;
            if (sw < 1e-14) continue;
            detail::fourier_gradient(modes, w, nodes[f], grad_psi);
            // dH/dp by central differences (exact enough for the chain rule)
            const double eps = 1e-6;
            for (int i = 0; i < grid.d; ++i) {
              std::vector<double> pp = grad_psi, pm = grad_psi;
              pp[static_cast<std::size_t>(i)] += eps;
              pm[static_cast<std::size_t>(i)] -= eps;
              dHdp[static_cast<std::size_t>(i)] =
                  (hamiltonian(spec, sys, nodes[f], pp) - hamiltonian(spec, sys, nodes[f], pm)) /
                  (2.0 * eps);
            }
            for (std::size_t mi = 0; mi < modes.size(); ++mi) {
              double phase = 0.0;
              for (std::size_t i = 0; i < nodes[f].size(); ++i)
                phase += modes[mi].k[i] * nodes[f][i];
              phase *= twopi;
              double ka = 0.0, kb = 0.0;
              for (std::size_t i = 0; i < nodes[f].size(); ++i) {
                ka += dHdp[i] * (-twopi * std::sin(phase) * modes[mi].k[i]);
                kb += dHdp[i] * (twopi * std::cos(phase) * modes[mi].k[i]);
              }
              g[2 * mi] += sw * ka;
              g[2 * mi + 1] += sw * kb;
            }
          }
          double gn = 0.0;
          for (double gi : g) gn += gi * gi;
          gn = std::sqrt(gn);
          if (gn < 1e-14) break;
          const double step = step0 / std::sqrt(static_cast<double>(it));
          for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i] / gn;
          double wn = 0.0;
          for (double wi : w) wn += wi * wi;
          if (std::sqrt(wn) > 1e3)
            throw std::runtime_error("c_lower_subsolution: coefficients diverged, step rule rejected");
          const double obj = unsmoothed_max(modes, w);
          if (obj < best_obj) {
            best_obj = obj;
            stage_best_cf = w;
          }
        }
      }
    }
    best_cf = stage_best_cf;
    prev_modes = modes;
    out.stage_bounds.push_back(-best_obj);
  }
  out.coeffs = best_cf;
  out.c_lb = out.stage_bounds.back();
  return out;
}

// Upper bound from a feasible closed measure (the LP optimum).
inline double c_upper_measure(const MatherLpResult& lp, double lp_tol) {
  if (lp.constraint_residual > lp_tol)
    throw std::invalid_argument("c_upper_measure: LP constraint residual above tolerance");
  return lp.value;
}

struct ManePotentialResult {
  ScalarField field; // y -> min_t [A_t(x,y) - c t]
  bool stabilized = false;
  double last_octave_change = 0.0;
};

// phi_x(y) = inf_{t >= 0} [A_t(x,y) - c t], approximated by a min over the
// dyadic time grid dt * 2^j up to T_max; stabilization of the running min
// over the last octave is reported.
inline ManePotentialResult mane_potential(const Point& x, double c, const TorusGrid& grid,
                                          double dt, double T_max, const LagrangianSpec& spec,
                                          const FieldSystem& sys, const ControlGrid& ctrl,
                                          double stab_tol = 1e-3) {
  std::vector<double> t_list;
  for (double t = dt; t <= T_max * (1.0 + 1e-12); t *= 2.0) t_list.push_back(t);
  const auto fields = action_field(x, t_list, grid, dt, spec, sys, ctrl);
  ManePotentialResult out;
  out.field = ScalarField(grid, kMask);
  out.field.meta.provenance = "mane_potential";
  ScalarField before_last = out.field;
  for (std::size_t ti = 0; ti < fields.size(); ++ti) {
    if (ti + 1 == fields.size()) before_last = out.field;
    for (std::size_t f = 0; f < grid.size(); ++f) {
      const double a = fields[ti].values[f];
      if (a == kMask) continue;
      const double v = a - c * t_list[ti];
      if (v < out.field.values[f]) out.field.values[f] = v;
    }
  }
  out.last_octave_change = sup_distance(out.field, before_last);
  out.stabilized = out.last_octave_change < stab_tol;
  return out;
}

struct CertificateInputs {
  TorusGrid grid;
  ControlGrid ctrl;
  double dt = 0.02;
  double T_max = 20.0;
  double tol = 1e-6;
  int max_iters = 100000;
  int K_modes = 3;
  int subsolution_iters = 120;
  std::uint64_t seed = 0;
  TorusGrid lp_state_grid;
  ControlGrid lp_ctrl;
  int lp_K_modes = 3;
  double lp_tol = 1e-6;
  double slack = 0.05;
};

struct CertificateBundle {
  CriticalCertificate cert;
  ErgodicResult ergodic;
  SubsolutionResult subsolution;
  MatherLpResult lp;
};

// Runs all four estimators on the same discretization and assembles the
// sandwich certificate. Fails loudly if the sandwich is violated beyond
// the configured slack (discretization too coarse).
inline CertificateBundle build_certificate(const LagrangianSpec& spec, const FieldSystem& sys,
                                           const CertificateInputs& in) {
  CertificateBundle out;
  out.ergodic = ergodic_iteration(in.grid, in.dt, in.tol, in.max_iters, spec, sys, in.ctrl);
  out.subsolution =
      c_lower_subsolution(in.grid, in.K_modes, in.subsolution_iters, spec, sys, 0.05, in.seed);
  out.lp = solve_mather_lp(in.lp_state_grid, in.lp_ctrl, in.lp_K_modes, in.lp_tol, spec, sys);

  CriticalCertificate& c = out.cert;
  c.c_longtime = c_longtime(in.grid, in.T_max, in.dt, spec, sys, in.ctrl);
  c.c_ergodic = out.ergodic.c_est;
  c.c_lower = out.subsolution.c_lb;
  c.c_upper = c_upper_measure(out.lp, in.lp_tol * 10.0 + 1e-9);
  c.gap = c.c_upper - c.c_lower;
  c.slack = in.slack;
  c.n = in.grid.n;
  c.n_u = in.ctrl.n_u;
  c.dt = in.dt;
  c.K_modes = in.K_modes;

  if (c.c_lower - in.slack > c.c_ergodic || c.c_ergodic > c.c_upper + in.slack ||
      c.gap < -in.slack)
    throw SandwichViolation("critical sandwich violated: lower " + std::to_string(c.c_lower) +
                            ", ergodic " + std::to_string(c.c_ergodic) + ", upper " +
                            std::to_string(c.c_upper) +
                            "; refine the grid or raise K_modes");
  return out;
}

}  // namespace wkam
