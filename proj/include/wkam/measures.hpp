#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkam/controls.hpp"
#include "wkam/differential.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/lax_oleinik.hpp"
#include "wkam/simplex.hpp"

namespace wkam {

struct MeasureAtom {
  Point x;
  Control u;
  double w = 0.0;
};

// Weighted atoms on state x control space; weights sum to 1.
struct DiscreteMeasure {
  std::vector<MeasureAtom> atoms;

  double total_weight() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.w;
    return s;
  }

  double sigma_moment(double sigma) const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.w * std::pow(norm2(a.u), sigma);
    return s;
  }

  double integrate_L(const LagrangianSpec& spec) const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.w * eval_L(spec, a.x, a.u);
    return s;
  }
};

// Real Fourier modes 0 < |k|_inf <= K up to sign, one cos and one sin test
// function per representative, gradients normalized to ||D phi||_inf = 1.
struct FourierMode {
  std::vector<int> k;
  double knorm = 0.0; // |k|_2
};

inline std::vector<FourierMode> fourier_modes(int d, int K) {
  std::vector<FourierMode> modes;
  if (K <= 0) return modes;
  std::vector<int> k(static_cast<std::size_t>(d), -K);
  const auto advance = [&]() {
    for (int i = d - 1; i >= 0; --i) {
      if (++k[static_cast<std::size_t>(i)] <= K) return true;
      k[static_cast<std::size_t>(i)] = -K;
    }
    return false;
  };
  do {
    bool zero = true, sign_rep = false;
    double n2 = 0.0;
    for (int ki : k) {
      n2 += static_cast<double>(ki) * ki;
      if (ki != 0 && zero) {
        zero = false;
        sign_rep = ki > 0; // first nonzero positive: representative of {k,-k}
      }
    }
    if (zero || !sign_rep) continue;
    modes.push_back({k, std::sqrt(n2)});
  } while (advance());
  return modes;
}

// <F(x)^T D phi_k(x), u> for the normalized cos (trig=0) or sin (trig=1)
// test function of mode k.
inline double closedness_integrand(const FourierMode& mode, int trig, const FieldSystem& sys,
                                   const Point& x, const Control& u) {
  const double twopi = 2.0 * std::numbers::pi;
  double phase = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) phase += mode.k[i] * x[i];
  phase *= twopi;
  // D cos = -2 pi sin(phase) k ; D sin = 2 pi cos(phase) k ; normalize by 2 pi |k|
  const double amp = (trig == 0 ? -std::sin(phase) : std::cos(phase)) / mode.knorm;
  const FrameMatrix F = sys.eval(x);
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = amp * mode.k[i];
  std::vector<double> q(u.size());
  F.apply_transpose(grad, q);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += q[i] * u[i];
  return s;
}

// max over the truncated Fourier test basis of | int <F^T Dphi, u> dmu |.
inline double closedness_residual(const DiscreteMeasure& mu, const FieldSystem& sys, int K_modes) {
  if (K_modes < 1) throw std::invalid_argument("closedness_residual: K_modes must be >= 1");
  const auto modes = fourier_modes(sys.d, K_modes);
  double worst = 0.0;
  for (const auto& mode : modes) {
    for (int trig = 0; trig < 2; ++trig) {
      double s = 0.0;
      for (const auto& a : mu.atoms) s += a.w * closedness_integrand(mode, trig, sys, a.x, a.u);
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

// Occupation measure of the optimal discrete trajectory from x0 over [0,T]:
// uniform weights dt/T on the visited (state, control) pairs. The control
// at each step re-minimizes the dynamic-programming recursion at the exact
// (off-node) state against the stored value fields; when a critical
// solution chi is supplied, its feedback is used instead.
inline DiscreteMeasure occupation_measure(const Point& x0, double T, double dt,
                                          const LagrangianSpec& spec, const FieldSystem& sys,
                                          const ControlGrid& ctrl, const TorusGrid& grid,
                                          const ScalarField* chi = nullptr) {
  const long K = std::lround(T / dt);
  if (std::abs(T / dt - K) > 1e-9)
    throw std::invalid_argument("occupation_measure: T must be an integer multiple of dt");
  DiscreteMeasure mu;
  Point x(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) x[i] = wrap01(x0[i]);
  Point vel(x.size());
  if (chi) {
    // follow the calibrated curve ending at x0 backward in time (the
    // stable branch, which relaxes onto the Aubry set)
    const double delta = grid.h;
    for (long k = 0; k < K; ++k) {
      const auto hg = horizontal_gradient(*chi, sys, x, delta);
      const Control u = legendre_gradient(spec, x, hg.central);
      mu.atoms.push_back({x, u, dt / T});
      const FrameMatrix F = sys.eval(x);
      F.apply(u, vel);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = wrap01(x[i] - dt * vel[i]);
    }
    return mu;
  }
  std::vector<ScalarField> history;
  forward_value(grid, T, dt, spec, sys, ctrl, &history);
  Point cand(x.size());
  for (long k = 0; k < K; ++k) {
    const ScalarField& tail = history[static_cast<std::size_t>(K - 1 - k)];
    const FrameMatrix F = sys.eval(x);
    double best = kMask;
    std::size_t best_a = 0;
    for (std::size_t a = 0; a < ctrl.size(); ++a) {
      F.apply(ctrl[a], vel);
      for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] + dt * vel[i];
      const double v = dt * eval_L(spec, x, ctrl[a]) + interpolate_at(tail, cand.data());
      if (v < best) {
        best = v;
        best_a = a;
      }
    }
    const Control& u = ctrl[best_a];
    mu.atoms.push_back({x, u, dt / T});
    F.apply(u, vel);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = wrap01(x[i] + dt * vel[i]);
  }
  return mu;
}

// ---------------------------------------------------------------------------
// strongly F-closed residual against a fixed semiconcave adversarial family

struct SemiconcaveTest {
  std::string name;
  ScalarFn fn; // min of finitely many shifted quadratic cosines
};

// Family of 8 min-of-quadratic-cosine fields,
//   phi(x) = min_j { a_j sum_k (1 - cos(2 pi (x_k - s_{j,k}))) + o_j },
// exact formulas in the README.
inline std::vector<SemiconcaveTest> semiconcave_family(int d) {
  const double pi = std::numbers::pi;
  const auto bump = [pi, d](double a, const std::vector<double>& shift, const Point& x) {
    double s = 0.0;
    for (int k = 0; k < d; ++k)
      s += 1.0 - std::cos(2.0 * pi * (x[static_cast<std::size_t>(k)] -
                                      shift[static_cast<std::size_t>(k) % shift.size()]));
    return a * s;
  };
  std::vector<SemiconcaveTest> fam;
  const std::vector<std::vector<double>> shifts = {{0.0}, {0.25}, {0.5}, {0.33, 0.66}};
  const std::vector<double> amps = {0.5, 1.0};
  int idx = 0;
  for (double a : amps) {
    for (const auto& s1 : shifts) {
      const auto s2 = shifts[(static_cast<std::size_t>(idx) + 2) % shifts.size()];
      const double offset = 0.1 * (idx % 3);
      fam.push_back({"min-qcos-" + std::to_string(idx),
                     [bump, a, s1, s2, offset](const Point& x) {
                       return std::min(bump(a, s1, x), bump(a, s2, x) + offset);
                     }});
      ++idx;
    }
  }
  return fam;
}

struct StrongClosednessReport {
  double residual = 0.0;
  int unstable_atoms = 0; // delta-halving disagreement above tolerance
};

// One-sided horizontal derivative proxy [phi(x + delta F(x) u) - phi(x)]/delta
// at the smallest Richardson-stable delta.
inline StrongClosednessReport strong_closedness_residual(
    const DiscreteMeasure& mu, const FieldSystem& sys,
    const std::vector<SemiconcaveTest>& family, double delta0 = 1e-3, double stab_tol = 1e-2) {
  StrongClosednessReport rep;
  std::vector<bool> flagged(mu.atoms.size(), false);
  for (const auto& test : family) {
    double s = 0.0;
    for (std::size_t ai = 0; ai < mu.atoms.size(); ++ai) {
      const auto& a = mu.atoms[ai];
      const FrameMatrix F = sys.eval(a.x);
      Point vel(a.x.size());
      F.apply(a.u, vel);
      const double phi0 = test.fn(a.x);
      const auto one_sided = [&](double delta) {
        Point xp(a.x.size());
        for (std::size_t i = 0; i < xp.size(); ++i) xp[i] = a.x[i] + delta * vel[i];
        return (test.fn(xp) - phi0) / delta;
      };
      const double d1 = one_sided(delta0);
      const double d2 = one_sided(delta0 / 2.0);
      if (std::abs(d1 - d2) > stab_tol && !flagged[ai]) {
        flagged[ai] = true;
        ++rep.unstable_atoms;
      }
      s += a.w * d2;
    }
    rep.residual = std::max(rep.residual, std::abs(s));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Mather linear program

struct MatherLpResult {
  DiscreteMeasure mu;
  double value = 0.0;
  std::vector<double> duals; // one per closedness row, then normalization
  double constraint_residual = 0.0;
  double complementarity_residual = 0.0;
  double sigma_moment = 0.0;
  int simplex_iterations = 0;
};

// min sum w L(x,u) over weights on the coarse product grid subject to
// closedness against the truncated Fourier basis and normalization.
// Feasibility is guaranteed: any u = 0 column zeroes every closedness row.
inline MatherLpResult solve_mather_lp(const TorusGrid& state_grid, const ControlGrid& ctrl,
                                      int K_modes, double lp_tol, const LagrangianSpec& spec,
                                      const FieldSystem& sys) {
  const auto modes = fourier_modes(state_grid.d, K_modes);
  const std::size_t n_rows = 2 * modes.size() + 1;
  const std::size_t n_states = state_grid.size();
  const std::size_t n_vars = n_states * ctrl.size();

  std::vector<double> A(n_rows * n_vars, 0.0);
  std::vector<double> c(n_vars, 0.0);
  for (std::size_t si = 0; si < n_states; ++si) {
    const Point x = state_grid.node_point(si);
    for (std::size_t ui = 0; ui < ctrl.size(); ++ui) {
      const std::size_t j = si * ctrl.size() + ui;
      c[j] = eval_L(spec, x, ctrl[ui]);
      for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        A[(2 * mi) * n_vars + j] = closedness_integrand(modes[mi], 0, sys, x, ctrl[ui]);
        A[(2 * mi + 1) * n_vars + j] = closedness_integrand(modes[mi], 1, sys, x, ctrl[ui]);
      }
      A[(n_rows - 1) * n_vars + j] = 1.0;
    }
  }
  std::vector<double> b(n_rows, 0.0);
  b[n_rows - 1] = 1.0;

  DenseSimplex lp(std::move(A), b, c);
  const auto res = lp.solve(200000, lp_tol * 1e-3);
  if (res.status == DenseSimplex::Status::Infeasible)
    throw std::logic_error("mather LP infeasible; the u=0 column makes this impossible");
  if (res.status == DenseSimplex::Status::Unbounded)
    throw std::logic_error("mather LP unbounded; the feasible set is a compact simplex slice");
  if (res.status != DenseSimplex::Status::Optimal)
    throw std::runtime_error("mather LP: simplex iteration limit reached");

  MatherLpResult out;
  out.value = res.objective;
  out.duals = res.duals;
  out.simplex_iterations = res.iterations;
  out.constraint_residual = res.max_primal_residual;
  for (std::size_t si = 0; si < n_states; ++si) {
    for (std::size_t ui = 0; ui < ctrl.size(); ++ui) {
      const std::size_t j = si * ctrl.size() + ui;
      if (res.x[j] > 0.0)
        out.mu.atoms.push_back({state_grid.node_point(si), ctrl[ui], res.x[j]});
    }
  }
  out.sigma_moment = out.mu.sigma_moment(spec.sigma);
  // complementary slackness: basic atoms should price out to zero
  double comp = 0.0;
  for (const auto& atom : out.mu.atoms) {
    double rc = eval_L(spec, atom.x, atom.u);
    const auto modes2 = modes;
    for (std::size_t mi = 0; mi < modes2.size(); ++mi) {
      rc -= out.duals[2 * mi] * closedness_integrand(modes2[mi], 0, sys, atom.x, atom.u);
      rc -= out.duals[2 * mi + 1] * closedness_integrand(modes2[mi], 1, sys, atom.x, atom.u);
    }
    rc -= out.duals.back();
    comp = std::max(comp, std::abs(atom.w * rc));
  }
  out.complementarity_residual = comp;
  return out;
}

struct MatherSet {
  std::vector<std::size_t> projected;                  // state nodes
  std::vector<std::pair<std::size_t, Control>> full;   // (state node, control)
  double w_min_used = 0.0;
  bool w_min_lowered = false;
};

inline MatherSet mather_set(const DiscreteMeasure& mu, const TorusGrid& grid,
                            double w_min = 1e-6) {
  MatherSet out;
  double threshold = w_min;
  double max_w = 0.0;
  for (const auto& a : mu.atoms) max_w = std::max(max_w, a.w);
  if (max_w < threshold) {
    threshold = max_w / 2.0;
    out.w_min_lowered = true;
  }
  out.w_min_used = threshold;
  for (const auto& a : mu.atoms) {
    if (a.w < threshold) continue;
    const std::size_t node = grid.nearest_node(a.x);
    out.full.emplace_back(node, a.u);
    if (std::find(out.projected.begin(), out.projected.end(), node) == out.projected.end())
      out.projected.push_back(node);
  }
  std::sort(out.projected.begin(), out.projected.end());
  return out;
}

struct InclusionReport {
  bool ok = false;
  double max_cell_dist = 0.0;
};

// Every Mather node must be within one cell (Chebyshev index distance with
// wrap) of the Aubry set.
inline InclusionReport inclusion_check(const std::vector<std::size_t>& mather_nodes,
                                       const std::vector<std::size_t>& aubry_nodes,
                                       const TorusGrid& grid) {
  InclusionReport rep;
  if (mather_nodes.empty() || aubry_nodes.empty()) return rep;
  double worst = 0.0;
  for (std::size_t mnode : mather_nodes) {
    const auto mi = grid.unflatten(mnode);
    int best = grid.n;
    for (std::size_t anode : aubry_nodes) {
      const auto ai = grid.unflatten(anode);
      int cheb = 0;
      for (int k = 0; k < grid.d; ++k) {
        int dk = std::abs(mi[static_cast<std::size_t>(k)] - ai[static_cast<std::size_t>(k)]);
        dk = std::min(dk, grid.n - dk);
        cheb = std::max(cheb, dk);
      }
      best = std::min(best, cheb);
    }
    worst = std::max(worst, static_cast<double>(best));
  }
  rep.max_cell_dist = worst;
  rep.ok = worst <= 1.0;
  return rep;
}

// Graph property: on the Mather support the control is a function of the
// state through the feedback u = D_p L*(x, D_F chi(x)).
inline double graph_check(const DiscreteMeasure& mu, const ScalarField& chi,
                          const FieldSystem& sys, const LagrangianSpec& spec,
                          double w_min = 1e-6) {
  const double delta = chi.grid.h;
  double worst = 0.0;
  for (const auto& a : mu.atoms) {
    if (a.w < w_min) continue;
    const auto hg = horizontal_gradient(chi, sys, a.x, delta);
    const Control fb = legendre_gradient(spec, a.x, hg.central);
    double diff = 0.0;
    for (std::size_t i = 0; i < fb.size(); ++i) diff += (a.u[i] - fb[i]) * (a.u[i] - fb[i]);
    worst = std::max(worst, std::sqrt(diff));
  }
  return worst;
}

}  // namespace wkam
