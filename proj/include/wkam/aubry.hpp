#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "wkam/controls.hpp"
#include "wkam/differential.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/lax_oleinik.hpp"
#include "wkam/parallel.hpp"
#include "wkam/sr_distance.hpp"

namespace wkam {

// Discretized Peierls barrier h(x_i, y_j) on a node set, square so that
// min-plus doubling composes within the set.
struct BarrierMatrix {
  TorusGrid grid;
  std::vector<std::size_t> nodes; // sources = targets
  std::vector<double> values;     // row-major, nodes.size() squared
  double c_used = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double eps_num = 0.0;                    // numerical slack for the zero test
  std::vector<std::size_t> non_stabilized; // flat pair indices whose running min
                                           // still moved in the last octave

  double at(std::size_t i, std::size_t j) const { return values[i * nodes.size() + j]; }

  // row of h(x_i, .) prolonged to a grid field (masked off the node set)
  ScalarField row_field(std::size_t i) const {
    ScalarField f(grid, kMask);
    for (std::size_t j = 0; j < nodes.size(); ++j) f.values[nodes[j]] = at(i, j);
    f.meta.provenance = "peierls_barrier row";
    return f;
  }
};

// Stratified subsample of at most max_nodes grid nodes (every node when the
// grid is small enough).
inline std::vector<std::size_t> barrier_node_set(const TorusGrid& grid,
                                                 std::size_t max_nodes = 1024) {
  const std::size_t N = grid.size();
  std::vector<std::size_t> nodes;
  if (N <= max_nodes) {
    nodes.resize(N);
    for (std::size_t f = 0; f < N; ++f) nodes[f] = f;
    return nodes;
  }
  // stride per axis: keeps the sample a coarser sublattice
  int stride = 1;
  while (true) {
    std::size_t count = 1;
    for (int k = 0; k < grid.d; ++k)
      count *= static_cast<std::size_t>((grid.n + stride - 1) / stride);
    if (count <= max_nodes) break;
    ++stride;
  }
  std::vector<int> idx(static_cast<std::size_t>(grid.d), 0);
  const auto advance = [&]() {
    for (int i = grid.d - 1; i >= 0; --i) {
      idx[static_cast<std::size_t>(i)] += stride;
      if (idx[static_cast<std::size_t>(i)] < grid.n) return true;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    return false;
  };
  do {
    nodes.push_back(grid.flatten(idx));
  } while (advance());
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

// h(x,y) = min over dyadic t in [T_min, T_max] of A_t(x,y) - c t, with the
// base A_{T_min} propagated on the full grid per source and the doubling
// A_{2t} = A_t (min-plus) A_t on the node set.
inline BarrierMatrix peierls_barrier(double c, const std::vector<std::size_t>& sources,
                                     double T_min, double T_max, const TorusGrid& grid, double dt,
                                     const LagrangianSpec& spec, const FieldSystem& sys,
                                     const ControlGrid& ctrl) {
  if (T_min <= 0.0 || T_max < T_min)
    throw std::invalid_argument("peierls_barrier: need 0 < T_min <= T_max");
  const std::size_t K = sources.size();
  BarrierMatrix bm;
  bm.grid = grid;
  bm.nodes = sources;
  bm.c_used = c;
  bm.t_min = T_min;
  bm.t_max = T_max;

  // short directly-propagated base, then min-plus doubling up through
  // [T_min, T_max]
  long base_steps = 8;
  if (base_steps > std::lround(T_min / dt)) base_steps = std::max(1l, std::lround(T_min / dt));
  const double t0 = base_steps * dt;
  std::vector<double> base(K * K);
  StepOperator op(grid, dt, spec, sys, ctrl, -1);
  for (std::size_t i = 0; i < K; ++i) {
    ScalarField a = delta_action_init(sources[i], grid, dt);
    for (long s = 0; s < base_steps; ++s) a = op.apply(a);
    for (std::size_t j = 0; j < K; ++j) base[i * K + j] = a.values[sources[j]];
  }

  bm.values.assign(K * K, kMask);
  double t = t0;
  std::vector<double> At = std::move(base);
  std::vector<double> before_last = bm.values;
  while (true) {
    if (t >= T_min * (1.0 - 1e-12)) {
      before_last = bm.values;
      for (std::size_t p = 0; p < K * K; ++p) {
        if (At[p] == kMask) continue;
        const double v = At[p] - c * t;
        if (v < bm.values[p]) bm.values[p] = v;
      }
      if (2.0 * t > T_max * (1.0 + 1e-12)) break;
    }
    At = minplus_double(At, K);
    t *= 2.0;
  }
  double stab_slack = 0.0;
  for (std::size_t p = 0; p < K * K; ++p) {
    const double prev = before_last[p], cur = bm.values[p];
    if (prev == kMask) continue;
    const double change = prev - cur;
    if (change > 1e-9) {
      bm.non_stabilized.push_back(p);
      stab_slack = std::max(stab_slack, change);
    }
  }
  double diag_min = 0.0;
  for (std::size_t i = 0; i < K; ++i) diag_min = std::min(diag_min, bm.at(i, i));
  bm.eps_num = std::abs(diag_min) + stab_slack + 1e-9;
  return bm;
}

struct AubrySet {
  std::vector<std::size_t> nodes;  // grid node indices
  double eps_used = 0.0;
  bool eps_auto_raised = false;
};

// Projected Aubry set: near-zeros of the barrier diagonal. The set is
// provably nonempty, so an empty result at the default threshold raises
// the threshold to the minimal value admitting a node.
inline AubrySet aubry_set(const BarrierMatrix& h, double eps = -1.0) {
  AubrySet out;
  out.eps_used = eps > 0.0 ? eps : 3.0 * h.eps_num;
  double min_abs = kMask;
  for (std::size_t i = 0; i < h.nodes.size(); ++i) {
    const double diag = std::abs(h.at(i, i));
    min_abs = std::min(min_abs, diag);
    if (diag <= out.eps_used) out.nodes.push_back(h.nodes[i]);
  }
  if (out.nodes.empty()) {
    out.eps_auto_raised = true;
    out.eps_used = min_abs * (1.0 + 1e-12) + 1e-15;
    for (std::size_t i = 0; i < h.nodes.size(); ++i)
      if (std::abs(h.at(i, i)) <= out.eps_used) out.nodes.push_back(h.nodes[i]);
  }
  return out;
}

struct DominationReport {
  double max_defect = -kMask;
  int samples = 0;
};

// Samples random admissible discrete trajectories (piecewise-constant
// controls, duration in [1,5]) and evaluates the domination defect
// phi(gamma(b)) - phi(gamma(a)) - sum dt L + c (b - a).
inline DominationReport check_domination(const ScalarField& phi, double c, int n_samples,
                                         std::uint64_t seed, double dt, const LagrangianSpec& spec,
                                         const FieldSystem& sys, const ControlGrid& ctrl) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::uniform_real_distribution<double> dur(1.0, 5.0);
  std::uniform_int_distribution<std::size_t> pick(0, ctrl.size() - 1);
  const long resample_every = std::max<long>(1, std::lround(0.2 / dt));
  DominationReport rep;
  const std::size_t d = static_cast<std::size_t>(sys.d);
  Point x(d), vel(d);
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t i = 0; i < d; ++i) x[i] = coord(rng);
    const long steps = std::lround(dur(rng) / dt);
    const double phi_a = interpolate(phi, x);
    double cost = 0.0;
    std::size_t ua = pick(rng);
    for (long k = 0; k < steps; ++k) {
      if (k % resample_every == 0 && k > 0) ua = pick(rng);
      cost += dt * eval_L(spec, x, ctrl[ua]);
      const FrameMatrix F = sys.eval(x);
      F.apply(ctrl[ua], vel);
      for (std::size_t i = 0; i < d; ++i) x[i] = wrap01(x[i] + dt * vel[i]);
    }
    const double phi_b = interpolate(phi, x);
    const double defect = phi_b - phi_a - cost + c * (steps * dt);
    rep.max_defect = std::max(rep.max_defect, defect);
    ++rep.samples;
  }
  return rep;
}

// || T_t h_row - c t - h_row ||_inf by repeated backward steps; small for
// barrier rows at the correct critical constant, large for a wrong one.
inline double barrier_fixed_point_check(const ScalarField& h_row, double c, double t_check,
                                        double dt, const LagrangianSpec& spec,
                                        const FieldSystem& sys, const ControlGrid& ctrl) {
  const long steps = std::lround(t_check / dt);
  StepOperator op(h_row.grid, dt, spec, sys, ctrl, -1);
  ScalarField f = h_row;
  for (long k = 0; k < steps; ++k) f = op.apply(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (h_row.values[i] == kMask || f.values[i] == kMask) continue;
    worst = std::max(worst, std::abs(f.values[i] - c * (steps * dt) - h_row.values[i]));
  }
  return worst;
}

// Sampled sub-Riemannian Lipschitz constant of phi against precomputed
// distance fields, max |phi(x)-phi(y)| / max(d_SR(x,y), h).
inline double lipschitz_check(const ScalarField& phi,
                              const std::vector<std::pair<std::size_t, ScalarField>>& d_sr_fields) {
  double worst = 0.0;
  for (const auto& [src, dist] : d_sr_fields) {
    const double phi_src = phi.values[src];
    for (std::size_t f = 0; f < phi.values.size(); ++f) {
      if (dist.values[f] == kMask) continue;
      const double denom = std::max(dist.values[f], phi.grid.h);
      worst = std::max(worst, std::abs(phi.values[f] - phi_src) / denom);
    }
  }
  return worst;
}

}  // namespace wkam
