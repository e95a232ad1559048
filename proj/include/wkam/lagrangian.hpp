#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkam/controls.hpp"
#include "wkam/field_system.hpp"
#include "wkam/geometry.hpp"

namespace wkam {

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<std::vector<double>(const Point&)>;

// Built-in potential fields (formulas documented in the README).
inline ScalarFn make_builtin_G(const std::string& name) {
  const double pi = std::numbers::pi;
  if (name == "zero") return [](const Point&) { return 0.0; };
  if (name == "sin2")
    return [pi](const Point& x) {
      double s = 0.0;
      for (double xk : x) s += std::sin(pi * xk) * std::sin(pi * xk);
      return s;
    };
  if (name == "two-bump")
    // double well in x1 with minima 0 at x1=0 and 0.3 at x1=1/2,
    // confined in x2; minima at (0,0) value 0 and (1/2,0) value 0.3.
    return [pi](const Point& x) {
      const double w = 0.15 * (1.0 - std::cos(2.0 * pi * x[0])) +
                       0.10 * (1.0 - std::cos(4.0 * pi * x[0]));
      double conf = 0.0;
      for (std::size_t k = 1; k < x.size(); ++k)
        conf += std::sin(pi * x[k]) * std::sin(pi * x[k]);
      return w + conf;
    };
  throw std::invalid_argument("unknown builtin G: " + name);
}

inline ScalarFn make_constant_G(double value) {
  return [value](const Point&) { return value; };
}

inline VectorFn make_zero_V(int m) {
  return [m](const Point&) { return std::vector<double>(static_cast<std::size_t>(m), 0.0); };
}

inline VectorFn make_constant_V(std::vector<double> value) {
  return [value](const Point&) { return value; };
}

// Tabulated Lagrangian on state grid x control box [-R, R]^m, multilinear
// in both arguments. Control queries outside the box are an error.
struct TabulatedL {
  TorusGrid state_grid;
  double radius = 0.0;
  int n_uc = 0; // control nodes per axis
  std::vector<double> values; // state-major, then control lattice row-major

  std::size_t control_count() const {
    std::size_t c = 1;
    for (int k = 0; k < control_dim; ++k) c *= static_cast<std::size_t>(n_uc);
    return c;
  }
  int control_dim = 0;
};

// Lagrangian with a coercivity certificate L(x,u) >= K1 |u|^sigma - K2.
// Kind "mane": L(x,u) = |u - V(x)|^2 / 2 + G(x), closed-form Legendre.
struct LagrangianSpec {
  enum class Kind { Mane, Custom };
  Kind kind = Kind::Mane;

  // mane data
  VectorFn V;
  ScalarFn G;

  // custom data
  TabulatedL table;

  int m = 0;
  double sigma = 2.0;
  double K1 = 0.25;
  double K2 = 0.0;
  double L0_sup = 0.0; // sampled sup-norm of L(.,0)
};

inline double eval_L(const LagrangianSpec& spec, const Point& x, const Control& u) {
  if (static_cast<int>(u.size()) != spec.m)
    throw std::invalid_argument("eval_L: control dimension mismatch");
  if (spec.kind == LagrangianSpec::Kind::Mane) {
    const auto v = spec.V(x);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double dk = u[k] - v[k];
      s += dk * dk;
    }
    return 0.5 * s + spec.G(x);
  }
  // custom: multilinear in state (periodic) and control (clamped box with
  // out-of-range check)
  const TabulatedL& t = spec.table;
  for (double uk : u)
    if (std::abs(uk) > t.radius * (1.0 + 1e-12))
      throw std::out_of_range("eval_L: control outside tabulated range");
  const int d = t.state_grid.d;
  const int m = t.control_dim;
  // corner weights in state
  std::vector<int> sbase(static_cast<std::size_t>(d));
  std::vector<double> sfrac(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const double s = wrap01(x[static_cast<std::size_t>(k)]) * t.state_grid.n;
    double fl = std::floor(s);
    double fr = s - fl;
    int b = static_cast<int>(fl) % t.state_grid.n;
    if (fr >= 1.0) { fr = 0.0; b = (b + 1) % t.state_grid.n; }
    sbase[static_cast<std::size_t>(k)] = b;
    sfrac[static_cast<std::size_t>(k)] = fr;
  }
  const double spacing = t.n_uc > 1 ? 2.0 * t.radius / (t.n_uc - 1) : 1.0;
  std::vector<int> cbase(static_cast<std::size_t>(m));
  std::vector<double> cfrac(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    double s = (u[static_cast<std::size_t>(k)] + t.radius) / spacing;
    s = std::min(std::max(s, 0.0), static_cast<double>(t.n_uc - 1));
    int b = static_cast<int>(std::floor(s));
    if (b >= t.n_uc - 1) b = t.n_uc - 2;
    if (b < 0) b = 0;
    cbase[static_cast<std::size_t>(k)] = b;
    cfrac[static_cast<std::size_t>(k)] = s - b;
  }
  const std::size_t ccount = t.control_count();
  double acc = 0.0;
  std::vector<int> sidx(static_cast<std::size_t>(d));
  for (int cs = 0; cs < (1 << d); ++cs) {
    double ws = 1.0;
    for (int k = 0; k < d; ++k) {
      const bool hi = (cs >> k) & 1;
      sidx[static_cast<std::size_t>(k)] = sbase[static_cast<std::size_t>(k)] + (hi ? 1 : 0);
      ws *= hi ? sfrac[static_cast<std::size_t>(k)] : 1.0 - sfrac[static_cast<std::size_t>(k)];
    }
    const std::size_t snode = t.state_grid.flatten(sidx);
    for (int cc = 0; cc < (1 << m); ++cc) {
      double wc = 1.0;
      std::size_t cflat = 0;
      for (int k = 0; k < m; ++k) {
        const bool hi = (cc >> k) & 1;
        const int i = std::min(cbase[static_cast<std::size_t>(k)] + (hi ? 1 : 0), t.n_uc - 1);
        wc *= hi ? cfrac[static_cast<std::size_t>(k)] : 1.0 - cfrac[static_cast<std::size_t>(k)];
        cflat = cflat * static_cast<std::size_t>(t.n_uc) + static_cast<std::size_t>(i);
      }
      acc += ws * wc * t.values[snode * ccount + cflat];
    }
  }
  return acc;
}

// Legendre transform L*(x,q) = sup_u { <q,u> - L(x,u) }. Closed form for
// the Mane kind; grid maximization with one local refinement pass for
// custom tables.
inline double legendre(const LagrangianSpec& spec, const Point& x, const std::vector<double>& q,
                       Control* argmax_out = nullptr) {
  if (static_cast<int>(q.size()) != spec.m)
    throw std::invalid_argument("legendre: covector dimension mismatch");
  if (spec.kind == LagrangianSpec::Kind::Mane) {
    const auto v = spec.V(x);
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) s += 0.5 * q[k] * q[k] + q[k] * v[k];
    if (argmax_out) {
      argmax_out->resize(q.size());
      for (std::size_t k = 0; k < q.size(); ++k) (*argmax_out)[k] = q[k] + v[k];
    }
    return s - spec.G(x);
  }
  const TabulatedL& t = spec.table;
  ControlGrid coarse(t.control_dim, t.radius, t.n_uc);
  double best = -kMask;
  Control best_u;
  for (const auto& u : coarse.points) {
    double val = -eval_L(spec, x, u);
    for (std::size_t k = 0; k < u.size(); ++k) val += q[k] * u[k];
    if (val > best) { best = val; best_u = u; }
  }
  // one refinement pass around the coarse argmax
  const double spacing = t.n_uc > 1 ? 2.0 * t.radius / (t.n_uc - 1) : 0.0;
  if (spacing > 0.0) {
    ControlGrid fine(t.control_dim, spacing, 9);
    for (const auto& du : fine.points) {
      Control u = best_u;
      bool inside = true;
      for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] += du[k];
        if (std::abs(u[k]) > t.radius) { inside = false; break; }
      }
      if (!inside) continue;
      double val = -eval_L(spec, x, u);
      for (std::size_t k = 0; k < u.size(); ++k) val += q[k] * u[k];
      if (val > best) { best = val; best_u = u; }
    }
  }
  if (argmax_out) *argmax_out = best_u;
  return best;
}

// H(x,p) = L*(x, F(x)^T p).
inline double hamiltonian(const LagrangianSpec& spec, const FieldSystem& sys, const Point& x,
                          const std::vector<double>& p) {
  const FrameMatrix F = sys.eval(x);
  std::vector<double> q(static_cast<std::size_t>(spec.m));
  F.apply_transpose(p, q);
  return legendre(spec, x, q);
}

// Feedback control u = D_p L*(x, q). For the Mane kind this is q + V(x);
// for tables it is the (refined) Legendre argmax.
inline Control legendre_gradient(const LagrangianSpec& spec, const Point& x,
                                 const std::vector<double>& q) {
  Control u;
  legendre(spec, x, q, &u);
  return u;
}

// Default control radius from the coercivity certificate,
// kappa0 = (||L(.,0)||_inf + K2) / K1, with a safety factor of 2 and a
// floor so that a degenerate zero bound still yields a usable control set.
inline double control_radius_bound(const LagrangianSpec& spec, double min_radius = 1.0) {
  if (spec.K1 <= 0.0) throw std::invalid_argument("control_radius_bound: K1 must be > 0");
  const double kappa0 = (spec.L0_sup + spec.K2) / spec.K1;
  const double r = 2.0 * std::pow(kappa0, 1.0 / spec.sigma);
  return r < min_radius ? min_radius : r;
}

// Build a Mane Lagrangian and compute its certificate by sampling the
// given grid: sigma = 2, K1 = 1/4, K2 = sup(|V|^2/2 - G)^+.
inline LagrangianSpec make_mane_lagrangian(int m, VectorFn V, ScalarFn G,
                                           const TorusGrid& sample_grid) {
  LagrangianSpec spec;
  spec.kind = LagrangianSpec::Kind::Mane;
  spec.m = m;
  spec.V = std::move(V);
  spec.G = std::move(G);
  spec.sigma = 2.0;
  spec.K1 = 0.25;
  double k2 = 0.0, l0 = 0.0;
  for (std::size_t f = 0; f < sample_grid.size(); ++f) {
    const Point x = sample_grid.node_point(f);
    const auto v = spec.V(x);
    double vn2 = 0.0;
    for (double vk : v) vn2 += vk * vk;
    const double g = spec.G(x);
    k2 = std::max(k2, 0.5 * vn2 - g);
    l0 = std::max(l0, std::abs(0.5 * vn2 + g));
  }
  spec.K2 = k2;
  spec.L0_sup = l0;
  return spec;
}

// Sampled verification of the certificate: coercivity at grid samples and
// midpoint convexity in u. Returns the worst violation (<= 0 when clean).
inline double verify_certificate(const LagrangianSpec& spec, const TorusGrid& grid,
                                 const ControlGrid& ctrl) {
  double worst = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 64);
  for (std::size_t f = 0; f < grid.size(); f += stride) {
    const Point x = grid.node_point(f);
    for (std::size_t a = 0; a < ctrl.size(); ++a) {
      const Control& u = ctrl[a];
      double un = 0.0;
      for (double uk : u) un += uk * uk;
      un = std::sqrt(un);
      const double lower = spec.K1 * std::pow(un, spec.sigma) - spec.K2;
      worst = std::max(worst, lower - eval_L(spec, x, u));
    }
    // midpoint convexity on a few control pairs
    for (std::size_t a = 0; a + 1 < ctrl.size(); a += std::max<std::size_t>(1, ctrl.size() / 8)) {
      const Control& u = ctrl[a];
      const Control& v = ctrl[ctrl.size() - 1 - a];
      Control mid(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) mid[k] = 0.5 * (u[k] + v[k]);
      const double lhs = eval_L(spec, x, mid);
      const double rhs = 0.5 * (eval_L(spec, x, u) + eval_L(spec, x, v)) + 1e-12;
      worst = std::max(worst, lhs - rhs);
    }
  }
  return worst;
}

}  // namespace wkam
