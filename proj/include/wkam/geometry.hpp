#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace wkam {

using Point = std::vector<double>;   // point on the d-torus, side 1
using Control = std::vector<double>; // control vector in R^m

inline constexpr double kMask = std::numeric_limits<double>::infinity();

// Representative of t in [0, 1).
inline double wrap01(double t) {
  double r = t - std::floor(t);
  if (r >= 1.0) r = 0.0; // floor rounding at negative epsilons
  return r;
}

// Representative of t in [-1/2, 1/2).
inline double wrap_centered(double t) {
  double r = wrap01(t + 0.5) - 0.5;
  return r;
}

// Torus distance |a-b| with per-coordinate wrap.
inline double torus_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dk = wrap_centered(a[k] - b[k]);
    s += dk * dk;
  }
  return std::sqrt(s);
}

// Uniform grid on the d-torus with n nodes per axis, spacing h = 1/n.
struct TorusGrid {
  int d = 0;
  int n = 0;
  double h = 0.0;

  TorusGrid() = default;
  TorusGrid(int dim, int nodes_per_axis) : d(dim), n(nodes_per_axis) {
    if (d < 1) throw std::invalid_argument("TorusGrid: d must be >= 1");
    if (n < 4) throw std::invalid_argument("TorusGrid: n must be >= 4");
    h = 1.0 / n;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int k = 0; k < d; ++k) s *= static_cast<std::size_t>(n);
    return s;
  }

  // Row-major flatten of a multi-index (each component wrapped mod n).
  std::size_t flatten(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int k = 0; k < d; ++k) {
      int i = idx[static_cast<std::size_t>(k)] % n;
      if (i < 0) i += n;
      f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
    }
    return f;
  }

  std::vector<int> unflatten(std::size_t f) const {
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int k = d - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(f % static_cast<std::size_t>(n));
      f /= static_cast<std::size_t>(n);
    }
    return idx;
  }

  Point node_point(std::size_t f) const {
    const auto idx = unflatten(f);
    Point x(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)] * h;
    return x;
  }

  // Nearest node to an arbitrary point.
  std::size_t nearest_node(const Point& x) const {
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      idx[static_cast<std::size_t>(k)] =
          static_cast<int>(std::llround(wrap01(x[static_cast<std::size_t>(k)]) * n)) % n;
    }
    return flatten(idx);
  }

  bool operator==(const TorusGrid& o) const { return d == o.d && n == o.n; }
};

struct FieldMeta {
  double time_horizon = 0.0;
  double shift = 0.0;
  std::string provenance;
};

// Grid function on the torus with periodic multilinear interpolation.
// A node may carry +inf ("mask"); interpolation is mask-aware: if any of
// the 2^d surrounding nodes is masked, the interpolated value is masked.
struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;
  FieldMeta meta;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}

  double& at(std::size_t f) { return values[f]; }
  double at(std::size_t f) const { return values[f]; }

  double min_value() const {
    double m = kMask;
    for (double v : values)
      if (v < m) m = v;
    return m;
  }
  double max_finite() const {
    double m = -kMask;
    for (double v : values)
      if (v < kMask && v > m) m = v;
    return m;
  }
};

inline double sup_distance(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double va = a.values[i], vb = b.values[i];
    if (va == kMask && vb == kMask) continue;
    const double dv = std::abs(va - vb);
    if (dv > m) m = dv;
  }
  return m;
}

// Periodic multilinear interpolation. Exact at nodes; bounded by the
// min/max of the surrounding node values (monotone).
inline double interpolate_at(const ScalarField& field, const double* x) {
  const TorusGrid& g = field.grid;
  const int d = g.d;
  if (d > 8) throw std::invalid_argument("interpolate: d > 8 unsupported");
  int base[8];
  double frac[8];
  for (int k = 0; k < d; ++k) {
    const double s = wrap01(x[k]) * g.n;
    double fl = std::floor(s);
    double fr = s - fl;
    int b = static_cast<int>(fl) % g.n;
    if (fr >= 1.0) { fr = 0.0; b = (b + 1) % g.n; }
    base[k] = b;
    frac[k] = fr;
  }
  const int corners = 1 << d;
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) {
      const bool hi = (c >> k) & 1;
      int i = base[k] + (hi ? 1 : 0);
      if (i >= g.n) i -= g.n;
      w *= hi ? frac[k] : 1.0 - frac[k];
      flat = flat * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(i);
    }
    const double v = field.values[flat];
    if (v == kMask) {
      if (w > 0.0) return kMask;
      continue; // zero-weight masked corner does not poison the value
    }
    acc += w * v;
  }
  return acc;
}

inline double interpolate(const ScalarField& field, const Point& x) {
  if (static_cast<int>(x.size()) != field.grid.d)
    throw std::invalid_argument("interpolate: dimension mismatch");
  return interpolate_at(field, x.data());
}

}  // namespace wkam
