#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wkam/geometry.hpp"

namespace wkam {

// Lattice of admissible controls: all points of spacing 2R/(n_u-1) inside
// the closed Euclidean ball |u|_2 <= R. n_u is forced odd so that the zero
// control is a lattice member exactly and the set is symmetric under
// negation.
struct ControlGrid {
  int m = 0;
  double radius = 0.0;
  int n_u = 0;
  std::vector<Control> points;

  ControlGrid() = default;
  ControlGrid(int control_dim, double R_u, int nodes_per_axis)
      : m(control_dim), radius(R_u) {
    if (m < 1) throw std::invalid_argument("ControlGrid: m must be >= 1");
    if (R_u < 0.0) throw std::invalid_argument("ControlGrid: radius must be >= 0");
    n_u = nodes_per_axis < 1 ? 1 : nodes_per_axis;
    if (n_u % 2 == 0) ++n_u; // keep 0 on the lattice
    if (R_u == 0.0) n_u = 1;
    const double spacing = n_u > 1 ? 2.0 * radius / (n_u - 1) : 0.0;
    const std::size_t total = [&] {
      std::size_t t = 1;
      for (int k = 0; k < m; ++k) t *= static_cast<std::size_t>(n_u);
      return t;
    }();
    Control u(static_cast<std::size_t>(m));
    for (std::size_t f = 0; f < total; ++f) {
      std::size_t rem = f;
      double norm2 = 0.0;
      for (int k = m - 1; k >= 0; --k) {
        const int i = static_cast<int>(rem % static_cast<std::size_t>(n_u));
        rem /= static_cast<std::size_t>(n_u);
        const double c = -radius + spacing * i;
        u[static_cast<std::size_t>(k)] = c;
        norm2 += c * c;
      }
      if (norm2 <= radius * radius * (1.0 + 1e-12)) points.push_back(u);
    }
  }

  std::size_t size() const { return points.size(); }
  const Control& operator[](std::size_t i) const { return points[i]; }
};

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

}  // namespace wkam
