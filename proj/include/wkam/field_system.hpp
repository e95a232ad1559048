#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkam/geometry.hpp"

namespace wkam {

// Row-major d x m matrix, the frame F(x) = [f_1 | ... | f_m].
struct FrameMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  FrameMatrix() = default;
  FrameMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  // y = F u  (d-vector from m-vector)
  void apply(const Control& u, Point& out) const {
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += (*this)(i, j) * u[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = s;
    }
  }

  // q = F^T p  (m-covector from d-covector)
  void apply_transpose(const std::vector<double>& p, std::vector<double>& out) const {
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows; ++i) s += (*this)(i, j) * p[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(j)] = s;
    }
  }

  // max column Euclidean norm; used for CFL-type bounds.
  double max_column_norm() const {
    double m = 0.0;
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows; ++i) s += (*this)(i, j) * (*this)(i, j);
      m = std::max(m, std::sqrt(s));
    }
    return m;
  }
};

// Control-affine frame on the torus. Coordinates are reduced mod 1 before
// evaluation, so eval is 1-periodic by construction for the builtins; for
// tabulated frames periodicity comes from the periodic interpolation.
struct FieldSystem {
  std::string name;
  int d = 0;
  int m = 0;
  std::function<FrameMatrix(const Point&)> eval_fn;
  std::string smoothness_note;
  bool full_rank_everywhere = true;

  FrameMatrix eval(const Point& x) const {
    if (static_cast<int>(x.size()) != d)
      throw std::invalid_argument("FieldSystem: point dimension mismatch");
    Point xw(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) xw[k] = wrap01(x[k]);
    return eval_fn(xw);
  }
};

inline FieldSystem make_identity_frame(int d) {
  FieldSystem sys;
  sys.name = "riemannian-identity";
  sys.d = d;
  sys.m = d;
  sys.smoothness_note = "constant frame, C^infinity";
  sys.full_rank_everywhere = true;
  sys.eval_fn = [d](const Point&) {
    FrameMatrix F(d, d);
    for (int i = 0; i < d; ++i) F(i, i) = 1.0;
    return F;
  };
  return sys;
}

// F = [[1,0],[0,r(x1)]] with r(x1) the representative of x1 in [-1/2,1/2).
// Discontinuous across the seam x1 = 1/2; matches the chart formula near 0.
inline FieldSystem make_grushin_chart() {
  FieldSystem sys;
  sys.name = "grushin-chart";
  sys.d = 2;
  sys.m = 2;
  sys.smoothness_note = "rank 1 on {x1 = 0}; discontinuous at the chart seam";
  sys.full_rank_everywhere = false;
  sys.eval_fn = [](const Point& x) {
    FrameMatrix F(2, 2);
    F(0, 0) = 1.0;
    F(1, 1) = wrap_centered(x[0]);
    return F;
  };
  return sys;
}

// Globally smooth periodization: F = [[1,0],[0, sin(2*pi*x1)/(2*pi)]].
inline FieldSystem make_grushin_periodic() {
  FieldSystem sys;
  sys.name = "grushin-periodic";
  sys.d = 2;
  sys.m = 2;
  sys.smoothness_note = "rank 1 on {x1 = 0} and {x1 = 1/2}; C^infinity";
  sys.full_rank_everywhere = false;
  sys.eval_fn = [](const Point& x) {
    FrameMatrix F(2, 2);
    F(0, 0) = 1.0;
    F(1, 1) = std::sin(2.0 * std::numbers::pi * x[0]) / (2.0 * std::numbers::pi);
    return F;
  };
  return sys;
}

// Tabulated frame: one line per node, row-major over a TorusGrid(d, n),
// d*m values per line; evaluated by periodic multilinear interpolation of
// each matrix entry.
inline FieldSystem load_tabulated_frame(const std::string& path, int d, int m, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frame file: " + path);
  TorusGrid grid(d, n);
  const std::size_t nodes = grid.size();
  const int entries = d * m;
  std::vector<ScalarField> entry_fields(static_cast<std::size_t>(entries), ScalarField(grid));
  std::string line;
  std::size_t row = 0;
  while (row < nodes && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    for (int e = 0; e < entries; ++e) {
      if (!(ls >> entry_fields[static_cast<std::size_t>(e)].values[row]))
        throw std::runtime_error("frame file: short line " + std::to_string(row));
    }
    ++row;
  }
  if (row != nodes)
    throw std::runtime_error("frame file: expected " + std::to_string(nodes) + " node lines");

  FieldSystem sys;
  sys.name = "tabulated:" + path;
  sys.d = d;
  sys.m = m;
  sys.smoothness_note = "tabulated, multilinear between nodes";
  sys.full_rank_everywhere = false; // unknown; conservative
  sys.eval_fn = [d, m, fields = std::move(entry_fields)](const Point& x) {
    FrameMatrix F(d, m);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < m; ++j)
        F(i, j) = interpolate(fields[static_cast<std::size_t>(i * m + j)], x);
    return F;
  };
  return sys;
}

inline FieldSystem make_frame_by_name(const std::string& name, int d = 2) {
  if (name == "riemannian-identity") return make_identity_frame(d);
  if (name == "grushin-chart") return make_grushin_chart();
  if (name == "grushin-periodic") return make_grushin_periodic();
  throw std::invalid_argument("unknown frame: " + name);
}

// Sampled sup of the max column norm of F over the grid nodes.
inline double max_frame_norm(const FieldSystem& sys, const TorusGrid& grid) {
  double m = 0.0;
  for (std::size_t f = 0; f < grid.size(); ++f)
    m = std::max(m, sys.eval(grid.node_point(f)).max_column_norm());
  return m;
}

}  // namespace wkam
