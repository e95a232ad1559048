#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkam/geometry.hpp"

namespace wkam {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a, used to stamp outputs with the configuration they came from.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string format_double(double v) {
  if (v == kMask) return "inf";
  if (v == -kMask) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok) {
  if (tok == "inf") return kMask;
  if (tok == "-inf") return -kMask;
  // strtod instead of stod: stod throws out_of_range on subnormals, which
  // are legitimate field values and must round-trip.
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw std::invalid_argument("bad numeric token: " + tok);
  return v;
}

// Plain-text field format: optional comment lines, a header line
// "d n time shift", then row-major values. Round-trips bit-exactly.
inline void save_field(const ScalarField& f, const std::string& path,
                       const std::string& comment = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << f.grid.d << " " << f.grid.n << " " << format_double(f.meta.time_horizon) << " "
      << format_double(f.meta.shift) << "\n";
  for (std::size_t i = 0; i < f.values.size(); ++i)
    out << format_double(f.values[i]) << (i + 1 == f.values.size() ? "\n" : " ");
}

inline ScalarField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') break;
  }
  std::istringstream hdr(line);
  int d = 0, n = 0;
  std::string time_tok, shift_tok;
  if (!(hdr >> d >> n >> time_tok >> shift_tok))
    throw std::runtime_error("bad field header in " + path);
  ScalarField f{TorusGrid(d, n)};
  f.meta.time_horizon = parse_double(time_tok);
  f.meta.shift = parse_double(shift_tok);
  std::string tok;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!(in >> tok)) throw std::runtime_error("short field file " + path);
    f.values[i] = parse_double(tok);
  }
  return f;
}

// Whitespace-delimited plot columns (x1 .. xd value) with comment headers.
inline void save_plot_field(const ScalarField& f, const std::string& path,
                            const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# " << comment << "\n# ";
  for (int k = 0; k < f.grid.d; ++k) out << "x" << k + 1 << " ";
  out << "value\n";
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const Point x = f.grid.node_point(i);
    for (double xk : x) out << format_double(xk) << " ";
    out << format_double(f.values[i]) << "\n";
  }
}

}  // namespace wkam
