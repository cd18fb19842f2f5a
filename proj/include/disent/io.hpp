#pragma once

// Density-matrix text format.
//
//   n=<parties>
//   <row> <col> <re> <im>
//   ...
//
// Entries follow row-major order and may be omitted when zero. Values are
// written with 17 significant digits, so a save/load cycle is bit-exact.
// Blank lines and lines starting with '#' are ignored on input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "disent/errors.hpp"
#include "disent/qstate.hpp"

namespace disent {

inline constexpr double kLoadTolerance = 1e-8;

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_density(std::ostream& os, const DensityMatrix& rho) {
  os << "n=" << rho.n_parties() << '\n';
  const auto& a = rho.data();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const Complex z = a(r, c);
      if (z == Complex(0.0, 0.0)) continue;
      os << r << ' ' << c << ' ' << format_double(z.real()) << ' ' << format_double(z.imag()) << '\n';
    }
  }
}

/// Parses the text format and validates the result with tolerance 1e-8.
/// Throws input_error naming the first failed check.
inline DensityMatrix read_density(std::istream& is) {
  std::string line;
  int line_no = 0;
  int n = -1;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) {
    throw input_error("line " + std::to_string(line_no) + ": " + what);
  };

  if (!next_line()) throw input_error("header: empty input, expected n=<parties>");
  {
    std::istringstream hs(line);
    std::string key;
    if (!std::getline(hs, key, '=') || key != "n" || !(hs >> n)) fail("header: expected n=<parties>");
    std::string rest;
    if (hs >> rest) fail("header: trailing text");
    if (n < 1 || n > kMaxParties) fail("header: party count must be in [1, " + std::to_string(kMaxParties) + "]");
  }

  const auto d = static_cast<Eigen::Index>(detail::dim_of(n));
  Matrix data = Matrix::Zero(d, d);
  long long last = -1;
  while (next_line()) {
    std::istringstream ls(line);
    long long r = 0, c = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> r >> c >> re >> im)) fail("entry: expected <row> <col> <re> <im>");
    std::string rest;
    if (ls >> rest) fail("entry: trailing text");
    if (r < 0 || c < 0 || r >= d || c >= d) fail("entry: index out of range");
    const long long pos = r * d + c;
    if (pos <= last) fail("entry: not in row-major order");
    last = pos;
    data(r, c) = Complex(re, im);
  }

  const auto verdict = validate_density(data, kLoadTolerance);
  if (!verdict.ok()) {
    const auto& v = verdict.violations.front();
    throw input_error(v.property + ": deviation " + format_double(v.deviation) + " exceeds " +
                      format_double(kLoadTolerance));
  }
  return {n, std::move(data)};
}

inline DensityMatrix load_density(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  return read_density(in);
}

inline void save_density(const std::filesystem::path& path, const DensityMatrix& rho) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path.string());
  write_density(out, rho);
}

}  // namespace disent
