#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the routine it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// All partitions of {0..n-1} by recursive block insertion, each rendered as
/// its canonical restricted-growth string.
inline std::set<std::string> brute_force_partitions(int n) {
  std::set<std::string> out;
  std::vector<std::vector<int>> blocks;
  std::function<void(int)> place = [&](int element) {
    if (element == n) {
      std::string rgs(static_cast<std::size_t>(n), '?');
      // Blocks are created in order of their smallest element, so block
      // index order is first-appearance order.
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (int p : blocks[b]) rgs[static_cast<std::size_t>(p)] = static_cast<char>('0' + b);
      }
      out.insert(rgs);
      return;
    }
    for (auto& block : blocks) {
      block.push_back(element);
      place(element + 1);
      block.pop_back();
    }
    blocks.push_back({element});
    place(element + 1);
    blocks.pop_back();
  };
  place(0);
  return out;
}

/// Bell numbers from B(n+1) = sum_k C(n,k) B(k), in 64-bit arithmetic.
inline std::vector<std::uint64_t> bell_by_binomial(int n_max) {
  std::vector<std::uint64_t> bell{1};
  for (int n = 0; n < n_max; ++n) {
    std::uint64_t next = 0;
    std::uint64_t binom = 1;
    for (int k = 0; k <= n; ++k) {
      next += binom * bell[static_cast<std::size_t>(k)];
      binom = binom * static_cast<std::uint64_t>(n - k) / static_cast<std::uint64_t>(k + 1);
    }
    bell.push_back(next);
  }
  return bell;
}

inline Eigen::Vector2cd bloch_ket(double theta, double phi) {
  return {std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)};
}

/// Smallest eigenvalue of the Hermitian part of m, via Eigen directly.
inline double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// min <a,b|M|a,b> over product qubit pairs: party 0 on a Bloch-angle grid of
/// `step_deg` resolution, party 1 solved exactly by a 2x2 eigensolve.
inline double product_grid_min_2q(const Matrix& m, double step_deg = 1.0) {
  const double step = step_deg * std::numbers::pi / 180.0;
  double best = INFINITY;
  for (double theta = 0.0; theta <= std::numbers::pi + 1e-12; theta += step) {
    for (double phi = 0.0; phi < 2 * std::numbers::pi - 1e-12; phi += step) {
      const Eigen::Vector2cd a = bloch_ket(theta, phi);
      Matrix v = Matrix::Zero(4, 2);
      v(0, 0) = a(0);
      v(1, 1) = a(0);
      v(2, 0) = a(1);
      v(3, 1) = a(1);
      best = std::min(best, min_eig(v.adjoint() * m * v));
      if (theta == 0.0) break;  // phi is irrelevant at the pole
    }
  }
  return best;
}

/// Three-qubit analogue: parties 0 and 1 on a grid, party 2 exact.
inline double product_grid_min_3q(const Matrix& m, double step_deg) {
  const double step = step_deg * std::numbers::pi / 180.0;
  std::vector<Eigen::Vector2cd> grid;
  for (double theta = 0.0; theta <= std::numbers::pi + 1e-12; theta += step) {
    for (double phi = 0.0; phi < 2 * std::numbers::pi - 1e-12; phi += step) {
      grid.push_back(bloch_ket(theta, phi));
      if (theta == 0.0) break;
    }
  }
  double best = INFINITY;
  for (const auto& a : grid) {
    for (const auto& b : grid) {
      Eigen::Vector4cd ab;
      ab << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
      Matrix v = Matrix::Zero(8, 2);
      for (int k = 0; k < 4; ++k) {
        v(2 * k, 0) = ab(k);
        v(2 * k + 1, 1) = ab(k);
      }
      best = std::min(best, min_eig(v.adjoint() * m * v));
    }
  }
  return best;
}

/// Tr[rho log rho] - Tr[rho log sigma] for full-rank sigma, from two plain
/// eigendecompositions.
inline double relative_entropy(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> er(rho);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  double out = 0.0;
  for (Eigen::Index i = 0; i < er.eigenvalues().size(); ++i) {
    const double p = er.eigenvalues()(i);
    if (p > 0.0) out += p * std::log(p);
  }
  const Eigen::VectorXd log_sigma = es.eigenvalues().array().log();
  const Matrix log_s = es.eigenvectors() * log_sigma.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return out - (rho * log_s).trace().real();
}

/// Central finite difference of t -> S(rho || sigma + t delta) at t = 0.
inline double directional_fd(const Matrix& rho, const Matrix& sigma, const Matrix& delta, double t = 1e-5) {
  return (relative_entropy(rho, sigma + t * delta) - relative_entropy(rho, sigma - t * delta)) / (2 * t);
}

/// min over |a> of the lowest eigenvalue of <a|M|a> on the remaining two
/// qubits, party 0 on a Bloch grid.
inline double first_party_grid_min_3q(const Matrix& m, double step_deg) {
  const double step = step_deg * std::numbers::pi / 180.0;
  double best = INFINITY;
  for (double theta = 0.0; theta <= std::numbers::pi + 1e-12; theta += step) {
    for (double phi = 0.0; phi < 2 * std::numbers::pi - 1e-12; phi += step) {
      const Eigen::Vector2cd a = bloch_ket(theta, phi);
      Matrix v = Matrix::Zero(8, 4);
      for (int k = 0; k < 4; ++k) {
        v(k, k) = a(0);
        v(4 + k, k) = a(1);
      }
      best = std::min(best, min_eig(v.adjoint() * m * v));
      if (theta == 0.0) break;
    }
  }
  return best;
}

}  // namespace oracle
