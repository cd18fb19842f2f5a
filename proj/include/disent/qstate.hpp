#pragma once

// Dense n-qubit states.
//
// Basis convention: party 0 is the most significant bit of a computational
// basis index, so |01> (party 0 in |0>, party 1 in |1>) is index 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disent/errors.hpp"
#include "disent/rng.hpp"

namespace disent {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxParties = 12;
inline constexpr double kDefaultEigenFloor = 1e-12;

namespace detail {

inline void require_parties(int n, int hi, const char* what) {
  if (n < 1 || n > hi) {
    throw std::out_of_range(std::string(what) + ": party count must be in [1, " +
                            std::to_string(hi) + "], got " + std::to_string(n));
  }
}

inline std::size_t dim_of(int n) { return std::size_t{1} << n; }

/// Bit of party p inside an n-party basis index.
inline std::size_t party_bit(int n, int p) { return std::size_t{1} << (n - 1 - p); }

inline int parties_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || n < 1) {
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not 2^n with n >= 1");
  }
  return n;
}

}  // namespace detail

/// Amplitude vector of an n-qubit pure state; unit norm within 1e-12.
class PureState {
 public:
  PureState(int n, Vector amplitudes) : n_(n), amplitudes_(std::move(amplitudes)) {
    detail::require_parties(n, kMaxParties, "PureState");
    if (static_cast<std::size_t>(amplitudes_.size()) != detail::dim_of(n)) {
      throw std::invalid_argument("PureState: amplitude count does not match 2^n");
    }
    if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-12) {
      throw std::invalid_argument("PureState: amplitudes are not normalized");
    }
  }

  /// Normalizes an arbitrary nonzero vector.
  static PureState normalized(int n, Vector v) {
    const double norm = v.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("PureState: zero vector");
    v /= norm;
    return {n, std::move(v)};
  }

  int n_parties() const noexcept { return n_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }

 private:
  int n_;
  Vector amplitudes_;
};

/// Square complex matrix of dimension 2^n intended as a density operator.
/// Construction checks the shape only; use validate_density for the physical
/// invariants.
class DensityMatrix {
 public:
  DensityMatrix(int n, Matrix data) : n_(n), data_(std::move(data)) {
    detail::require_parties(n, kMaxParties, "DensityMatrix");
    const auto d = static_cast<Eigen::Index>(detail::dim_of(n));
    if (data_.rows() != d || data_.cols() != d) {
      throw std::invalid_argument("DensityMatrix: expected " + std::to_string(d) + "x" +
                                  std::to_string(d) + " matrix");
    }
  }

  explicit DensityMatrix(const Matrix& data) : DensityMatrix(detail::parties_of_dim(data.rows()), data) {}

  static DensityMatrix from_pure(const PureState& psi) {
    const auto& v = psi.amplitudes();
    return {psi.n_parties(), v * v.adjoint()};
  }

  static DensityMatrix maximally_mixed(int n) {
    const auto d = static_cast<Eigen::Index>(detail::dim_of(n));
    return {n, Matrix::Identity(d, d) / static_cast<double>(d)};
  }

  int n_parties() const noexcept { return n_; }
  Eigen::Index dim() const noexcept { return data_.rows(); }
  const Matrix& data() const noexcept { return data_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return data_(r, c); }

 private:
  int n_;
  Matrix data_;
};

/// Sorted, duplicate-free party labels.
class PartySubset {
 public:
  PartySubset() = default;
  PartySubset(std::initializer_list<int> members) : PartySubset(std::vector<int>(members)) {}
  explicit PartySubset(std::vector<int> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
      throw std::invalid_argument("PartySubset: duplicate label");
    }
    if (!members_.empty() && members_.front() < 0) {
      throw std::invalid_argument("PartySubset: negative label");
    }
  }

  const std::vector<int>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(int p) const { return std::binary_search(members_.begin(), members_.end(), p); }

  void check_within(int n) const {
    if (!members_.empty() && members_.back() >= n) {
      throw std::invalid_argument("PartySubset: label " + std::to_string(members_.back()) +
                                  " outside 0.." + std::to_string(n - 1));
    }
  }

  /// Bit mask of the members inside an n-party basis index.
  std::size_t mask(int n) const {
    std::size_t m = 0;
    for (int p : members_) m |= detail::party_bit(n, p);
    return m;
  }

 private:
  std::vector<int> members_;
};

// ---------------------------------------------------------------------------
// composition and reduction

/// Kronecker product of two dense matrices.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Factors in list order; factor k's parties follow those of factors 0..k-1.
inline DensityMatrix tensor_product(std::span<const DensityMatrix> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor_product: empty factor list");
  int total = 0;
  for (const auto& f : factors) total += f.n_parties();
  if (total > kMaxParties) {
    throw std::out_of_range("tensor_product: " + std::to_string(total) + " parties exceeds " +
                            std::to_string(kMaxParties));
  }
  Matrix out = factors.front().data();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k].data());
  return {total, std::move(out)};
}

inline DensityMatrix tensor_product(std::initializer_list<DensityMatrix> factors) {
  return tensor_product(std::span<const DensityMatrix>(factors.begin(), factors.size()));
}

/// Relabels parties: current party k becomes party order[k].
inline Matrix permute_parties(const Matrix& m, int n, std::span<const int> order) {
  if (static_cast<int>(order.size()) != n) {
    throw std::invalid_argument("permute_parties: order length must equal party count");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int target : order) {
    if (target < 0 || target >= n || seen[static_cast<std::size_t>(target)]) {
      throw std::invalid_argument("permute_parties: order is not a permutation");
    }
    seen[static_cast<std::size_t>(target)] = true;
  }
  const std::size_t d = detail::dim_of(n);
  std::vector<Eigen::Index> map(d);
  for (std::size_t idx = 0; idx < d; ++idx) {
    std::size_t out = 0;
    for (int k = 0; k < n; ++k) {
      if (idx & detail::party_bit(n, k)) out |= detail::party_bit(n, order[static_cast<std::size_t>(k)]);
    }
    map[idx] = static_cast<Eigen::Index>(out);
  }
  Matrix result(m.rows(), m.cols());
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      result(map[r], map[c]) = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return result;
}

inline Vector permute_parties(const Vector& v, int n, std::span<const int> order) {
  const std::size_t d = detail::dim_of(n);
  Vector result(v.size());
  for (std::size_t idx = 0; idx < d; ++idx) {
    std::size_t out = 0;
    for (int k = 0; k < n; ++k) {
      if (idx & detail::party_bit(n, k)) out |= detail::party_bit(n, order[static_cast<std::size_t>(k)]);
    }
    result(static_cast<Eigen::Index>(out)) = v(static_cast<Eigen::Index>(idx));
  }
  return result;
}

/// Traces out `traced`; the remaining parties keep their relative order and
/// are relabeled 0..m-1.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const PartySubset& traced) {
  const int n = rho.n_parties();
  traced.check_within(n);
  if (static_cast<int>(traced.size()) == n) {
    throw std::invalid_argument("partial_trace: cannot trace out every party");
  }
  if (traced.empty()) return rho;

  std::vector<int> kept;
  for (int p = 0; p < n; ++p) {
    if (!traced.contains(p)) kept.push_back(p);
  }
  const int m = static_cast<int>(kept.size());
  const int t = n - m;

  // Scatter compact indices of the kept and traced parties into full indices.
  auto scatter = [n](std::size_t compact, const std::vector<int>& parties) {
    const int k = static_cast<int>(parties.size());
    std::size_t full = 0;
    for (int j = 0; j < k; ++j) {
      if (compact & (std::size_t{1} << (k - 1 - j))) full |= detail::party_bit(n, parties[static_cast<std::size_t>(j)]);
    }
    return full;
  };
  const std::size_t dk = detail::dim_of(m);
  const std::size_t dt = std::size_t{1} << t;
  std::vector<std::size_t> kept_full(dk), traced_full(dt);
  for (std::size_t i = 0; i < dk; ++i) kept_full[i] = scatter(i, kept);
  for (std::size_t i = 0; i < dt; ++i) traced_full[i] = scatter(i, traced.members());

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  const auto& a = rho.data();
  for (std::size_t r = 0; r < dk; ++r) {
    for (std::size_t c = 0; c < dk; ++c) {
      Complex sum = 0.0;
      for (std::size_t e = 0; e < dt; ++e) {
        sum += a(static_cast<Eigen::Index>(kept_full[r] | traced_full[e]),
                 static_cast<Eigen::Index>(kept_full[c] | traced_full[e]));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sum;
    }
  }
  return {m, std::move(out)};
}

// ---------------------------------------------------------------------------
// spectral helpers

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;
};

/// Eigendecomposition of the Hermitian part of m.
inline HermitianEigen hermitian_eigen(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw numeric_error("Hermitian eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw numeric_error("Hermitian eigendecomposition failed");
  return solver.eigenvalues();
}

struct Violation {
  std::string property;  // "shape", "hermitian", "trace" or "psd"
  double deviation = 0.0;
};

struct Validation {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Checks Hermiticity, unit trace and positivity against tol. Each violated
/// property is listed once with its measured deviation.
inline Validation validate_density(const Matrix& m, double tol) {
  if (tol < 0.0) throw std::invalid_argument("validate_density: tol must be >= 0");
  Validation verdict;
  if (m.rows() != m.cols() || m.rows() == 0) {
    verdict.violations.push_back({"shape", 0.0});
    return verdict;
  }
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol) verdict.violations.push_back({"hermitian", herm});
  const double trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
  if (trace_dev > tol) verdict.violations.push_back({"trace", trace_dev});
  const double min_eig = hermitian_eigenvalues(m).minCoeff();
  if (min_eig < -tol) verdict.violations.push_back({"psd", -min_eig});
  return verdict;
}

inline Validation validate_density(const DensityMatrix& rho, double tol) {
  return validate_density(rho.data(), tol);
}

/// U log(max(L, floor)) U^dagger for rho = U L U^dagger.
inline Matrix matrix_log_hermitian(const Matrix& rho, double eigen_floor = kDefaultEigenFloor) {
  if (!(eigen_floor > 0.0)) throw std::invalid_argument("matrix_log_hermitian: eigen_floor must be > 0");
  const auto eig = hermitian_eigen(rho);
  Eigen::VectorXd logs = eig.values.unaryExpr([eigen_floor](double x) { return std::log(std::max(x, eigen_floor)); });
  Matrix out = eig.vectors * logs.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (out + out.adjoint());
}

inline Matrix matrix_log_hermitian(const DensityMatrix& rho, double eigen_floor = kDefaultEigenFloor) {
  return matrix_log_hermitian(rho.data(), eigen_floor);
}

/// U exp(L) U^dagger for Hermitian h.
inline Matrix matrix_exp_hermitian(const Matrix& h) {
  const auto eig = hermitian_eigen(h);
  Eigen::VectorXd exps = eig.values.array().exp();
  return eig.vectors * exps.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

// ---------------------------------------------------------------------------
// fixtures and sampling

/// Normalized vector of 2^n independent complex Gaussians from the counter
/// stream keyed by seed.
inline PureState sample_haar_pure(int n, std::uint64_t seed) {
  detail::require_parties(n, kMaxParties, "sample_haar_pure");
  CounterRng rng(derive_seed(seed, {0x4841u /* "HA" */, static_cast<std::uint64_t>(n)}));
  Vector v(static_cast<Eigen::Index>(detail::dim_of(n)));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  return PureState::normalized(n, std::move(v));
}

/// Random full-rank mixed state: G G^dagger / Tr with G a complex Ginibre
/// matrix. Used for property tests and solver inputs.
inline DensityMatrix sample_ginibre_density(int n, std::uint64_t seed) {
  detail::require_parties(n, kMaxParties, "sample_ginibre_density");
  CounterRng rng(derive_seed(seed, {0x4749u /* "GI" */, static_cast<std::uint64_t>(n)}));
  const auto d = static_cast<Eigen::Index>(detail::dim_of(n));
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return {n, 0.5 * (rho + rho.adjoint())};
}

/// Textbook fixtures. Recognized names:
///   phi+ (alias bell), phi-, psi+, psi-   two-qubit Bell states, n = 2
///   ghz                                   (|0..0> + |1..1>)/sqrt(2), n >= 2
///   w                                     uniform single-excitation state, n >= 2
///   zero                                  |0..0>
///   mixed                                 I / 2^n
///   basis:<bits>                          computational basis product, n = bit count
inline DensityMatrix named_state(const std::string& name, int n) {
  detail::require_parties(n, kMaxParties, "named_state");
  const auto d = static_cast<Eigen::Index>(detail::dim_of(n));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vector v = Vector::Zero(d);

  auto bell = [&](int a, int b, double sign) {
    if (n != 2) throw std::invalid_argument("named_state: " + name + " requires n = 2");
    v(a) = inv_sqrt2;
    v(b) = sign * inv_sqrt2;
  };

  if (name == "phi+" || name == "bell") {
    bell(0, 3, 1.0);
  } else if (name == "phi-") {
    bell(0, 3, -1.0);
  } else if (name == "psi+") {
    bell(1, 2, 1.0);
  } else if (name == "psi-") {
    bell(1, 2, -1.0);
  } else if (name == "ghz") {
    if (n < 2) throw std::invalid_argument("named_state: ghz requires n >= 2");
    v(0) = inv_sqrt2;
    v(d - 1) = inv_sqrt2;
  } else if (name == "w") {
    if (n < 2) throw std::invalid_argument("named_state: w requires n >= 2");
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (int p = 0; p < n; ++p) v(static_cast<Eigen::Index>(detail::party_bit(n, p))) = amp;
  } else if (name == "zero") {
    v(0) = 1.0;
  } else if (name == "mixed") {
    return DensityMatrix::maximally_mixed(n);
  } else if (name.rfind("basis:", 0) == 0) {
    const std::string bits = name.substr(6);
    if (static_cast<int>(bits.size()) != n) {
      throw std::invalid_argument("named_state: " + name + " has " + std::to_string(bits.size()) +
                                  " bits but n = " + std::to_string(n));
    }
    std::size_t idx = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') throw std::invalid_argument("named_state: bad bit in " + name);
      idx = (idx << 1) | static_cast<std::size_t>(c - '0');
    }
    v(static_cast<Eigen::Index>(idx)) = 1.0;
  } else {
    throw std::invalid_argument("named_state: unknown state \"" + name + "\"");
  }
  return DensityMatrix::from_pure(PureState(n, std::move(v)));
}

/// Party count a named state implies, when the name fixes one.
inline std::optional<int> named_state_parties(const std::string& name) {
  if (name == "phi+" || name == "bell" || name == "phi-" || name == "psi+" || name == "psi-") return 2;
  if (name.rfind("basis:", 0) == 0) return static_cast<int>(name.size() - 6);
  return std::nullopt;
}

/// (I + r . sigma) / 2 for a Bloch vector r with |r| <= 1.
inline DensityMatrix qubit_from_bloch(double x, double y, double z) {
  Matrix m(2, 2);
  m << Complex(1.0 + z, 0.0), Complex(x, -y), Complex(x, y), Complex(1.0 - z, 0.0);
  return {1, 0.5 * m};
}

}  // namespace disent
