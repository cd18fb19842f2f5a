#pragma once

// Relative entropy of entanglement over a union of term families.
//
// The feasible set is the convex hull of pure states that factor across the
// blocks of at least one chosen family. Frank-Wolfe needs only a linear
// minimization oracle over those extreme points, and its duality gap bounds
// the suboptimality of every iterate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "disent/qstate.hpp"
#include "disent/structures.hpp"

namespace disent {

inline constexpr double kSupportLeakTolerance = 1e-9;
inline constexpr int kMaxSolverParties = 4;
inline constexpr double kMaxLineStep = 1.0 - 1e-9;

struct SolverConfig {
  double gap_tolerance = 1e-3;
  int max_iterations = 2000;
  int oracle_restarts = 16;
  double oracle_sweep_tolerance = 1e-10;
  double line_search_tolerance = 1e-8;
  double eigen_floor = kDefaultEigenFloor;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gap_tolerance > 0.0) || !(oracle_sweep_tolerance > 0.0) ||
        !(line_search_tolerance > 0.0) || !(eigen_floor > 0.0)) {
      throw std::invalid_argument("SolverConfig: tolerances must be > 0");
    }
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    if (oracle_restarts < 1) throw std::invalid_argument("SolverConfig: oracle_restarts must be >= 1");
  }
};

/// S(rho || sigma) = Tr[rho log rho] - Tr[rho log sigma] in nats.
///
/// Returns +infinity when the weight of rho on the numerical null space of
/// sigma (eigenvalues <= eigen_floor) exceeds 1e-9; otherwise sigma's
/// eigenvalues are floored at eigen_floor.
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                               double eigen_floor = kDefaultEigenFloor) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("relative_entropy: dimension mismatch");
  const Eigen::VectorXd rho_eigs = hermitian_eigenvalues(rho.data());
  double neg_entropy = 0.0;
  for (double lambda : rho_eigs) {
    if (lambda > 0.0) neg_entropy += lambda * std::log(lambda);
  }
  const auto sig = hermitian_eigen(sigma.data());
  const Matrix rotated = sig.vectors.adjoint() * rho.data() * sig.vectors;
  double leak = 0.0;
  double cross = 0.0;
  for (Eigen::Index i = 0; i < sig.values.size(); ++i) {
    const double weight = rotated(i, i).real();
    if (sig.values(i) <= eigen_floor) leak += weight;
    cross += weight * std::log(std::max(sig.values(i), eigen_floor));
  }
  if (leak > kSupportLeakTolerance) return std::numeric_limits<double>::infinity();
  return neg_entropy - cross;
}

/// First divided difference of log: (log a - log b) / (a - b), 1/a at a == b.
inline double log_divided_difference(double a, double b) {
  if (a == b) return 1.0 / a;
  const double diff = a - b;
  if (std::abs(diff) <= 0.5 * std::max(a, b)) return std::log1p(diff / b) / diff;
  return (std::log(a) - std::log(b)) / diff;
}

/// M with d/dt S(rho || sigma + t Delta) at t = 0 equal to Tr[M Delta].
struct GradientMatrix {
  Matrix matrix;
};

inline GradientMatrix gradient_matrix(const DensityMatrix& rho, const DensityMatrix& sigma,
                                      double eigen_floor = kDefaultEigenFloor) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("gradient_matrix: dimension mismatch");
  if (!(eigen_floor > 0.0)) throw std::invalid_argument("gradient_matrix: eigen_floor must be > 0");
  const auto sig = hermitian_eigen(sigma.data());
  const Eigen::VectorXd lambda =
      sig.values.unaryExpr([eigen_floor](double x) { return std::max(x, eigen_floor); });
  Matrix m = sig.vectors.adjoint() * rho.data() * sig.vectors;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) *= -log_divided_difference(lambda(i), lambda(j));
  }
  m = sig.vectors * m * sig.vectors.adjoint();
  return {0.5 * (m + m.adjoint())};
}

// ---------------------------------------------------------------------------
// linear minimization oracle

struct LmoResult {
  PureState state;
  double value = 0.0;
};

namespace detail {

/// Index bookkeeping for pure states that factor across fixed blocks.
class BlockProductLayout {
 public:
  explicit BlockProductLayout(const StructureFamily& family)
      : n_(family.n()), blocks_(family.blocks()) {
    const std::size_t d = dim_of(n_);
    local_.assign(blocks_.size(), std::vector<Eigen::Index>(d));
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& parties = blocks_[b];
      const int k = static_cast<int>(parties.size());
      for (std::size_t idx = 0; idx < d; ++idx) {
        std::size_t local = 0;
        for (int j = 0; j < k; ++j) {
          if (idx & party_bit(n_, parties[static_cast<std::size_t>(j)])) local |= std::size_t{1} << (k - 1 - j);
        }
        local_[b][idx] = static_cast<Eigen::Index>(local);
      }
    }
  }

  std::size_t block_count() const noexcept { return blocks_.size(); }
  int block_size(std::size_t b) const { return static_cast<int>(blocks_[b].size()); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(dim_of(n_)); }

  Vector assemble(const std::vector<Vector>& factors) const {
    Vector out(dim());
    for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
      Complex amp = 1.0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) amp *= factors[b](local_[b][static_cast<std::size_t>(idx)]);
      out(idx) = amp;
    }
    return out;
  }

  /// Restriction of h to block b with every other factor held fixed:
  /// out(i, j) = <i, others| h |j, others>. `weights` is scratch of size dim().
  void effective_matrix(const Matrix& h, const std::vector<Vector>& factors, std::size_t b, Vector& weights,
                        Matrix& out) const {
    const auto kb = static_cast<Eigen::Index>(dim_of(block_size(b)));
    const auto& local_b = local_[b];
    for (Eigen::Index idx = 0; idx < dim(); ++idx) {
      Complex amp = 1.0;
      for (std::size_t o = 0; o < blocks_.size(); ++o) {
        if (o != b) amp *= factors[o](local_[o][static_cast<std::size_t>(idx)]);
      }
      weights(idx) = amp;
    }
    out.setZero(kb, kb);
    for (Eigen::Index c = 0; c < dim(); ++c) {
      const Complex wc = weights(c);
      const Eigen::Index j = local_b[static_cast<std::size_t>(c)];
      for (Eigen::Index r = 0; r < dim(); ++r) {
        out(local_b[static_cast<std::size_t>(r)], j) += std::conj(weights(r)) * h(r, c) * wc;
      }
    }
  }

 private:
  int n_;
  std::vector<SetPartition::Block> blocks_;
  std::vector<std::vector<Eigen::Index>> local_;
};

inline constexpr int kMaxOracleSweeps = 1000;

/// Lowest eigenpair of a 2x2 Hermitian matrix in closed form.
inline std::pair<double, Vector> lowest_eigenpair_2x2(const Matrix& h) {
  const double a = h(0, 0).real();
  const double c = h(1, 1).real();
  const Complex b = h(0, 1);
  const double half_diff = 0.5 * (a - c);
  const double lambda = 0.5 * (a + c) - std::hypot(half_diff, std::abs(b));
  // Two null vectors of H - lambda; keep the better conditioned one.
  Vector u(2), w(2);
  u << b, Complex(lambda - a, 0.0);
  w << Complex(lambda - c, 0.0), std::conj(b);
  Vector& v = u.squaredNorm() >= w.squaredNorm() ? u : w;
  const double norm = v.norm();
  if (!(norm > 1e-300)) {
    v << 1.0, 0.0;
  } else {
    v /= norm;
  }
  return {lambda, v};
}

}  // namespace detail

/// Approximately minimizes <phi|M|phi> over pure states that factor across
/// the family's blocks, by block-coordinate descent from `restarts` random
/// starts. The returned value is recomputed densely for the returned state.
inline LmoResult lmo_product_state(const GradientMatrix& m, const StructureFamily& family, int restarts,
                                   double sweep_tolerance, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(detail::dim_of(family.n()));
  if (m.matrix.rows() != d || m.matrix.cols() != d) {
    throw std::invalid_argument("lmo_product_state: family does not match matrix dimension");
  }
  if (restarts < 1) throw std::invalid_argument("lmo_product_state: restarts must be >= 1");
  const detail::BlockProductLayout layout(family);
  const Matrix h = 0.5 * (m.matrix + m.matrix.adjoint());

  Vector weights(d);
  Matrix effective;
  std::optional<LmoResult> best;
  for (int r = 0; r < restarts; ++r) {
    std::vector<Vector> factors;
    for (std::size_t b = 0; b < layout.block_count(); ++b) {
      const auto key = derive_seed(seed, {static_cast<std::uint64_t>(r), b});
      factors.push_back(sample_haar_pure(layout.block_size(b), key).amplitudes());
    }
    double value = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < detail::kMaxOracleSweeps; ++sweep) {
      double after = value;
      for (std::size_t b = 0; b < layout.block_count(); ++b) {
        layout.effective_matrix(h, factors, b, weights, effective);
        if (effective.rows() == 2) {
          auto [lambda, vec] = detail::lowest_eigenpair_2x2(effective);
          factors[b] = std::move(vec);
          after = lambda;
        } else {
          const auto eig = hermitian_eigen(effective);
          factors[b] = eig.vectors.col(0).normalized();
          after = eig.values(0);
        }
      }
      const bool done = value - after < sweep_tolerance;
      value = after;
      if (done) break;
    }
    Vector phi = layout.assemble(factors);
    phi.normalize();
    const double exact = phi.dot(h * phi).real();
    if (!best || exact < best->value) best = LmoResult{PureState(family.n(), std::move(phi)), exact};
  }
  return *best;
}

// ---------------------------------------------------------------------------
// line search and Frank-Wolfe

/// argmin over gamma in [0, 1 - 1e-9] of S(rho || (1 - gamma) sigma + gamma vertex)
/// by ternary search to width <= tolerance. Flat regions resolve to the
/// smallest gamma.
inline double line_search(const DensityMatrix& rho, const DensityMatrix& sigma, const DensityMatrix& vertex,
                          double tolerance, double eigen_floor = kDefaultEigenFloor) {
  if (rho.dim() != sigma.dim() || rho.dim() != vertex.dim()) {
    throw std::invalid_argument("line_search: dimension mismatch");
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("line_search: tolerance must be > 0");
  const int n = rho.n_parties();
  auto g = [&](double gamma) {
    return relative_entropy(rho, DensityMatrix(n, (1.0 - gamma) * sigma.data() + gamma * vertex.data()),
                            eigen_floor);
  };
  double lo = 0.0;
  double hi = kMaxLineStep;
  while (hi - lo > tolerance) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (g(m1) <= g(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return g(lo) < g(0.0) ? lo : 0.0;
}

struct SupportEntry {
  double weight = 0.0;
  PureState state;
  std::size_t family_index = 0;  // a family across whose blocks `state` factors
};

struct SolverReport {
  double value = 0.0;  // nats
  double final_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<SupportEntry> support;
  std::vector<StructureFamily> family_set;
  std::vector<double> objective_history;  // S at sigma_0, sigma_1, ...
  double wall_time = 0.0;                 // seconds; excluded from determinism checks

  /// Largest single-step increase of the objective (<= 0 for monotone runs).
  double max_objective_increase() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < objective_history.size(); ++k) {
      worst = std::max(worst, objective_history[k] - objective_history[k - 1]);
    }
    return worst;
  }
};

inline constexpr double kMonotoneSlack = 1e-10;

/// Minimizes S(rho || sigma) over the convex hull of block-product pure
/// states of `families`, starting from the maximally mixed state.
///
/// Non-convergence is reported through `converged` and `final_gap`, not
/// thrown. The duality gap is evaluated at the returned iterate.
inline SolverReport ree_frank_wolfe(const DensityMatrix& rho, const std::vector<StructureFamily>& families,
                                    const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  const int n = rho.n_parties();
  if (n > kMaxSolverParties) {
    throw std::out_of_range("ree_frank_wolfe: at most " + std::to_string(kMaxSolverParties) + " parties");
  }
  if (families.empty()) throw std::invalid_argument("ree_frank_wolfe: no families");
  for (const auto& f : families) {
    if (f.n() != n) throw std::invalid_argument("ree_frank_wolfe: family " + f.to_string() + " has wrong party count");
  }

  const auto d = rho.dim();
  Matrix sigma = Matrix::Identity(d, d) / static_cast<double>(d);
  double residual_weight = 1.0;  // weight still on the initial I/d
  std::vector<SupportEntry> vertices;

  SolverReport report;
  report.family_set = families;
  double objective = relative_entropy(rho, DensityMatrix(n, sigma), config.eigen_floor);
  report.objective_history.push_back(objective);

  for (int it = 0;; ++it) {
    const DensityMatrix current(n, sigma);
    const auto grad = gradient_matrix(rho, current, config.eigen_floor);

    std::optional<LmoResult> vertex;
    std::size_t vertex_family = 0;
    for (std::size_t f = 0; f < families.size(); ++f) {
      auto candidate = lmo_product_state(grad, families[f], config.oracle_restarts,
                                         config.oracle_sweep_tolerance,
                                         derive_seed(config.seed, {static_cast<std::uint64_t>(it), f}));
      if (!vertex || candidate.value < vertex->value) {
        vertex = std::move(candidate);
        vertex_family = f;
      }
    }
    const double gap = (grad.matrix.cwiseProduct(sigma.transpose())).sum().real() - vertex->value;
    report.final_gap = gap;
    report.iterations = it;
    if (gap <= config.gap_tolerance) {
      report.converged = true;
      break;
    }
    if (it == config.max_iterations) break;

    const DensityMatrix vertex_rho = DensityMatrix::from_pure(vertex->state);
    const double gamma = line_search(rho, current, vertex_rho, config.line_search_tolerance, config.eigen_floor);
    if (gamma > 0.0) {
      sigma = (1.0 - gamma) * sigma + gamma * vertex_rho.data();
      sigma = 0.5 * (sigma + sigma.adjoint());
      residual_weight *= 1.0 - gamma;
      for (auto& v : vertices) v.weight *= 1.0 - gamma;
      auto same = std::find_if(vertices.begin(), vertices.end(), [&](const SupportEntry& v) {
        return std::norm(v.state.amplitudes().dot(vertex->state.amplitudes())) > 1.0 - 1e-12;
      });
      if (same != vertices.end()) {
        same->weight += gamma;
      } else {
        vertices.push_back({gamma, vertex->state, vertex_family});
      }
    }
    const double next = relative_entropy(rho, DensityMatrix(n, sigma), config.eigen_floor);
    if (next > objective + kMonotoneSlack) {
      throw numeric_error("ree_frank_wolfe: objective increased from " + std::to_string(objective) + " to " +
                          std::to_string(next));
    }
    objective = next;
    report.objective_history.push_back(objective);
  }

  report.value = objective;
  // I/d is the uniform mixture of computational basis states, which factor
  // across every family.
  if (residual_weight > 0.0) {
    for (Eigen::Index i = 0; i < d; ++i) {
      Vector e = Vector::Zero(d);
      e(i) = 1.0;
      report.support.push_back({residual_weight / static_cast<double>(d), PureState(n, std::move(e)), 0});
    }
  }
  for (auto& v : vertices) {
    if (v.weight > 0.0) report.support.push_back(std::move(v));
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// scaling benchmark

struct BenchSolverRow {
  double value = 0.0;
  double final_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;
};

struct BenchRow {
  int n = 0;
  BigInt canonical_count;
  std::optional<std::int64_t> paper_count;
  double enumeration_seconds = 0.0;
  std::optional<BenchSolverRow> solver;  // n <= 4 only

  bool mismatch() const { return paper_count && BigInt(*paper_count) != canonical_count; }
};

/// Per n: canonical term count, enumeration time and, for n <= 4, the solver
/// cost on GHZ(n) against the full family list.
inline std::vector<BenchRow> scaling_bench(const std::vector<int>& n_list, const SolverConfig& config) {
  for (int n : n_list) detail::require_range(n, 2, kMaxEnumerationParties, "scaling_bench");
  std::vector<BenchRow> rows;
  for (int n : n_list) {
    BenchRow row;
    row.n = n;
    row.canonical_count = count_disentangled_terms(n);
    row.paper_count = paper_reported_term_count(n);

    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t families = 0;
    for_each_set_partition(n, [&](const std::vector<int>& rgs) {
      families += std::any_of(rgs.begin(), rgs.end(), [](int a) { return a != 0; }) ? 1 : 0;
    });
    row.enumeration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (BigInt(families) != row.canonical_count) {
      throw numeric_error("scaling_bench: enumeration disagrees with the Bell count at n = " + std::to_string(n));
    }

    if (n <= kMaxSolverParties) {
      const auto report = ree_frank_wolfe(named_state("ghz", n), enumerate_disentangled_structures(n), config);
      row.solver = BenchSolverRow{report.value, report.final_gap, report.iterations, report.converged,
                                  report.wall_time};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace disent
