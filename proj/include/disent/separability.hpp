#pragma once

// Sampling from term families and partial-transpose entanglement witnesses.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "disent/qstate.hpp"
#include "disent/structures.hpp"

namespace disent {

/// Minimum partial-transpose eigenvalue at or above which a cut counts as PPT.
inline constexpr double kPptTolerance = 1e-10;
/// Sampled entangled blocks must reach at most this PT eigenvalue on every cut.
inline constexpr double kNptThreshold = -1e-6;
inline constexpr int kMaxSamplingParties = 8;
inline constexpr int kRejectionBudget = 100;

/// Transposes the indices of `subset`. The subset must be proper.
inline Matrix partial_transpose(const DensityMatrix& rho, const PartySubset& subset) {
  const int n = rho.n_parties();
  subset.check_within(n);
  if (subset.empty() || static_cast<int>(subset.size()) == n) {
    throw std::invalid_argument("partial_transpose: subset must be nonempty and proper");
  }
  const std::size_t mask = subset.mask(n);
  const std::size_t d = detail::dim_of(n);
  const auto& a = rho.data();
  Matrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t rs = (r & ~mask) | (c & mask);
      const std::size_t cs = (c & ~mask) | (r & mask);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          a(static_cast<Eigen::Index>(rs), static_cast<Eigen::Index>(cs));
    }
  }
  return out;
}

inline double ppt_min_eigenvalue(const DensityMatrix& rho, const PartySubset& subset) {
  return hermitian_eigenvalues(partial_transpose(rho, subset)).minCoeff();
}

/// Convex weights over distinct term families of one party count.
class MixtureSpec {
 public:
  struct Component {
    double weight = 0.0;
    StructureFamily family;
  };

  explicit MixtureSpec(std::vector<Component> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("MixtureSpec: no components");
    const int n = components_.front().family.n();
    double total = 0.0;
    std::set<StructureFamily> seen;
    for (const auto& c : components_) {
      if (!(c.weight > 0.0 && c.weight <= 1.0)) {
        throw std::invalid_argument("MixtureSpec: weight " + std::to_string(c.weight) +
                                    " outside (0, 1]");
      }
      if (c.family.n() != n) throw std::invalid_argument("MixtureSpec: families differ in party count");
      if (!seen.insert(c.family).second) {
        throw std::invalid_argument("MixtureSpec: duplicate family " + c.family.to_string());
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("MixtureSpec: weights sum to " + std::to_string(total));
    }
  }

  const std::vector<Component>& components() const noexcept { return components_; }
  int n() const { return components_.front().family.n(); }

 private:
  std::vector<Component> components_;
};

/// One state drawn from a term family.
struct TermSample {
  StructureFamily family;
  std::vector<DensityMatrix> block_states;  // one per block, in block order
  DensityMatrix assembled;
};

namespace detail {

/// Proper bipartitions of k local parties, one representative per pair:
/// the side containing local party 0.
inline std::vector<PartySubset> internal_cuts(int k) {
  std::vector<PartySubset> cuts;
  const unsigned full = (1u << k) - 1u;
  for (unsigned m = 1; m < full; ++m) {
    if (!(m & 1u)) continue;
    std::vector<int> members;
    for (int j = 0; j < k; ++j) {
      if (m & (1u << j)) members.push_back(j);
    }
    cuts.emplace_back(std::move(members));
  }
  return cuts;
}

inline DensityMatrix sample_bloch_qubit(std::uint64_t key) {
  CounterRng rng(key);
  double x = rng.normal(), y = rng.normal(), z = rng.normal();
  const double len = std::sqrt(x * x + y * y + z * z);
  const double radius = std::cbrt(rng.uniform());
  if (len > 0.0) {
    x *= radius / len;
    y *= radius / len;
    z *= radius / len;
  }
  return qubit_from_bloch(x, y, z);
}

/// Haar pure state on k qubits that is NPT across every internal cut.
inline DensityMatrix sample_entangled_block(int k, std::uint64_t key) {
  const auto cuts = internal_cuts(k);
  for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
    auto rho = DensityMatrix::from_pure(
        sample_haar_pure(k, derive_seed(key, {static_cast<std::uint64_t>(attempt)})));
    const bool accepted = std::all_of(cuts.begin(), cuts.end(), [&](const PartySubset& cut) {
      return ppt_min_eigenvalue(rho, cut) <= kNptThreshold;
    });
    if (accepted) return rho;
  }
  throw sampling_error("sample_term: no NPT block state within " + std::to_string(kRejectionBudget) +
                       " attempts");
}

}  // namespace detail

/// Places block_states (in block order) onto the family's global labels.
inline DensityMatrix assemble_blocks(const StructureFamily& family,
                                     std::span<const DensityMatrix> block_states) {
  const auto blocks = family.blocks();
  if (blocks.size() != block_states.size()) {
    throw std::invalid_argument("assemble_blocks: one state per block required");
  }
  std::vector<int> order;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (block_states[b].n_parties() != static_cast<int>(blocks[b].size())) {
      throw std::invalid_argument("assemble_blocks: block state size mismatch");
    }
    order.insert(order.end(), blocks[b].begin(), blocks[b].end());
  }
  const auto product = tensor_product(block_states);
  return {family.n(), permute_parties(product.data(), family.n(), order)};
}

/// Singletons get Bloch-ball-uniform qubit states; larger blocks get Haar
/// pure states resampled until NPT across every internal cut.
inline TermSample sample_term(const StructureFamily& family, std::uint64_t seed) {
  if (family.n() > kMaxSamplingParties) {
    throw std::out_of_range("sample_term: at most " + std::to_string(kMaxSamplingParties) +
                            " parties");
  }
  const auto blocks = family.blocks();
  std::vector<DensityMatrix> states;
  states.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto key = derive_seed(seed, {0x5445u /* "TE" */, b});
    const int k = static_cast<int>(blocks[b].size());
    states.push_back(k == 1 ? detail::sample_bloch_qubit(key) : detail::sample_entangled_block(k, key));
  }
  auto assembled = assemble_blocks(family, states);
  return {family, std::move(states), std::move(assembled)};
}

/// Sum over components of weight times the average of samples_per_family
/// independent term samples.
inline DensityMatrix sample_mixture(const MixtureSpec& spec, int samples_per_family, std::uint64_t seed) {
  if (samples_per_family < 1) throw std::invalid_argument("sample_mixture: samples_per_family must be >= 1");
  const int n = spec.n();
  if (n > kMaxSamplingParties) {
    throw std::out_of_range("sample_mixture: at most " + std::to_string(kMaxSamplingParties) + " parties");
  }
  const auto d = static_cast<Eigen::Index>(detail::dim_of(n));
  Matrix acc = Matrix::Zero(d, d);
  const auto& comps = spec.components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    Matrix avg = Matrix::Zero(d, d);
    for (int s = 0; s < samples_per_family; ++s) {
      avg += sample_term(comps[c].family, derive_seed(seed, {c, static_cast<std::uint64_t>(s)})).assembled.data();
    }
    acc += comps[c].weight / samples_per_family * avg;
  }
  return {n, std::move(acc)};
}

// ---------------------------------------------------------------------------
// irreducibility checks on the tripartite form

struct BellMixtureIdentity {
  DensityMatrix mixture;  // I/2 (x) (1/4) sum of the four Bell projectors on BC
  DensityMatrix product;  // I/2 (x) I/2 (x) I/2
  double max_abs_deviation = 0.0;
  std::array<double, 4> component_min_pt{};  // per Bell state, cut B|C
};

/// An equal mixture of rho_A (x) Bell_BC terms that is exactly the fully
/// product state: the four Bell projectors resolve the two-qubit identity.
inline BellMixtureIdentity bell_mixture_identity() {
  const auto half = DensityMatrix::maximally_mixed(1);
  const std::array<const char*, 4> names{"phi+", "phi-", "psi+", "psi-"};
  Matrix bc = Matrix::Zero(4, 4);
  std::array<double, 4> min_pt{};
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto bell = named_state(names[k], 2);
    bc += 0.25 * bell.data();
    min_pt[k] = ppt_min_eigenvalue(bell, PartySubset{1});
  }
  auto mixture = tensor_product({half, DensityMatrix(2, bc)});
  auto product = tensor_product({half, half, half});
  const double dev = (mixture.data() - product.data()).cwiseAbs().maxCoeff();
  return {std::move(mixture), std::move(product), dev, min_pt};
}

struct Eq6Trials {
  int trials = 0;
  int rhs_violations = 0;
  int lhs_violations = 0;
  double rhs_min_pt = std::numeric_limits<double>::infinity();
  double lhs_max_pt = -std::numeric_limits<double>::infinity();

  int violations() const noexcept { return rhs_violations + lhs_violations; }
};

inline constexpr double kReducedPptTolerance = 1e-9;
inline constexpr int kEq6SamplesPerFamily = 2;

/// BC-reduction witness for tripartite states.
///
/// Mixtures over {0}{1}{2}, {1}{02}, {2}{01} reduce to separable BC states
/// (PT min eigenvalue >= -1e-9), while rho_A (x) Phi_BC samples reduce to NPT
/// states (<= -1e-6). lhs_family defaults to {0}{12}; violations are counted.
inline Eq6Trials verify_eq6(int trials, std::uint64_t seed,
                            std::optional<StructureFamily> lhs_family = std::nullopt) {
  if (trials < 1) throw std::invalid_argument("verify_eq6: trials must be >= 1");
  const StructureFamily lhs = lhs_family.value_or(StructureFamily::parse(3, "0/12"));
  if (lhs.n() != 3) throw std::invalid_argument("verify_eq6: LHS family must be tripartite");
  const std::array<StructureFamily, 3> rhs{StructureFamily::parse(3, "0/1/2"),
                                           StructureFamily::parse(3, "1/02"),
                                           StructureFamily::parse(3, "2/01")};
  const PartySubset party_a{0};
  const PartySubset cut_b{0};  // party B after relabeling the BC pair

  Eq6Trials report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const auto tu = static_cast<std::uint64_t>(t);
    CounterRng weights_rng(derive_seed(seed, {1, tu}));
    std::array<double, 3> w{};
    double total = 0.0;
    for (auto& x : w) {
      x = std::max(-std::log(weights_rng.uniform_open()), 1e-300);
      total += x;
    }
    std::vector<MixtureSpec::Component> comps;
    double acc = 0.0;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      // Last weight absorbs rounding so the sum is exactly normalized.
      const double wk = k + 1 < rhs.size() ? w[k] / total : 1.0 - acc;
      acc += wk;
      comps.push_back({wk, rhs[k]});
    }
    const auto mix = sample_mixture(MixtureSpec(std::move(comps)), kEq6SamplesPerFamily,
                                    derive_seed(seed, {2, tu}));
    const double rhs_pt = ppt_min_eigenvalue(partial_trace(mix, party_a), cut_b);
    report.rhs_min_pt = std::min(report.rhs_min_pt, rhs_pt);
    if (rhs_pt < -kReducedPptTolerance) ++report.rhs_violations;

    const auto term = sample_term(lhs, derive_seed(seed, {3, tu}));
    const double lhs_pt = ppt_min_eigenvalue(partial_trace(term.assembled, party_a), cut_b);
    report.lhs_max_pt = std::max(report.lhs_max_pt, lhs_pt);
    if (lhs_pt > kNptThreshold) ++report.lhs_violations;
  }
  return report;
}

struct ClaimsReport {
  std::string eq5_description;
  double eq5_max_abs_deviation = 0.0;
  std::array<double, 4> eq5_component_min_pt{};
  Eq6Trials eq6;
  std::vector<CountReport> counting_comparison;

  bool count_mismatch() const {
    return std::any_of(counting_comparison.begin(), counting_comparison.end(),
                       [](const CountReport& r) { return r.mismatch(); });
  }
};

inline ClaimsReport verify_claims(int trials, std::uint64_t seed, int counting_n_max = 7) {
  ClaimsReport report;
  const auto bell = bell_mixture_identity();
  report.eq5_description =
      "I/2 (x) (1/4)(Phi+ + Phi- + Psi+ + Psi-) on parties A|BC versus I/2 (x) I/2 (x) I/2";
  report.eq5_max_abs_deviation = bell.max_abs_deviation;
  report.eq5_component_min_pt = bell.component_min_pt;
  report.eq6 = verify_eq6(trials, seed);
  report.counting_comparison = growth_report(counting_n_max);
  return report;
}

}  // namespace disent
