#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "disent/separability.hpp"
#include "oracles.hpp"

using namespace disent;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

StructureFamily fam(int n, const char* s) { return StructureFamily::parse(n, s); }

/// Every proper bipartition of n parties, one side per pair.
std::vector<PartySubset> all_cuts(int n) { return detail::internal_cuts(n); }

}  // namespace

TEST(PartialTransposeTest, ProductStateTransposesOneFactor) {
  const auto a = sample_ginibre_density(1, 1);
  const auto b = sample_ginibre_density(1, 2);
  const Matrix expected = kron(a.data(), b.data().transpose());
  EXPECT_LT(max_abs(partial_transpose(tensor_product({a, b}), {1}) - expected), 1e-15);
}

TEST(PartialTransposeTest, IsAnInvolution) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rho = sample_ginibre_density(3, seed);
    const PartySubset s{0, 2};
    const Matrix once = partial_transpose(rho, s);
    EXPECT_LT(max_abs(partial_transpose(DensityMatrix(3, once), s) - rho.data()), 1e-14);
  }
}

TEST(PartialTransposeTest, ComplementGivesFullTranspose) {
  const auto rho = sample_ginibre_density(3, 9);
  const Matrix a = partial_transpose(rho, {1});
  const Matrix b = partial_transpose(rho, {0, 2});
  EXPECT_LT(max_abs(a.transpose() - b), 1e-15);
}

TEST(PartialTransposeTest, BellSpectrum) {
  Eigen::VectorXd eigs = hermitian_eigenvalues(partial_transpose(named_state("phi+", 2), {1}));
  std::sort(eigs.data(), eigs.data() + eigs.size());
  EXPECT_NEAR(eigs(0), -0.5, 1e-14);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(eigs(i), 0.5, 1e-14);
  EXPECT_THROW(partial_transpose(named_state("phi+", 2), {0, 1}), std::invalid_argument);
}

TEST(PptTest, KnownMinima) {
  EXPECT_NEAR(ppt_min_eigenvalue(named_state("phi+", 2), {0}), -0.5, 1e-12);
  EXPECT_NEAR(ppt_min_eigenvalue(named_state("ghz", 3), {0}), -0.5, 1e-12);
  EXPECT_NEAR(oracle::min_eig(partial_transpose(named_state("ghz", 3), {0})), -0.5, 1e-12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = tensor_product({sample_ginibre_density(1, seed), sample_ginibre_density(2, seed + 99)});
    EXPECT_GE(ppt_min_eigenvalue(p, {0}), -kPptTolerance);
  }
}

TEST(SampleTermTest, FullyProductIsPptOnEveryCut) {
  const auto family = fam(3, "0/1/2");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto term = sample_term(family, seed);
    ASSERT_EQ(term.block_states.size(), 3u);
    EXPECT_TRUE(validate_density(term.assembled, 1e-10).ok());
    for (const auto& cut : all_cuts(3)) EXPECT_GE(ppt_min_eigenvalue(term.assembled, cut), -kPptTolerance);
  }
}

TEST(SampleTermTest, EntangledBlockIsNpt) {
  const auto term = sample_term(fam(3, "0/12"), 7);
  ASSERT_EQ(term.block_states.size(), 2u);
  EXPECT_EQ(term.block_states[1].n_parties(), 2);
  EXPECT_LE(ppt_min_eigenvalue(partial_trace(term.assembled, {0}), {0}), kNptThreshold);
  // Cut A|BC stays PPT: the term is a product across it.
  EXPECT_GE(ppt_min_eigenvalue(term.assembled, {0}), -kPptTolerance);
}

TEST(SampleTermTest, ThreeQubitBlockIsNptOnEveryInternalCut) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto term = sample_term(fam(4, "0/123"), seed);
    const auto block = term.block_states[1];
    for (const auto& cut : all_cuts(3)) EXPECT_LE(ppt_min_eigenvalue(block, cut), kNptThreshold);
  }
}

TEST(SampleTermTest, DeterministicAndSeedSensitive) {
  const auto family = fam(4, "02/13");
  EXPECT_EQ(sample_term(family, 3).assembled.data(), sample_term(family, 3).assembled.data());
  EXPECT_NE(sample_term(family, 3).assembled.data(), sample_term(family, 4).assembled.data());
  EXPECT_THROW(sample_term(fam(9, "0/12345678"), 1), std::out_of_range);
}

TEST(SampleTermTest, BlocksLandOnTheirParties) {
  // Block {0,2} holds the entangled state: tracing party 1 leaves it intact.
  const auto term = sample_term(fam(3, "02/1"), 5);
  const auto reduced = partial_trace(term.assembled, {1});
  EXPECT_LT(max_abs(reduced.data() - term.block_states[0].data()), 1e-12);
}

TEST(MixtureTest, SingleComponentAveragesSamples) {
  const MixtureSpec spec({{1.0, fam(2, "0/1")}});
  const auto mix = sample_mixture(spec, 3, 11);
  EXPECT_TRUE(validate_density(mix, 1e-10).ok());
  EXPECT_GE(ppt_min_eigenvalue(mix, {0}), -kPptTolerance);
  EXPECT_EQ(mix.data(), sample_mixture(spec, 3, 11).data());
}

TEST(MixtureTest, SeparableTwoQubitMixturesArePpt) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto mix = sample_mixture(MixtureSpec({{1.0, fam(2, "0/1")}}), 5, seed);
    EXPECT_GE(ppt_min_eigenvalue(mix, {0}), -kPptTolerance) << seed;
  }
}

TEST(MixtureTest, SpecValidation) {
  EXPECT_THROW(MixtureSpec({}), std::invalid_argument);
  EXPECT_THROW(MixtureSpec({{0.5, fam(3, "0/12")}}), std::invalid_argument);
  EXPECT_THROW(MixtureSpec({{0.0, fam(3, "0/12")}, {1.0, fam(3, "1/02")}}), std::invalid_argument);
  EXPECT_THROW(MixtureSpec({{0.5, fam(3, "0/12")}, {0.5, fam(3, "12/0")}}), std::invalid_argument);
  EXPECT_THROW(MixtureSpec({{0.5, fam(3, "0/12")}, {0.5, fam(2, "0/1")}}), std::invalid_argument);
  EXPECT_NO_THROW(MixtureSpec({{0.25, fam(3, "0/12")}, {0.75, fam(3, "1/02")}}));
  EXPECT_THROW(sample_mixture(MixtureSpec({{1.0, fam(2, "0/1")}}), 0, 1), std::invalid_argument);
}

TEST(BellMixtureTest, ResolvesToFullyProduct) {
  const auto id = bell_mixture_identity();
  EXPECT_LE(id.max_abs_deviation, 1e-12);
  EXPECT_LT(max_abs(id.product.data() - Matrix::Identity(8, 8) / 8.0), 1e-15);
  for (double v : id.component_min_pt) EXPECT_NEAR(v, -0.5, 1e-12);
}

TEST(WitnessTest, NoViolationsOnDefaultFamilies) {
  const auto r = verify_eq6(100, 1);
  EXPECT_EQ(r.trials, 100);
  EXPECT_EQ(r.rhs_violations, 0);
  EXPECT_EQ(r.lhs_violations, 0);
  EXPECT_GE(r.rhs_min_pt, -kReducedPptTolerance);
  EXPECT_LE(r.lhs_max_pt, kNptThreshold);
}

TEST(WitnessTest, ProductLhsIsCountedAsViolation) {
  const auto r = verify_eq6(1, 1, fam(3, "0/1/2"));
  EXPECT_EQ(r.lhs_violations, 1);
  EXPECT_EQ(r.violations(), 1);
  EXPECT_THROW(verify_eq6(0, 1), std::invalid_argument);
  EXPECT_THROW(verify_eq6(1, 1, fam(4, "0/123")), std::invalid_argument);
}

TEST(WitnessTest, Deterministic) {
  const auto a = verify_eq6(10, 42);
  const auto b = verify_eq6(10, 42);
  EXPECT_EQ(a.rhs_min_pt, b.rhs_min_pt);
  EXPECT_EQ(a.lhs_max_pt, b.lhs_max_pt);
}
