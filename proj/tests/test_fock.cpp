#include <gtest/gtest.h>

#include <map>

#include "oracle.hpp"
#include "qembed/fock.hpp"
#include "qembed/model.hpp"

using namespace qembed;

TEST(Sector, TwoModesOneElectron) {
  const SectorBasis b(2, 1);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.state(0), 0b01u);
  EXPECT_EQ(b.state(1), 0b10u);
}

TEST(Sector, SizesAreBinomial) {
  EXPECT_EQ(SectorBasis(4, 2).size(), 6u);
  EXPECT_EQ(enumerate_sector(20, 10)->size(), 184756u);
  EXPECT_EQ(SectorBasis(5, 0).size(), 1u);
  EXPECT_EQ(SectorBasis(5, 5).size(), 1u);
}

TEST(Sector, RankingInvertsEnumeration) {
  const SectorBasis b(12, 5);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i > 0) EXPECT_LT(b.state(i - 1), b.state(i));
    EXPECT_EQ(std::popcount(b.state(i)), 5);
    EXPECT_EQ(b.index_of(b.state(i)), i);
  }
  EXPECT_FALSE(b.find(0b111).has_value());
}

TEST(Sector, CapIsEnforced) {
  EXPECT_THROW(enumerate_sector(30, 15, 1000), SectorTooLarge);
  try {
    enumerate_sector(30, 15, 1000);
  } catch (const SectorTooLarge& e) {
    EXPECT_EQ(e.dimension(), binomial(30, 15));
    EXPECT_EQ(e.cap(), 1000u);
  }
  EXPECT_THROW(SectorBasis(64, 1), InvalidArgument);
  EXPECT_THROW(SectorBasis(4, 5), InvalidArgument);
}

TEST(ApplyTerm, CreationOnVacuum) {
  const int c[] = {0};
  const auto r = apply_term(c, {}, OccupationState{0b0000, 4});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->state.bits, 0b0001u);
  EXPECT_EQ(r->sign, 1);
}

TEST(ApplyTerm, CreationPastOccupiedMode) {
  const int c[] = {1};
  const auto r = apply_term(c, {}, OccupationState{0b0001, 4});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->state.bits, 0b0011u);
  EXPECT_EQ(r->sign, -1);
}

TEST(ApplyTerm, AnnihilatingEmptyModeVanishes) {
  const int a[] = {0};
  EXPECT_FALSE(apply_term({}, a, OccupationState{0b0010, 4}));
}

TEST(ApplyTerm, RejectsBadIndices) {
  const int c[] = {4};
  EXPECT_THROW(apply_term(c, {}, OccupationState{0, 4}), InvalidArgument);
  const int rep[] = {1, 1};
  EXPECT_THROW(apply_term(rep, {}, OccupationState{0, 4}), InvalidArgument);
}

TEST(ApplyTerm, MatchesFullSpaceLadders) {
  const int n = 5;
  const oracle::Ladders l(n);
  for (std::uint64_t s = 0; s < 32; ++s)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        if (p == q) continue;
        const int c[] = {p};
        const int a[] = {q};
        const auto r = apply_term(c, a, OccupationState{s, n});
        const oracle::SpMat op = l.c[p] * l.a[q];
        Eigen::VectorXd e = Eigen::VectorXd::Zero(32);
        e[static_cast<Eigen::Index>(s)] = 1.0;
        const Eigen::VectorXd w = op * e;
        if (!r) {
          EXPECT_EQ(w.norm(), 0.0);
        } else {
          EXPECT_EQ(w[static_cast<Eigen::Index>(r->state.bits)], r->sign);
        }
      }
}

TEST(ApplyLadders, AnticommutationOnEveryState) {
  const int n = 4;
  for (std::uint64_t s = 0; s < 16; ++s)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        // a_p a+_q + a+_q a_p = delta_pq
        const Ladder x[] = {{p, false}, {q, true}};
        const Ladder y[] = {{q, true}, {p, false}};
        std::map<std::uint64_t, int> sum;
        if (auto r = apply_ladders(x, s)) sum[r->first] += r->second;
        if (auto r = apply_ladders(y, s)) sum[r->first] += r->second;
        for (auto [bits, v] : sum) {
          if (p == q)
            EXPECT_EQ(v, bits == s ? 1 : 0);
          else
            EXPECT_EQ(v, 0);
        }
        if (p == q) EXPECT_EQ(sum[s], 1);
      }
}

TEST(Hamiltonian, DiagonalOneBody) {
  MolecularIntegrals h(4);
  h.one_body().diagonal() << -1.0, -0.5, 0.3, 0.8;
  const SectorPtr b = enumerate_sector(4, 2);
  for (std::size_t i = 0; i < b->size(); ++i) {
    const WaveFunction psi = WaveFunction::basis_state(b, b->state(i));
    double e = 0.0;
    for (int p = 0; p < 4; ++p)
      if ((b->state(i) >> p) & 1U) e += h.one_body()(p, p);
    const WaveFunction hp = apply_hamiltonian(h, psi);
    EXPECT_NEAR((hp.coeffs - e * psi.coeffs).norm(), 0.0, 1e-14);
  }
}

TEST(Hamiltonian, CoreEnergyOnly) {
  MolecularIntegrals h(4);
  h.set_core_energy(5.0);
  SplitMix64 rng(3);
  const WaveFunction psi = WaveFunction::random(enumerate_sector(4, 2), rng);
  EXPECT_NEAR((apply_hamiltonian(h, psi).coeffs - 5.0 * psi.coeffs).norm(), 0.0, 1e-14);
}

class HamiltonianOracle : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(HamiltonianOracle, MatchesFullSpaceMatrix) {
  const auto [n, electrons, seed] = GetParam();
  MolecularIntegrals h = random_integrals(n, static_cast<std::uint64_t>(seed));
  h.set_core_energy(0.25);
  const CMatrix dense = oracle::sector_matrix(h, electrons);
  const SectorPtr b = enumerate_sector(n, electrons);
  SplitMix64 rng(static_cast<std::uint64_t>(seed) + 100);
  for (int trial = 0; trial < 3; ++trial) {
    const WaveFunction psi = WaveFunction::random(b, rng);
    const CVector ref = dense * psi.coeffs;
    EXPECT_LT((apply_hamiltonian(h, psi).coeffs - ref).cwiseAbs().maxCoeff(), 1e-12);
    const SectorHamiltonian cached(h, b);
    EXPECT_TRUE(cached.cached());
    EXPECT_LT((cached.apply(psi.coeffs) - ref).cwiseAbs().maxCoeff(), 1e-12);
    const SectorHamiltonian matrix_free(h, b, 0);
    EXPECT_FALSE(matrix_free.cached());
    EXPECT_LT((matrix_free.apply(psi.coeffs) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Random, HamiltonianOracle,
                         ::testing::Values(std::make_tuple(4, 2, 1), std::make_tuple(5, 2, 2),
                                           std::make_tuple(6, 3, 3), std::make_tuple(7, 4, 4),
                                           std::make_tuple(8, 4, 5), std::make_tuple(6, 1, 6),
                                           std::make_tuple(6, 5, 7)));

TEST(Hamiltonian, ThreadCountDoesNotChangeResult) {
  const MolecularIntegrals h = random_integrals(10, 9);
  SplitMix64 rng(1);
  const SectorPtr b = enumerate_sector(10, 5);
  const WaveFunction psi = WaveFunction::random(b, rng);
  set_thread_count(1);
  const CVector one = SectorHamiltonian(h, b).apply(psi.coeffs);
  set_thread_count(4);
  const CVector four = SectorHamiltonian(h, b).apply(psi.coeffs);
  set_thread_count(1);
  EXPECT_EQ((one - four).cwiseAbs().maxCoeff(), 0.0);
}

TEST(WaveFunction, NormalizeAndRandom) {
  SplitMix64 rng(5);
  WaveFunction psi = WaveFunction::random(enumerate_sector(6, 3), rng);
  EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
  psi.coeffs *= 3.0;
  psi.normalize();
  EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
}
