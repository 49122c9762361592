#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "qembed/analysis.hpp"
#include "qembed/impurity.hpp"
#include "qembed/solver.hpp"

using namespace qembed;

namespace {

ImpurityModel gapped(int n, int m, double band, std::uint64_t seed) {
  EpsilonSpec eps;
  eps.band = band;
  return build_impurity_model(n, m, eps, ImpuritySpec{}, seed);
}

ImpurityModel free_model(int n, int m, double band, std::uint64_t seed) {
  EpsilonSpec eps;
  eps.band = band;
  ImpuritySpec imp;
  imp.zero = true;
  return build_impurity_model(n, m, eps, imp, seed);
}

// Shipped instances rebuilt from their generator parameters.
ImpurityModel shipped_impurity8() {
  ImpurityModel m = gapped(8, 2, 0.0, 7);
  EXPECT_EQ(model_hash(m.integrals), model_hash(testing_support::shipped("impurity8").integrals));
  return m;
}

ImpurityModel shipped_gapped10() {
  ImpurityModel m = gapped(10, 2, 0.2, 11);
  EXPECT_EQ(model_hash(m.integrals),
            model_hash(testing_support::shipped("impurity10_gapped").integrals));
  return m;
}

std::vector<double> b_frame_spectrum(const ParticleHoleFrame& f) {
  const RMatrix d = f.transformed.dense(f.b_basis());
  EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(d, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

double cplx_unit_error(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(ParticleHole, SpectrumShiftsByNegativeEnergies) {
  for (const ImpurityModel& m : {shipped_impurity8(), gapped(7, 2, 0.1, 3)}) {
    const int n = m.n_modes() / 2;
    const ParticleHoleFrame f = particle_hole(m, n);
    const std::vector<double> a = dense_spectrum(m.integrals, n);
    const std::vector<double> b = b_frame_spectrum(f);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i] + f.energy_shift, 1e-10);
    for (double e : f.abs_epsilons) EXPECT_GE(e, 0.0);
  }
}

TEST(ParticleHole, AllPositiveIsIdentity) {
  EpsilonSpec eps;
  eps.values = {0.1, 0.3, 0.5, 0.9, 1.0};
  const ImpurityModel m = build_impurity_model(5, 1, eps, ImpuritySpec{}, 2);
  const ParticleHoleFrame f = particle_hole(m, 2);
  EXPECT_EQ(f.n_negative, 0);
  EXPECT_EQ(f.energy_shift, 0.0);
  EXPECT_EQ(f.holes(), 0u);
  const std::vector<double> a = dense_spectrum(m.integrals, 2);
  const std::vector<double> b = b_frame_spectrum(f);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(ParticleHole, FreeGroundStateIsBVacuum) {
  const ImpurityModel m = free_model(8, 2, 0.1, 5);
  const ParticleHoleFrame f = particle_hole(m, 4);
  const RMatrix d = f.transformed.dense(f.b_basis());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(d);
  EXPECT_NEAR(es.eigenvalues()[0], 0.0, 1e-12);
  // b_basis is ascending, so the vacuum pattern 0 is first.
  ASSERT_EQ(f.b_basis().front(), 0u);
  EXPECT_NEAR(std::abs(es.eigenvectors()(0, 0)), 1.0, 1e-10);
  const GroundStateResult g = ground_state(m.integrals, 4);
  EXPECT_NEAR(std::abs(overlap(determinant_to_wavefunction(f.reference), g.state)), 1.0, 1e-10);
  EXPECT_EQ(max_excitations(g.state, f), 0);
}

TEST(ParticleHole, RdmRelationAndEnergy) {
  const ImpurityModel m = shipped_gapped10();
  const ParticleHoleFrame f = particle_hole(m, 5);
  const GroundStateResult g = ground_state(m.integrals, 5);
  const FockVector v = to_particle_hole(g.state, f);
  EXPECT_NEAR(v.coeffs.norm(), 1.0, 1e-12);
  EXPECT_NEAR(expectation(f.transformed, v) + f.energy_shift, g.energy, 1e-10);

  const CMatrix direct = one_rdm(v);
  const CMatrix eig = one_rdm(to_eigenmodes(g.state, f)).gamma;
  const int h = f.n_negative;
  const int n = f.n_modes;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      cplx expected;
      if (j < h && k < h)
        expected = (j == k ? 1.0 : 0.0) - eig(k, j);
      else if (j >= h && k >= h)
        expected = eig(j, k);
      else
        continue;
      EXPECT_LT(std::abs(direct(j, k) - expected), 1e-12);
    }
  const CMatrix via = particle_hole_rdm(OneBodyRDM{eig}, h).gamma;
  for (int j = 0; j < h; ++j)
    for (int k = 0; k < h; ++k) EXPECT_LT(std::abs(via(j, k) - direct(j, k)), 1e-12);
  for (int j = h; j < n; ++j)
    for (int k = h; k < n; ++k) EXPECT_LT(std::abs(via(j, k) - direct(j, k)), 1e-12);
}

TEST(Truncation, NothingBelowThresholdIsUnchanged) {
  const ImpurityModel m = shipped_gapped10();
  const TruncationResult t = truncate_low_energy(m, 5, 1e-3);
  EXPECT_TRUE(t.dropped.empty());
  EXPECT_EQ(model_hash(t.model.integrals), model_hash(m.integrals));
  EXPECT_EQ(t.electrons, 5);
}

TEST(Truncation, FreeModelAccounting) {
  EpsilonSpec eps;
  eps.values = {-0.9, -0.4, -0.002, 0.001, 0.3, 0.8};
  ImpuritySpec imp;
  imp.zero = true;
  const ImpurityModel m = build_impurity_model(6, 1, eps, imp, 4);
  const TruncationResult t = truncate_low_energy(m, 3, 0.01, 1);
  ASSERT_EQ(t.dropped.size(), 2u);
  EXPECT_EQ(t.dropped_occupied, 1);
  EXPECT_EQ(t.electrons, 2);
  EXPECT_NEAR(t.model.integrals.core_energy(), -0.002, 1e-12);
  EXPECT_GE(t.model.omega, t.threshold);
  // Frozen energies live in E_core; the ground energy is unchanged.
  EXPECT_NEAR(ground_state(t.model.integrals, 2).energy, -0.9 - 0.4 - 0.002, 1e-10);
  EXPECT_NEAR(ground_state(m.integrals, 3).energy, -0.9 - 0.4 - 0.002, 1e-10);
}

TEST(Truncation, NearGaplessInstanceWithinPrecision) {
  EpsilonSpec eps;
  eps.values = {-0.95, -0.6, -0.3, -0.0005, 0.0008, 0.25, 0.5, 0.85};
  const ImpurityModel m = build_impurity_model(8, 2, eps, ImpuritySpec{}, 13);
  const double target = 0.05;
  const TruncationResult t = truncate_low_energy(m, 4, target);
  EXPECT_EQ(t.dropped.size(), 2u);
  t.model.validate();
  const double before = dense_spectrum(m.integrals, 4).front();
  const double after = dense_spectrum(t.model.integrals, t.electrons).front();
  EXPECT_LE(std::abs(before - after), target);
  EXPECT_THROW(truncate_low_energy(m, 4, 0.0), InvalidArgument);
}

TEST(SelectActive, FullSpaceFreezesNothing) {
  const ImpurityModel m = shipped_gapped10();
  const OneBodyRDM g = one_rdm(ground_state(m.integrals, 5).state);
  const ActiveSelection s = select_active(g, m, 5, 10);
  EXPECT_TRUE(s.i_minus.empty());
  EXPECT_TRUE(s.i_plus.empty());
  EXPECT_EQ(s.delta_bound, 0.0);
  EXPECT_LT(cplx_unit_error(s.basis), 1e-10);
}

TEST(SelectActive, FreeModelHasZeroBound) {
  const ImpurityModel m = free_model(10, 2, 0.2, 9);
  const OneBodyRDM g = one_rdm(ground_state(m.integrals, 5).state);
  for (int k = 4; k <= 10; ++k) {
    const ActiveSelection s = select_active(g, m, 5, k);
    EXPECT_NEAR(s.delta_bound, 0.0, 1e-9) << k;
    EXPECT_EQ(s.active_count, std::max(k, 10 - s.l_plus_dim - s.l_minus_dim));
  }
}

TEST(SelectActive, StructureOnGappedInstance) {
  const ImpurityModel m = shipped_gapped10();
  const OneBodyRDM g = one_rdm(ground_state(m.integrals, 5).state);
  for (FreezePolicy pol : {FreezePolicy::kAuto, FreezePolicy::kProof, FreezePolicy::kBalanced}) {
    for (int k = 4; k <= 10; ++k) {
      const ActiveSelection s = select_active(g, m, 5, k, pol);
      EXPECT_LT(cplx_unit_error(s.basis), 1e-10);
      EXPECT_EQ(s.active_count + s.i_minus.size() + s.i_plus.size(), 10u);
      for (int a : s.i_minus)
        EXPECT_EQ(std::count(s.i_plus.begin(), s.i_plus.end(), a), 0);
      // Frozen modes have no impurity component.
      for (int c : s.i_minus) EXPECT_LT(s.basis.col(c).head(2).norm(), 1e-10);
      for (int c : s.i_plus) EXPECT_LT(s.basis.col(c).head(2).norm(), 1e-10);
      double delta = 0.0;
      for (int c : s.i_minus) delta += std::sqrt(1.0 - g.occupation(s.basis.col(c)));
      for (int c : s.i_plus) delta += std::sqrt(std::max(0.0, g.occupation(s.basis.col(c))));
      EXPECT_NEAR(delta, s.delta_bound, 1e-7);
    }
  }
  const ActiveSelection s6 = select_active(g, m, 5, 6);
  EXPECT_EQ(s6.policy, FreezePolicy::kBalanced);
  EXPECT_EQ(select_active(g, m, 5, 8).policy, FreezePolicy::kProof);
}

TEST(SelectActive, DomainErrors) {
  const ImpurityModel m = free_model(6, 2, 0.2, 1);
  const OneBodyRDM g = one_rdm(ground_state(m.integrals, 3).state);
  EXPECT_THROW(select_active(g, m, 3, 7), InvalidArgument);
  EXPECT_THROW(select_active(g, m, 3, 3), InvalidArgument);
  EXPECT_THROW(select_active(OneBodyRDM{CMatrix::Zero(5, 5)}, m, 3, 4), DimensionMismatch);
}

TEST(Projection, EmptyFreezeSetsKeepState) {
  const ImpurityModel m = shipped_impurity8();
  const GroundStateResult g = ground_state(m.integrals, 4);
  const ActiveSelection s = select_active(one_rdm(g.state), m, 4, 8);
  const ProjectionResult p = project_excitations(g.state, s);
  EXPECT_NEAR(p.achieved_overlap, 1.0, 1e-10);
}

TEST(Projection, FreezingExactOccupationsIsLossless) {
  const ImpurityModel m = free_model(8, 2, 0.1, 2);
  const GroundStateResult g = ground_state(m.integrals, 4);
  const ActiveSelection s = select_active(one_rdm(g.state), m, 4, 4);
  EXPECT_FALSE(s.i_minus.empty());
  EXPECT_NEAR(project_excitations(g.state, s).achieved_overlap, 1.0, 1e-10);
}

TEST(Projection, LemmaHoldsOnEnsemble) {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const ImpurityModel m = gapped(10, 2, 0.2, seed);
    const GroundStateResult g = ground_state(m.integrals, 5);
    const OneBodyRDM gamma = one_rdm(g.state);
    for (int k : {4, 6, 8}) {
      const ActiveSelection s = select_active(gamma, m, 5, k);
      const ProjectionResult p = project_excitations(g.state, s);
      EXPECT_GE(p.achieved_overlap, 1.0 - s.delta_bound - 1e-12) << seed << " K=" << k;
      EXPECT_NEAR(p.state.norm(), 1.0, 1e-12);
      EXPECT_NEAR(projected_weight(g.state, s), p.achieved_overlap, 1e-10);
    }
  }
}

TEST(Theorem1, ReconstructionMatchesProjection) {
  const ImpurityModel m = shipped_gapped10();
  const GroundStateResult g = ground_state(m.integrals, 5);
  const OneBodyRDM gamma = one_rdm(g.state);
  for (int k = 4; k <= 10; ++k) {
    const ActiveSelection s = select_active(gamma, m, 5, k);
    const Theorem1State t = theorem1_state(g.state, s);
    EXPECT_EQ(t.phi.modes(), s.active_count);
    EXPECT_EQ(t.theta.electrons(), static_cast<int>(s.i_minus.size()));
    EXPECT_LT((t.reconstruct().coeffs - t.projected.coeffs).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(t.overlap, project_excitations(g.state, s).achieved_overlap, 1e-12);
    EXPECT_GE(t.overlap, 1.0 - s.delta_bound - 1e-12);
  }
}

TEST(Theorem1, FullSpaceReturnsState) {
  const ImpurityModel m = shipped_impurity8();
  const GroundStateResult g = ground_state(m.integrals, 4);
  const ActiveSelection s = select_active(one_rdm(g.state), m, 4, 8);
  const Theorem1State t = theorem1_state(g.state, s);
  EXPECT_EQ(t.theta.electrons(), 0);
  EXPECT_NEAR(t.overlap, 1.0, 1e-10);
  EXPECT_NEAR(std::abs(overlap(t.projected, g.state)), 1.0, 1e-10);
}

TEST(Theorem1, FreeModelIsExact) {
  const ImpurityModel m = free_model(10, 2, 0.2, 4);
  const GroundStateResult g = ground_state(m.integrals, 5);
  const ActiveSelection s = select_active(one_rdm(g.state), m, 5, 4);
  const Theorem1State t = theorem1_state(g.state, s);
  EXPECT_NEAR(t.overlap, 1.0, 1e-10);
  EXPECT_NEAR(std::abs(overlap(t.reconstruct(), g.state)), 1.0, 1e-10);
}

TEST(MixedOverlap, FullCapIsUniform) {
  const ImpurityModel m = shipped_impurity8();
  const ParticleHoleFrame f = particle_hole(m, 4);
  const GroundStateResult g = ground_state(m.integrals, 4);
  const MixedOverlap r = mixed_guiding_overlap(g.state, 8, f);
  EXPECT_NEAR(r.weight, 1.0, 1e-12);
  EXPECT_EQ(r.dim_v, binomial(8, 4));
  EXPECT_EQ(r.dim_v_fock, 256u);
  EXPECT_NEAR(r.overlap_with_tau, 1.0 / 70.0, 1e-14);
}

TEST(MixedOverlap, FreeModelWithNoExcitations) {
  const ImpurityModel m = free_model(8, 2, 0.1, 6);
  const ParticleHoleFrame f = particle_hole(m, 4);
  const MixedOverlap r = mixed_guiding_overlap(ground_state(m.integrals, 4).state, 0, f);
  EXPECT_EQ(r.dim_v, 1u);
  EXPECT_NEAR(r.overlap_with_tau, 1.0, 1e-10);
}

TEST(MixedOverlap, BoundsTheoremOneState) {
  const ImpurityModel m = shipped_gapped10();
  const ParticleHoleFrame f = particle_hole(m, 5);
  const GroundStateResult g = ground_state(m.integrals, 5);
  const OneBodyRDM gamma = one_rdm(g.state);
  for (int k = 4; k <= 10; ++k) {
    const Theorem1State t = theorem1_state(g.state, select_active(gamma, m, 5, k));
    const int exc = max_excitations(t.projected, f);
    const MixedOverlap r = mixed_guiding_overlap(g.state, exc, f);
    EXPECT_GE(r.overlap_with_tau, t.overlap * t.overlap / static_cast<double>(r.dim_v) - 1e-12);
    EXPECT_GE(r.overlap_fock, t.overlap * t.overlap / static_cast<double>(r.dim_v_fock) - 1e-12);
  }
  const MixedOverlap two = mixed_guiding_overlap(g.state, 2, f);
  EXPECT_LE(two.dim_v, two.dim_v_fock);
  EXPECT_THROW(mixed_guiding_overlap(g.state, -1, f), InvalidArgument);
}

TEST(PartialNumber, FreeModelBlocksAreIntegers) {
  const ImpurityModel m = free_model(10, 1, 0.5, 3);
  const PartialNumberStats s = partial_number_stats(one_rdm(ground_state(m.integrals, 5).state), m);
  EXPECT_EQ(s.block_size, static_cast<int>(std::ceil(14.0 * std::log(2.0 / m.omega))));
  for (const PartialNumberRow& r : s.rows)
    EXPECT_NEAR(r.block_sum, std::round(r.block_sum), 1e-10);
}

TEST(PartialNumber, BlockSumsNonincreasing) {
  // |eps| >= 0.95 with M = 1 gives Q = 11, so 12 modes span two blocks.
  EpsilonSpec eps;
  eps.values = {-1.0, -0.99, -0.98, -0.97, -0.96, -0.95, 0.95, 0.96, 0.97, 0.98, 0.99, 1.0};
  const ImpurityModel m = build_impurity_model(12, 1, eps, ImpuritySpec{}, 21);
  ImpurityModel mm = m;
  const ParticleHoleFrame f = particle_hole(m, 6);
  const GroundStateResult g = ground_state(m.integrals, 6);
  const OneBodyRDM gb = particle_hole_rdm(one_rdm(to_eigenmodes(g.state, f)), f.n_negative);
  const PartialNumberStats s = partial_number_stats(gb, m);
  ASSERT_GE(s.rows.size(), 2u);
  for (std::size_t i = 1; i < s.rows.size(); ++i)
    EXPECT_LE(s.rows[i].block_sum, s.rows[i - 1].block_sum + 1e-12);
  EXPECT_GT(s.fitted_c0, 0.0);
  mm.omega = 0.0;
  EXPECT_THROW(partial_number_stats(gb, mm), InvalidArgument);
}
