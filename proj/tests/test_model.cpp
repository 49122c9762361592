#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "oracle.hpp"
#include "qembed/meanfield.hpp"
#include "qembed/model.hpp"
#include "qembed/solver.hpp"
#include "qembed/states.hpp"

using namespace qembed;

TEST(Integrals, SetTwoBodyFillsAllImages) {
  MolecularIntegrals m(4);
  m.set_two_body(0, 1, 2, 3, 0.7);
  for (auto [p, q, r, s] : std::vector<std::array<int, 4>>{{0, 1, 2, 3}, {1, 0, 2, 3},
                                                           {0, 1, 3, 2}, {1, 0, 3, 2},
                                                           {2, 3, 0, 1}, {3, 2, 0, 1},
                                                           {2, 3, 1, 0}, {3, 2, 1, 0}})
    EXPECT_EQ(m.two_body(p, q, r, s), 0.7);
  EXPECT_EQ(m.two_body(0, 2, 1, 3), 0.0);
  EXPECT_EQ(m.symmetry_error(), 0.0);
  m.two_body_tensor()[m.index(0, 1, 2, 3)] = 0.8;
  EXPECT_THROW(m.validate(), InvalidArgument);
}

TEST(Integrals, TransformPreservesSpectrum) {
  const MolecularIntegrals h = random_integrals(6, 21);
  SplitMix64 rng(4);
  const RMatrix u = random_orthogonal(6, rng);
  const MolecularIntegrals t = h.transformed(u);
  EXPECT_LT(t.symmetry_error(), 1e-12);
  EXPECT_NEAR(oracle::ground_energy(t, 3), oracle::ground_energy(h, 3), 1e-10);
  const MolecularIntegrals id = h.transformed(RMatrix::Identity(6, 6));
  EXPECT_LT((id.one_body() - h.one_body()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Integrals, TransformMatchesExplicitSum) {
  const MolecularIntegrals h = random_integrals(4, 2);
  SplitMix64 rng(8);
  const RMatrix c = random_orthogonal(4, rng).leftCols(3);
  const MolecularIntegrals t = h.transformed(c);
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double v = 0.0;
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
              for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                  v += c(p, i) * c(q, j) * c(r, k) * c(s, l) * h.two_body(p, q, r, s);
          err = std::max(err, std::abs(v - t.two_body(i, j, k, l)));
        }
  EXPECT_LT(err, 1e-13);
}

TEST(Integrals, CoulombExchangeMatchesDefinition) {
  const MolecularIntegrals h = random_integrals(5, 3);
  SplitMix64 rng(2);
  const RMatrix c = random_orthogonal(5, rng).leftCols(2);
  const RMatrix d = c * c.transpose();
  const RMatrix g = h.coulomb_exchange(d);
  for (int p = 0; p < 5; ++p)
    for (int q = 0; q < 5; ++q) {
      double v = 0.0;
      for (int r = 0; r < 5; ++r)
        for (int s = 0; s < 5; ++s)
          v += (h.two_body(p, q, r, s) - h.two_body(p, r, s, q)) * d(r, s);
      EXPECT_NEAR(g(p, q), v, 1e-13);
    }
}

TEST(ImpurityModel, Invariants) {
  EpsilonSpec eps;
  eps.band = 0.2;
  const ImpurityModel m = build_impurity_model(10, 2, eps, ImpuritySpec{}, 5);
  m.validate();
  EXPECT_EQ(m.n_modes(), 10);
  EXPECT_EQ(m.negative_count(), 5);
  EXPECT_GE(m.omega, 0.2);
  double min_abs = 1.0;
  for (double e : m.epsilons) {
    EXPECT_GE(e, -1.0);
    EXPECT_LE(e, 1.0);
    if (e != 0.0) min_abs = std::min(min_abs, std::abs(e));
  }
  EXPECT_EQ(m.omega, min_abs);
  EXPECT_TRUE(std::is_sorted(m.epsilons.begin(), m.epsilons.end()));
  for (int p = 0; p < 10; ++p)
    for (int q = 0; q < 10; ++q)
      for (int r = 0; r < 10; ++r)
        for (int s = 0; s < 10; ++s)
          if (std::max({p, q, r, s}) >= 2) EXPECT_EQ(m.integrals.two_body(p, q, r, s), 0.0);
  // Free part is Q diag(eps) Q^T.
  const RMatrix q = m.free_orbitals;
  EXPECT_LT((q.transpose() * q - RMatrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-12);
  const RMatrix d = q.transpose() * m.integrals.one_body() * q;
  for (int j = 0; j < 10; ++j) EXPECT_NEAR(d(j, j), m.epsilons[static_cast<std::size_t>(j)], 1e-12);
}

TEST(ImpurityModel, FreeGroundStateIsNegativeModeDeterminant) {
  ImpuritySpec imp;
  imp.zero = true;
  const ImpurityModel m = build_impurity_model(8, 2, EpsilonSpec{}, imp, 3);
  const int n = m.negative_count();
  const GroundStateResult g = ground_state(m.integrals, n);
  const WaveFunction det =
      determinant_to_wavefunction(SlaterDeterminant::from_real(m.free_orbitals.leftCols(n)));
  EXPECT_NEAR(std::abs(overlap(det, g.state)), 1.0, 1e-10);
  double e = 0.0;
  for (int j = 0; j < n; ++j) e += m.epsilons[static_cast<std::size_t>(j)];
  EXPECT_NEAR(g.energy, e, 1e-10);
}

TEST(ImpurityModel, SeedSevenMatchesOracle) {
  const ImpurityModel m = build_impurity_model(8, 2, EpsilonSpec{}, ImpuritySpec{}, 7);
  EXPECT_NEAR(ground_state(m.integrals, 4).energy, oracle::ground_energy(m.integrals, 4), 1e-10);
}

TEST(ImpurityModel, SameSeedSameModel) {
  const ImpurityModel a = build_impurity_model(8, 2, EpsilonSpec{}, ImpuritySpec{}, 9);
  const ImpurityModel b = build_impurity_model(8, 2, EpsilonSpec{}, ImpuritySpec{}, 9);
  EXPECT_TRUE(a.integrals == b.integrals);
  EXPECT_EQ(model_hash(a.integrals), model_hash(b.integrals));
}

TEST(ImpurityModel, ExplicitDensityDensityInteraction) {
  // U a+_0 a+_1 a_1 a_0 = U n_0 n_1 in physicists' amplitudes.
  const double u = 0.8;
  ImpuritySpec imp;
  imp.amplitudes.assign(16, 0.0);
  imp.amplitudes[(0 * 2 + 1) * 4 + 1 * 2 + 0] = u;
  EpsilonSpec eps;
  eps.values = {-0.6, -0.3, 0.4, 0.9};
  const ImpurityModel m = build_impurity_model(4, 2, eps, imp, 1, Hybridization::kNone);
  MolecularIntegrals free = m.integrals;
  free.two_body_tensor().assign(free.two_body_tensor().size(), 0.0);
  const oracle::SpMat full = oracle::full_hamiltonian(m.integrals);
  const oracle::SpMat ref = oracle::full_hamiltonian(free) +
                            u * oracle::SpMat(oracle::ladder(4, 0, true) * oracle::ladder(4, 0, false) *
                                              oracle::ladder(4, 1, true) * oracle::ladder(4, 1, false));
  EXPECT_LT(RMatrix(full - ref).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(interaction_term_count(m.integrals), 1);
}

TEST(ImpurityModel, RejectsNonHermitianInteraction) {
  // Not Hermitian: a+_0 a+_2 a_2 a_1 without its conjugate.
  ImpuritySpec bad;
  bad.amplitudes.assign(81, 0.0);
  bad.amplitudes[(0 * 3 + 2) * 9 + 2 * 3 + 1] = 1.0;
  EXPECT_THROW(build_impurity_model(4, 3, EpsilonSpec{}, bad, 1), InvalidArgument);
}

TEST(ImpurityModel, DomainErrors) {
  EXPECT_THROW(build_impurity_model(4, 5, EpsilonSpec{}, ImpuritySpec{}, 1), InvalidArgument);
  EpsilonSpec eps;
  eps.values = {0.1, 2.0, 0.3, 0.4};
  EXPECT_THROW(build_impurity_model(4, 1, eps, ImpuritySpec{}, 1), InvalidArgument);
  EpsilonSpec band;
  band.band = 1.2;
  EXPECT_THROW(build_impurity_model(4, 1, band, ImpuritySpec{}, 1), InvalidArgument);
}

TEST(Oligomer, SingleCopyIsMonomer) {
  const MolecularIntegrals m = random_integrals(4, 1);
  EXPECT_TRUE(build_oligomer(m, 1, std::nullopt) == m);
}

TEST(Oligomer, UncoupledEnergyIsAdditive) {
  const MolecularIntegrals mono = testing_support::shipped("hubbard_dimer").integrals;
  const MolecularIntegrals dimer = build_oligomer(mono, 2, std::nullopt);
  EXPECT_NEAR(ground_state(dimer, 4).energy, 2.0 * ground_state(mono, 2).energy, 1e-10);
}

TEST(Oligomer, WeakCouplingLowersEnergy) {
  const MolecularIntegrals mono = testing_support::shipped("hubbard_dimer").integrals;
  const MolecularIntegrals coupled = build_oligomer(mono, 2, OligomerCoupling{std::nullopt, 0.05});
  const double e_free = 2.0 * oracle::ground_energy(mono, 2);
  const double e = oracle::ground_energy(coupled, 4);
  EXPECT_LT(e, e_free);
  EXPECT_NEAR(ground_state(coupled, 4).energy, e, 1e-10);
}

TEST(Hubbard, DimerEnergy) {
  // Two-site Hubbard at half filling: U/2 - sqrt(U^2/4 + 4 t^2).
  const MolecularIntegrals h = spin_double(hubbard_chain(2, 1.0, 2.0));
  EXPECT_NEAR(ground_state(h, 2).energy, 1.0 - std::sqrt(5.0), 1e-10);
}

TEST(IntegralFile, RoundTrip) {
  MolecularIntegrals m = random_integrals(6, 17);
  m.set_core_energy(-1.25);
  const IntegralFile f = parse_integrals(format_integrals(m, 3));
  EXPECT_TRUE(f.integrals == m);
  EXPECT_EQ(f.electrons, 3);
  EXPECT_EQ(f.duplicate_warnings, 0);

  const auto path = std::filesystem::temp_directory_path() / "qembed_roundtrip.ints";
  write_integrals(m, 3, path);
  EXPECT_TRUE(read_integrals(path).integrals == m);
  std::filesystem::remove(path);
}

TEST(IntegralFile, CoreEnergyOnly) {
  const IntegralFile f = parse_integrals("NORB=3 NELEC=1\n0 0 0 0 1.5\n");
  EXPECT_EQ(f.integrals.core_energy(), 1.5);
  EXPECT_EQ(f.integrals.one_body().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_FALSE(f.integrals.has_two_body());
}

TEST(IntegralFile, DuplicateLastWins) {
  const IntegralFile f = parse_integrals(
      "NORB=2 NELEC=1  # header\n"
      "1 2 0 0 0.5\n"
      "1 2 0 0 0.7\n"
      "1 1 2 2 0.1\n"
      "1 1 2 2 0.2\n"
      "2 2 1 1 0.2\n");
  EXPECT_EQ(f.duplicate_warnings, 2);
  EXPECT_EQ(f.integrals.one_body()(0, 1), 0.7);
  EXPECT_EQ(f.integrals.one_body()(1, 0), 0.7);
  EXPECT_EQ(f.integrals.two_body(1, 1, 0, 0), 0.2);
}

TEST(IntegralFile, InconsistentSymmetryImages) {
  EXPECT_THROW(parse_integrals("NORB=2 NELEC=1\n1 1 2 2 0.1\n2 2 1 1 0.3\n"), InvalidArgument);
  EXPECT_THROW(parse_integrals("NORB=2 NELEC=1\n1 2 0 0 0.1\n2 1 0 0 0.3\n"), InvalidArgument);
}

TEST(IntegralFile, ParseErrorsCarryLineNumbers) {
  try {
    parse_integrals("NORB=2 NELEC=1\n\n# comment\n1 2 x 0 0.1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  try {
    parse_integrals("NORB=2 NELEC=1\n3 1 0 0 0.1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_integrals("1 1 0 0 0.5\n"), ParseError);
  EXPECT_THROW(parse_integrals("NORB=2 NELEC=3\n"), ParseError);
  EXPECT_THROW(parse_integrals("NORB=2 NELEC=1\n1 1 0 0 0.5 extra\n"), ParseError);
}

TEST(IntegralFile, ShippedModelsAreValid) {
  for (const char* name : {"hubbard_dimer", "random6", "hubbard4", "impurity8", "impurity10_gapped"}) {
    const IntegralFile f = testing_support::shipped(name);
    EXPECT_LT(f.integrals.symmetry_error(), 1e-12) << name;
    EXPECT_EQ(model_hash(parse_integrals(format_integrals(f.integrals, f.electrons)).integrals),
              model_hash(f.integrals));
  }
}
