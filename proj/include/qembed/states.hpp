#pragma once

// Slater determinants, orbital rotations and composite states.
//
// A determinant with orbital columns x_1..x_n is a+(x_1) a+(x_2) ... a+(x_n)
// |vac> where a+(x) = sum_p x_p a+_p. Its amplitude on pattern S is the
// minor det(X[S, :]).
//
// Rotation convention: G(U) a+_p G(U)^dag = sum_q U_qp a+_q, so
// G(U) Phi_X = Phi_{UX}, G(U2) G(U1) = G(U2 U1) and the 1-RDM transforms as
// gamma -> conj(U) gamma U^T.

#include <vector>

#include "qembed/fock.hpp"

namespace qembed {

struct SlaterDeterminant {
  CMatrix orbitals;  // N x n, orthonormal columns

  SlaterDeterminant() = default;
  explicit SlaterDeterminant(CMatrix c) : orbitals(std::move(c)) {}
  static SlaterDeterminant from_real(const RMatrix& c) {
    return SlaterDeterminant(c.cast<cplx>());
  }
  /// Occupies the computational modes listed in `modes` (in that order).
  static SlaterDeterminant computational(int n_modes, const std::vector<int>& modes);

  int modes() const { return static_cast<int>(orbitals.rows()); }
  int electrons() const { return static_cast<int>(orbitals.cols()); }
  /// Throws InvalidArgument when columns are not orthonormal within tol.
  void validate(double tol = 1e-10) const;
  /// Projector X X^dag, i.e. the transpose of the 1-RDM.
  CMatrix projector() const { return orbitals * orbitals.adjoint(); }
};

WaveFunction determinant_to_wavefunction(const SlaterDeterminant& det,
                                         std::uint64_t cap = max_sector_dim());

/// <phi|psi>. Throws DimensionMismatch when the sectors differ.
cplx overlap(const WaveFunction& phi, const WaveFunction& psi);

/// Composite state: the creation polynomial of `phi` (a state on the local
/// modes 0..|A|-1, mapped to global modes A in ascending order) applied to
/// `chi`, a state on `n_modes` modes with no weight on A.
WaveFunction wedge(const WaveFunction& phi, const std::vector<int>& a_modes,
                   const WaveFunction& chi);

/// Same, with the right factor a determinant whose orbitals are supported
/// on `c_modes`. Throws on overlapping mode sets or leaking orbitals.
WaveFunction wedge(const WaveFunction& phi, const std::vector<int>& a_modes,
                   const SlaterDeterminant& theta,
                   const std::vector<int>& c_modes);

/// Induced many-body rotation G(U) psi via two-mode Givens kernels.
/// Throws InvalidArgument unless U is unitary within 1e-10.
WaveFunction rotate_orbitals(const WaveFunction& psi, const CMatrix& u);

/// Determinant path of the same map: orbitals -> U * orbitals.
SlaterDeterminant rotate_determinant(const SlaterDeterminant& det,
                                     const CMatrix& u);

struct SlaterTerm {
  cplx coefficient;
  std::uint64_t bits;
};

struct SumOfSlater {
  SectorPtr basis;
  std::vector<SlaterTerm> terms;  // descending |coefficient|, ties by bits
  bool renormalized = false;
  double retained_weight = 0.0;  // sum of |C_i|^2 before renormalizing

  WaveFunction to_wavefunction() const;
};

/// The L largest-magnitude amplitudes of psi, optionally renormalized.
SumOfSlater sum_of_slater(const WaveFunction& psi, std::size_t terms,
                          bool renormalize = true);

/// Indices of psi's amplitudes ordered by descending magnitude, ties broken
/// by ascending occupation pattern.
std::vector<std::size_t> amplitude_order(const WaveFunction& psi);

}  // namespace qembed
