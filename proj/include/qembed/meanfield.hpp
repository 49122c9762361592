#pragma once

#include <vector>

#include "qembed/integrals.hpp"
#include "qembed/states.hpp"

namespace qembed {

struct ScfOptions {
  double damping = 0.5;          // weight of the new density per cycle
  double tolerance = 1e-9;       // max |D_new - D_old|
  int max_iterations = 500;
};

struct MeanFieldResult {
  SlaterDeterminant determinant;   // N x n occupied orbitals
  RMatrix orbitals;                // all N canonical orbitals, ascending energy
  std::vector<double> orbital_energies;
  RMatrix fock;
  RMatrix density;                 // D = C_occ C_occ^T
  double energy = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> energy_history;  // per cycle, energy of the damped density
  int electrons() const { return determinant.electrons(); }
};

/// Spin-orbital SCF from the core guess with fixed linear density damping.
/// Non-convergence is reported through `converged`, not thrown.
MeanFieldResult hartree_fock(const MolecularIntegrals& h, int electrons,
                             const ScfOptions& opts = {});

/// h + J[D] - K[D]. Throws InvalidArgument unless D is symmetric with
/// spectrum in [0, 1] (within 1e-8).
RMatrix fock_matrix(const MolecularIntegrals& h, const RMatrix& density);

/// E_core + tr(h D) + 1/2 tr(G[D] D).
double density_energy(const MolecularIntegrals& h, const RMatrix& density);

/// Ascending canonical eigenpairs of the symmetrized Fock matrix; the
/// first n columns are the aufbau occupation (ties by lowest index).
SymmetricEigen aufbau(const RMatrix& fock);

// Closed-shell formulas in spatial orbitals, for checking the spin-orbital
// code on spin-doubled models. `occupied` holds doubly occupied orbitals.

/// sum_c [2 (pq|cc) - (pc|qc)].
RMatrix restricted_core_potential(const MolecularIntegrals& spatial,
                                  const RMatrix& occupied);
/// E_core + sum_c 2 h_cc + sum_cc' [2 (cc|c'c') - (cc'|c'c)].
double restricted_core_energy(const MolecularIntegrals& spatial,
                              const RMatrix& occupied);

}  // namespace qembed
