#pragma once

#include <vector>

#include "qembed/fock.hpp"
#include "qembed/integrals.hpp"

namespace qembed {

struct SolverOptions {
  double tolerance = 1e-9;          // on ||H psi - E psi||
  int max_iterations = 20000;       // total matrix-vector products
  int krylov_dim = 160;             // vectors kept between restarts
  std::uint64_t seed = 0x5eed;      // start vector
  bool check_degeneracy = true;
  double degeneracy_threshold = 1e-8;
  std::size_t memory_budget = std::size_t{1} << 30;  // Hamiltonian cache
};

struct GroundStateResult {
  double energy = 0.0;
  WaveFunction state;
  double residual = 0.0;
  int iterations = 0;
  bool degenerate = false;
  double gap = 0.0;  // E1 - E0 when checked, otherwise 0
};

/// Lowest eigenpair in the `electrons` sector. The returned state has its
/// largest-magnitude amplitude real and positive.
GroundStateResult ground_state(const MolecularIntegrals& h, int electrons,
                               const SolverOptions& opts = {});
GroundStateResult ground_state(const SectorHamiltonian& op,
                               const SolverOptions& opts = {});

/// Sector matrix assembled term by term from ladder strings (independent of
/// the Slater-Condon path). Throws SectorTooLarge above `cap`.
CMatrix dense_hamiltonian(const MolecularIntegrals& h, int electrons,
                          std::uint64_t cap = 4096);

/// Ascending eigenvalues of dense_hamiltonian.
std::vector<double> dense_spectrum(const MolecularIntegrals& h, int electrons,
                                   std::uint64_t cap = 4096);

/// Multiplies by a phase so the largest-magnitude amplitude (lowest index
/// on ties) is real and positive.
void fix_phase(CVector& v);

}  // namespace qembed
