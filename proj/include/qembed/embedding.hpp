#pragma once

#include <string>
#include <vector>

#include "qembed/integrals.hpp"
#include "qembed/meanfield.hpp"
#include "qembed/solver.hpp"
#include "qembed/states.hpp"

namespace qembed {

/// Fragment/bath/core split of a determinant's occupied space.
struct SchmidtPartition {
  int n_modes = 0;
  std::vector<int> fragment_modes;  // ascending computational modes
  RVector singular_values;          // one per occupied orbital, descending
  CMatrix pure_fragment_orbitals;   // occupied, inside the fragment
  CMatrix entangled_orbitals;       // occupied, straddling fragment and rest
  CMatrix bath_orbitals;            // environment part of the entangled ones
  CMatrix core_orbitals;            // occupied, outside the fragment
  double tolerance = 1e-8;

  int bath_count() const { return static_cast<int>(bath_orbitals.cols()); }
  int core_count() const { return static_cast<int>(core_orbitals.cols()); }
  int electrons() const {
    return static_cast<int>(pure_fragment_orbitals.cols() +
                            entangled_orbitals.cols() + core_orbitals.cols());
  }
  /// The occupied orbitals after the singular-vector rotation.
  CMatrix rotated_occupied() const;
};

/// SVD of the fragment rows of the occupied orbitals. Singular values at or
/// above 1 - tol mark pure-fragment orbitals, at or below tol mark core.
SchmidtPartition schmidt_bath(const SlaterDeterminant& det,
                              const std::vector<int>& fragment_modes,
                              double tol = 1e-8);

/// Active-space problem with a frozen determinant on the rest.
///
/// The columns of `frame` form an orthonormal single-particle basis:
/// frame modes [0, active_count) are active, `core_frame_modes` are occupied
/// by the frozen determinant, everything else is empty. Active states must
/// leave `excluded_frame_modes` empty when assembled into a guiding state.
struct EmbeddingProblem {
  std::string scheme;                 // "dmet" or "huzinaga"
  int n_modes = 0;
  int active_count = 0;
  int n_active = 0;                   // electrons in the active space
  int core_electrons = 0;
  RMatrix frame;                      // N x N orthogonal
  std::vector<int> fragment_modes;    // dmet: computational fragment modes
  std::vector<int> active_orbitals;   // huzinaga: mean-field orbital indices
  std::vector<int> core_frame_modes;
  std::vector<int> excluded_frame_modes;
  int bath_count = 0;
  MolecularIntegrals effective;       // on the active modes, E_core = 0
  double env_energy = 0.0;            // E-bar, includes the parent E_core
  double level_shift = 0.0;

  RMatrix active_basis() const { return frame.leftCols(active_count); }
  RMatrix core_basis() const;
  SlaterDeterminant core_determinant() const;
  /// Full-space state for an active-space state: rotate the wedge of the
  /// active part with the frozen core into the computational modes.
  WaveFunction assemble(const WaveFunction& active_state) const;
};

/// Effective Hamiltonian of the partition: h + J[P_c] - K[P_c] and the
/// parent two-body tensor, both expressed in the active orbitals
/// (fragment modes then bath). Requires real orbitals.
EmbeddingProblem dmet_effective(const MolecularIntegrals& h,
                                const SchmidtPartition& part);

/// Projection embedding. The active space holds the chosen mean-field
/// orbitals followed by the occupied environment orbitals, which the level
/// shift pushes up by ~2 mu.
EmbeddingProblem huzinaga_effective(const MolecularIntegrals& h,
                                    const MeanFieldResult& mf,
                                    const std::vector<int>& active_orbitals,
                                    double mu = 1e3);

struct EmbeddingResult {
  double total_energy = 0.0;   // env_energy + active_energy
  double active_energy = 0.0;
  GroundStateResult fragment;  // active-space ground state
  WaveFunction guiding;        // normalized full-space state
  double leakage = 0.0;        // weight on excluded frame modes
};

EmbeddingResult embed_solve(const EmbeddingProblem& prob,
                            const SolverOptions& opts = {});

}  // namespace qembed
