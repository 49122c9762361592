#pragma once

// Particle-hole frame, low-energy truncation, active-space selection and the
// excitation projections used to certify guiding-state overlaps for
// impurity models.
//
// Mode vocabulary: "eigenmodes" are the columns of ImpurityModel::free_orbitals
// (a~_j, ascending energy, negative ones first). In the particle-hole frame
// b_j = a~_j^dag for the negative modes and b_j = a~_j otherwise.

#include <optional>
#include <vector>

#include "qembed/analysis.hpp"
#include "qembed/fermion_operator.hpp"
#include "qembed/model.hpp"
#include "qembed/states.hpp"

namespace qembed {

struct ParticleHoleFrame {
  int n_modes = 0;
  int n_negative = 0;
  int electrons = 0;
  std::vector<double> abs_epsilons;  // |eps_j|, eigenmode order
  RMatrix eigenmodes;                // N x N, column j = a~_j
  FermionOperator transformed;       // H - energy_shift in b ladders
  double energy_shift = 0.0;         // sum of negative eps_j
  SlaterDeterminant reference;       // b-vacuum as an a-frame determinant

  /// Occupation mask of the b-vacuum in the eigenmode basis.
  std::uint64_t holes() const {
    return n_negative == 0 ? 0 : (std::uint64_t{1} << n_negative) - 1;
  }
  /// b-frame patterns reachable from the `electrons` sector, ascending.
  std::vector<std::uint64_t> b_basis() const;
};

ParticleHoleFrame particle_hole(const ImpurityModel& m, int electrons);

/// psi expressed in the eigenmodes (rotation by the inverse of free_orbitals).
WaveFunction to_eigenmodes(const WaveFunction& psi, const ParticleHoleFrame& f);

/// psi as a b-frame vector: |T>_b = prod_{j in T} b+_j |vac_b>, T ascending.
FockVector to_particle_hole(const WaveFunction& psi, const ParticleHoleFrame& f);

/// b-frame RDM from the eigenmode RDM: 1 - gamma^T on the hole block, the
/// particle block unchanged, zero coupling between them.
OneBodyRDM particle_hole_rdm(const OneBodyRDM& eigenmode_rdm, int n_negative);

/// Number of b excitations (particles above plus holes below the b-vacuum)
/// of the largest-excitation basis state with |amplitude| > tol.
int max_excitations(const WaveFunction& psi, const ParticleHoleFrame& f,
                    double tol = 1e-12);

struct TruncationResult {
  ImpurityModel model;
  int electrons = 0;
  double threshold = 0.0;       // eps / m_cut
  int cutoff_terms = 0;         // m_cut
  std::vector<int> dropped;     // eigenmode indices frozen
  int dropped_occupied = 0;
  RMatrix basis;                // N x N', new modes in old coordinates
};

/// Freezes eigenmodes with |eps_j| <= eps / m_cut at their free occupation
/// (negative -> filled). The kept modes are re-based so the interaction sits
/// on the first M of them. m_cut defaults to the interaction term count.
TruncationResult truncate_low_energy(const ImpurityModel& m, int electrons,
                                     double eps,
                                     std::optional<int> m_cut = std::nullopt);

enum class FreezePolicy {
  kAuto,      // kProof when K >= 4M, kBalanced otherwise
  kProof,     // keep the first K/2 - M modes of each branch
  kBalanced,  // split the freeze budget evenly, remainder by smaller delta
};

struct ActiveSelection {
  int n_modes = 0;
  int active_count = 0;
  int requested_k = 0;
  FreezePolicy policy = FreezePolicy::kAuto;  // as applied
  /// Columns: active modes, then I- (filled), then I+ (empty). Orthonormal.
  CMatrix basis;
  std::vector<int> i_minus;  // column indices into basis
  std::vector<int> i_plus;
  std::vector<double> occupations;  // a-frame occupation per basis column
  int l_plus_dim = 0;
  int l_minus_dim = 0;
  double delta_bound = 0.0;
};

/// gamma is the a-frame RDM in computational modes.
ActiveSelection select_active(const OneBodyRDM& gamma, const ImpurityModel& m,
                              int electrons, int k,
                              FreezePolicy policy = FreezePolicy::kAuto);

struct ProjectionResult {
  WaveFunction state;  // normalized Pi+ Pi- psi
  double achieved_overlap = 0.0;
  double delta_bound = 0.0;
};

/// Throws InvalidArgument when the projection vanishes.
ProjectionResult project_excitations(const WaveFunction& psi,
                                     const ActiveSelection& sel);

/// Norm of Pi+ Pi- psi, without normalizing.
double projected_weight(const WaveFunction& psi, const ActiveSelection& sel);

struct Theorem1State {
  WaveFunction phi;           // on the active selection modes
  SlaterDeterminant theta;    // I- modes of the selection basis
  CMatrix frame;              // selection basis
  std::vector<int> theta_frame_modes;  // frame columns occupied by theta
  WaveFunction projected;     // full-space normalized state
  double overlap = 0.0;

  /// G(frame) (phi wedge theta-in-frame).
  WaveFunction reconstruct() const;
};

Theorem1State theorem1_state(const WaveFunction& psi, const ActiveSelection& sel);

struct MixedOverlap {
  double weight = 0.0;             // <psi|P_V|psi>
  std::uint64_t dim_v = 0;         // basis states of the sector inside V
  std::uint64_t dim_v_fock = 0;    // sum_{k <= K_exc} binomial(N, k)
  double overlap_with_tau = 0.0;   // weight / dim_v
  double overlap_fock = 0.0;       // weight / dim_v_fock
};

MixedOverlap mixed_guiding_overlap(const WaveFunction& psi, int k_exc,
                                   const ParticleHoleFrame& frame);

struct PartialNumberRow {
  int s = 0;
  double block_sum = 0.0;
  double reference = 0.0;  // exp(-s)
};

struct PartialNumberStats {
  int block_size = 0;  // Q = ceil(14 M log(2/omega))
  std::vector<PartialNumberRow> rows;
  double fitted_c0 = 0.0;  // max_s block_sum / (M log(2/omega) e^{-s})
};

/// Block sums of the descending natural occupations of gamma.
PartialNumberStats partial_number_stats(const OneBodyRDM& gamma,
                                        const ImpurityModel& m);

}  // namespace qembed
