#pragma once

#include <array>
#include <vector>

#include "qembed/fock.hpp"

namespace qembed {

/// Open-boundary MPS over occupation numbers, one site per mode in
/// computational order. site[k][b] is the D_{k} x D_{k+1} matrix for local
/// occupation b.
struct MPSState {
  int electrons = 0;  // sector the state was compressed from
  std::vector<std::array<CMatrix, 2>> sites;
  std::vector<int> bond_dims;  // D_1 .. D_{N-1}
  std::vector<double> discarded_weight;  // per cut, sum of dropped s^2

  int modes() const { return static_cast<int>(sites.size()); }
  int max_bond() const;
  /// Amplitude of an occupation pattern.
  cplx amplitude(std::uint64_t bits) const;
};

/// Left-to-right sequential SVD keeping at most `max_bond` singular values
/// per cut; left-canonical, normalized on the last site. Needs 2^N memory.
MPSState mps_compress(const WaveFunction& psi, int max_bond);

/// Contraction restricted to the compressed sector, normalized.
WaveFunction mps_to_wavefunction(const MPSState& m);

/// <m|psi>, with m normalized over the full Fock space.
cplx mps_overlap(const MPSState& m, const WaveFunction& psi);

}  // namespace qembed
