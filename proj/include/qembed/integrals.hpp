#pragma once

#include <vector>

#include "qembed/common.hpp"

namespace qembed {

/// Second-quantized Hamiltonian data in chemists' notation:
///   H = E_core + sum_pq h_pq a+_p a_q + 1/2 sum_pqrs (pq|rs) a+_p a+_r a_s a_q
/// over spin orbitals. The two-body tensor is real with 8-fold symmetry.
class MolecularIntegrals {
 public:
  MolecularIntegrals() = default;
  explicit MolecularIntegrals(int n_modes);

  int n_modes() const { return n_; }
  double core_energy() const { return core_energy_; }
  void set_core_energy(double e) { core_energy_ = e; }

  const RMatrix& one_body() const { return h_; }
  RMatrix& one_body() { return h_; }

  double two_body(int p, int q, int r, int s) const {
    return g_[index(p, q, r, s)];
  }
  /// Sets (pq|rs) and all of its symmetry images.
  void set_two_body(int p, int q, int r, int s, double value);
  /// Raw dense tensor, index ((p*N + q)*N + r)*N + s.
  const std::vector<double>& two_body_tensor() const { return g_; }
  std::vector<double>& two_body_tensor() { return g_; }

  bool has_two_body() const;

  /// Max deviation from h = h^T and from the 8-fold symmetry of (pq|rs).
  double symmetry_error() const;
  /// Throws InvalidArgument unless symmetry_error() <= tol.
  void validate(double tol = 1e-12) const;

  /// Integrals expressed in the orbitals given as columns of `orbitals`
  /// (N x K, real). Core energy is carried over unchanged.
  MolecularIntegrals transformed(const RMatrix& orbitals) const;

  /// Coulomb minus exchange contracted against a density D (D_rs weights
  /// a+_s a_r): G_pq = sum_rs [(pq|rs) - (pr|sq)] D_rs.
  RMatrix coulomb_exchange(const RMatrix& density) const;

  std::size_t index(int p, int q, int r, int s) const {
    const auto n = static_cast<std::size_t>(n_);
    return ((static_cast<std::size_t>(p) * n + static_cast<std::size_t>(q)) * n +
            static_cast<std::size_t>(r)) *
               n +
           static_cast<std::size_t>(s);
  }

  friend bool operator==(const MolecularIntegrals&,
                         const MolecularIntegrals&) = default;

 private:
  int n_ = 0;
  double core_energy_ = 0.0;
  RMatrix h_;
  std::vector<double> g_;
};

}  // namespace qembed
