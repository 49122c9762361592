#pragma once

// Occupation-number representation of fixed-particle-number Fock sectors.
//
// Ordering convention: |n_1 n_2 ...> = (a_1+)^{n_1} (a_2+)^{n_2} ... |vac>,
// mode p is bit p of the mask (0-based). Applying a+_p or a_p to a basis
// state picks up (-1)^(number of occupied modes below p).

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qembed/common.hpp"
#include "qembed/integrals.hpp"

namespace qembed {

struct OccupationState {
  std::uint64_t bits = 0;
  int modes = 0;

  int count() const { return std::popcount(bits); }
  bool occupied(int p) const { return (bits >> p) & 1U; }
  friend bool operator==(const OccupationState&,
                         const OccupationState&) = default;
};

/// All occupation patterns of `modes` modes holding `electrons` particles,
/// in increasing integer order of the mask.
class SectorBasis {
 public:
  SectorBasis(int modes, int electrons);

  int modes() const { return modes_; }
  int electrons() const { return electrons_; }
  std::size_t size() const { return states_.size(); }
  std::uint64_t state(std::size_t i) const { return states_[i]; }
  const std::vector<std::uint64_t>& states() const { return states_; }

  /// Position of `bits` in the basis (combinatorial ranking). The caller
  /// guarantees popcount(bits) == electrons() and bits < 2^modes().
  std::size_t index_of(std::uint64_t bits) const;
  /// Same as index_of but validates membership.
  std::optional<std::size_t> find(std::uint64_t bits) const;

 private:
  int modes_;
  int electrons_;
  std::vector<std::uint64_t> states_;
};

using SectorPtr = std::shared_ptr<const SectorBasis>;

/// Throws SectorTooLarge when binomial(modes, electrons) exceeds `cap`.
SectorPtr enumerate_sector(int modes, int electrons,
                           std::uint64_t cap = max_sector_dim());

/// Complex amplitude vector over a sector basis.
struct WaveFunction {
  SectorPtr basis;
  CVector coeffs;

  WaveFunction() = default;
  explicit WaveFunction(SectorPtr b)
      : basis(std::move(b)), coeffs(CVector::Zero(basis->size())) {}
  WaveFunction(SectorPtr b, CVector c) : basis(std::move(b)), coeffs(std::move(c)) {}

  int modes() const { return basis->modes(); }
  int electrons() const { return basis->electrons(); }
  std::size_t size() const { return basis->size(); }
  double norm() const { return coeffs.norm(); }
  void normalize();

  /// Single basis state with amplitude 1.
  static WaveFunction basis_state(SectorPtr b, std::uint64_t bits);
  /// Normalized Gaussian-random state (complex unless `real` is set).
  static WaveFunction random(SectorPtr b, SplitMix64& rng, bool real = false);
};

/// Sign picked up by moving a ladder operator on mode p past the modes
/// occupied below p.
inline int parity_below(std::uint64_t bits, int p) {
  const std::uint64_t below = bits & ((std::uint64_t{1} << p) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

/// Result of applying a ladder-operator string to a basis state.
struct TermResult {
  OccupationState state;
  int sign;
};

/// Applies a+_{c0} a+_{c1} ... a_{a0} a_{a1} ... to `s` (rightmost first).
/// Returns nullopt when the result vanishes. Throws InvalidArgument on
/// out-of-range or repeated indices.
std::optional<TermResult> apply_term(std::span<const int> creators,
                                     std::span<const int> annihilators,
                                     OccupationState s);

/// Single ladder operator for general (not normal-ordered) strings.
struct Ladder {
  int mode;
  bool creation;
  friend bool operator==(const Ladder&, const Ladder&) = default;
  friend auto operator<=>(const Ladder&, const Ladder&) = default;
};

/// Applies ops[0] ops[1] ... ops[k-1] to `bits` (rightmost first).
/// Returns nullopt when the result vanishes.
std::optional<std::pair<std::uint64_t, int>> apply_ladders(
    std::span<const Ladder> ops, std::uint64_t bits);

/// Matrix-free H psi via Slater-Condon rules. The result is not normalized.
WaveFunction apply_hamiltonian(const MolecularIntegrals& h,
                               const WaveFunction& psi);

/// <psi|H|psi> for a normalized psi.
double expectation(const MolecularIntegrals& h, const WaveFunction& psi);

/// Sector-restricted Hamiltonian. Caches a sparse row matrix when it fits
/// in `memory_budget_bytes`, otherwise applies matrix-free. Output entries
/// are accumulated in a fixed order per row, so results do not depend on
/// the worker count.
class SectorHamiltonian {
 public:
  SectorHamiltonian(const MolecularIntegrals& h, SectorPtr basis,
                    std::size_t memory_budget_bytes = std::size_t{1} << 30);

  const SectorPtr& basis() const { return basis_; }
  std::size_t dimension() const { return basis_->size(); }
  bool cached() const { return cached_; }

  /// y = H x
  void apply(const CVector& x, CVector& y) const;
  CVector apply(const CVector& x) const {
    CVector y(x.size());
    apply(x, y);
    return y;
  }

  /// Calls visit(column, value) for every nonzero <row|H|column>.
  template <class Visit>
  void for_each_in_row(std::size_t row, Visit&& visit) const;

 private:
  void build_cache();

  MolecularIntegrals h_;
  SectorPtr basis_;
  RMatrix coulomb_;   // (pp|rr)
  RMatrix exchange_;  // (pr|rp)
  bool cached_ = false;
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
};

template <class Visit>
void SectorHamiltonian::for_each_in_row(std::size_t row, Visit&& visit) const {
  const std::uint64_t s = basis_->state(row);
  const int n_modes = basis_->modes();
  const RMatrix& h = h_.one_body();
  int occ[kMaxModes];
  int vir[kMaxModes];
  int n_occ = 0;
  int n_vir = 0;
  for (int p = 0; p < n_modes; ++p) {
    if ((s >> p) & 1U)
      occ[n_occ++] = p;
    else
      vir[n_vir++] = p;
  }

  double diag = h_.core_energy();
  for (int a = 0; a < n_occ; ++a) {
    diag += h(occ[a], occ[a]);
    for (int b = 0; b < n_occ; ++b)
      diag += 0.5 * (coulomb_(occ[a], occ[b]) - exchange_(occ[a], occ[b]));
  }
  visit(row, diag);

  // Single excitations q -> p.
  for (int a = 0; a < n_occ; ++a) {
    const int q = occ[a];
    const std::uint64_t removed = s ^ (std::uint64_t{1} << q);
    const int sign_q = parity_below(s, q);
    for (int b = 0; b < n_vir; ++b) {
      const int p = vir[b];
      double v = h(p, q);
      for (int c = 0; c < n_occ; ++c) {
        const int t = occ[c];
        v += h_.two_body(p, q, t, t) - h_.two_body(p, t, t, q);
      }
      if (v == 0.0) continue;
      const std::uint64_t target = removed | (std::uint64_t{1} << p);
      visit(basis_->index_of(target), sign_q * parity_below(removed, p) * v);
    }
  }

  // Double excitations (q, s2) -> (p, r) via a+_p a+_r a_s2 a_q.
  for (int a1 = 0; a1 < n_occ; ++a1) {
    const int q = occ[a1];
    const std::uint64_t t1 = s ^ (std::uint64_t{1} << q);
    const int sign1 = parity_below(s, q);
    for (int a2 = a1 + 1; a2 < n_occ; ++a2) {
      const int s2 = occ[a2];
      const std::uint64_t t2 = t1 ^ (std::uint64_t{1} << s2);
      const int sign2 = sign1 * parity_below(t1, s2);
      for (int b1 = 0; b1 < n_vir; ++b1) {
        const int p = vir[b1];
        for (int b2 = b1 + 1; b2 < n_vir; ++b2) {
          const int r = vir[b2];
          const double v = h_.two_body(p, q, r, s2) - h_.two_body(p, s2, r, q);
          if (v == 0.0) continue;
          const std::uint64_t t3 = t2 | (std::uint64_t{1} << r);
          const int sign = sign2 * parity_below(t2, r) * parity_below(t3, p);
          visit(basis_->index_of(t3 | (std::uint64_t{1} << p)), sign * v);
        }
      }
    }
  }
}

}  // namespace qembed
