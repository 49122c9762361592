#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qembed/common.hpp"
#include "qembed/integrals.hpp"

namespace qembed {

/// Free Hamiltonian plus an interaction confined to the first M modes.
///
/// The free part is H_free = sum_j eps_j b+_j b_j with b_j the modes given by
/// the columns of free_orbitals (sorted by ascending eps). integrals.h holds
/// Q diag(eps) Q^T; integrals.g is nonzero only on modes 0..M-1.
struct ImpurityModel {
  MolecularIntegrals integrals;
  int impurity_modes = 0;
  std::vector<double> epsilons;  // ascending
  RMatrix free_orbitals;         // N x N orthogonal, column j <-> epsilons[j]
  double omega = 0.0;            // min nonzero |eps_j|

  int n_modes() const { return integrals.n_modes(); }
  int negative_count() const;
  /// Throws InvalidArgument if any invariant is violated.
  void validate() const;
};

/// Single-particle energies: either listed explicitly, or drawn uniformly
/// from [-1, -band] u [band, 1] with `negative` of them below zero.
struct EpsilonSpec {
  std::vector<double> values;  // explicit when non-empty
  double band = 0.0;           // excluded band (-band, band)
  std::optional<int> negative; // defaults to N / 2
};

/// Interaction on the impurity modes. Explicit entries are physicists'
/// amplitudes h_pqrs of sum h_pqrs a+_p a+_q a_r a_s (M^4 row-major), or,
/// with `chemist` set, (pq|rs) directly. When empty, each symmetry-distinct
/// (pq|rs) is drawn from [-strength, strength].
struct ImpuritySpec {
  std::vector<double> amplitudes;
  bool chemist = false;
  double strength = 0.5;
  bool zero = false;  // no interaction at all
};

/// How the free orbitals couple to the impurity coordinates.
enum class Hybridization {
  kRandom,  // Haar-random orthogonal Q
  kNone     // Q = identity: free part diagonal in the impurity coordinates
};

ImpurityModel build_impurity_model(int n_modes, int impurity_modes,
                                   const EpsilonSpec& eps,
                                   const ImpuritySpec& imp, std::uint64_t seed,
                                   Hybridization hyb = Hybridization::kRandom);

/// Number of nonzero symmetry-distinct (pq|rs) entries.
int interaction_term_count(const MolecularIntegrals& m);

/// Inter-monomer one-body coupling: block (N_mono x N_mono, defaults to the
/// identity) placed between adjacent copies, multiplied by scale.
struct OligomerCoupling {
  std::optional<RMatrix> block;
  double scale = 0.0;
};

MolecularIntegrals build_oligomer(const MolecularIntegrals& monomer, int copies,
                                  const std::optional<OligomerCoupling>& coupling);

/// Spin orbitals from spatial orbitals: modes [0, n) alpha, [n, 2n) beta,
/// no cross-spin exchange.
MolecularIntegrals spin_double(const MolecularIntegrals& spatial);

/// Spatial Hubbard chain with hopping -t and on-site repulsion U.
MolecularIntegrals hubbard_chain(int sites, double t, double u,
                                 bool periodic = false);

/// Random spin-orbital Hamiltonian: h uniform in [-1,1] (symmetric),
/// distinct (pq|rs) uniform in [-scale, scale].
MolecularIntegrals random_integrals(int n_modes, std::uint64_t seed,
                                    double scale = 0.5);

// ---------------------------------------------------------------------------
// Integral file format. One record per line, "p q r s value" with 1-based
// indices; "p q 0 0 v" is h_pq, "0 0 0 0 v" is E_core. '#' starts a comment.
// The first record must be the header "NORB=<N> NELEC=<n>".

struct IntegralFile {
  MolecularIntegrals integrals;
  int electrons = 0;
  int duplicate_warnings = 0;
};

/// Throws ParseError (with line number) on malformed input and
/// InvalidArgument on inconsistent symmetry-equivalent entries.
IntegralFile read_integrals(const std::filesystem::path& path);
IntegralFile parse_integrals(const std::string& text);

void write_integrals(const MolecularIntegrals& m, int electrons,
                     const std::filesystem::path& path);
std::string format_integrals(const MolecularIntegrals& m, int electrons);

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// FNV-1a over the canonical text form; stable provenance tag for CSV rows.
std::string model_hash(const MolecularIntegrals& m);

}  // namespace qembed
