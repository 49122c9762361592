#pragma once

// Polynomials in ladder operators, kept normal ordered. Used for Hamiltonians
// that do not conserve the particle number of the operators they are written
// in (the particle-hole frame).

#include <map>
#include <vector>

#include "qembed/fock.hpp"

namespace qembed {

class FermionOperator {
 public:
  /// Creators ascending by mode, then annihilators ascending by mode.
  using Term = std::vector<Ladder>;

  explicit FermionOperator(int n_modes = 0) : n_modes_(n_modes) {}

  int n_modes() const { return n_modes_; }
  const std::map<Term, double>& terms() const { return terms_; }
  double constant() const;

  /// Adds coeff * ops[0] ops[1] ..., reordered with the anticommutation
  /// relations into normal-ordered terms.
  void add(const Term& ops, double coeff);
  void add_constant(double c) { add({}, c); }
  /// Drops terms with |coefficient| <= tol.
  void prune(double tol = 0.0);

  /// Matrix on an explicit list of occupation patterns; patterns reached
  /// outside the list are ignored (callers pass a closed subspace).
  RMatrix dense(const std::vector<std::uint64_t>& basis) const;

 private:
  void add_ordered(Term ops, double coeff);
  int n_modes_;
  std::map<Term, double> terms_;
};

/// State over an explicit, ascending list of occupation patterns.
struct FockVector {
  int modes = 0;
  std::vector<std::uint64_t> states;
  CVector coeffs;

  std::optional<std::size_t> find(std::uint64_t bits) const;
};

/// <v| op |v>.
double expectation(const FermionOperator& op, const FockVector& v);

/// gamma_pq = <a+_p a_q> by direct ladder application.
CMatrix one_rdm(const FockVector& v);

}  // namespace qembed
