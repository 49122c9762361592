#pragma once

#include <vector>

#include "qembed/fock.hpp"

namespace qembed {

/// gamma_pq = <a+_p a_q>.
struct OneBodyRDM {
  CMatrix gamma;

  int modes() const { return static_cast<int>(gamma.rows()); }
  double trace() const { return gamma.trace().real(); }
  /// Occupation <a+(x) a(x)> = x^T gamma conj(x) of the mode a+(x).
  double occupation(const CVector& x) const {
    return (x.transpose() * gamma * x.conjugate())(0, 0).real();
  }
  /// RDM in the modes given by the columns of `basis`: B^T gamma conj(B).
  OneBodyRDM in_basis(const CMatrix& basis) const {
    return {basis.transpose() * gamma * basis.conjugate()};
  }
};

OneBodyRDM one_rdm(const WaveFunction& psi);

struct NaturalOrbitals {
  RVector occupations;  // descending
  CMatrix orbitals;     // column k is the mode a+(x_k) with occupation k
};

/// Eigen-decomposition of gamma with the canonical tie-break. The orbital
/// columns are the complex conjugates of gamma's eigenvectors, so that
/// rdm.occupation(orbitals.col(k)) == occupations[k].
NaturalOrbitals natural_orbitals(const OneBodyRDM& rdm);

/// -x ln x - (1-x) ln(1-x) in nats; 0 at the endpoints.
double binary_entropy(double x);

/// One-orbital von Neumann entropy from gamma_pp.
double single_orbital_entropy(const WaveFunction& psi, int mode);
double single_orbital_entropy(const OneBodyRDM& rdm, int mode);

struct DecayReport {
  std::vector<double> occupations;  // sigma_1 >= sigma_2 >= ...
  int impurity_modes = 0;
  double omega = 0.0;
  double rate = 0.0;      // 1 / (14 M log(2/omega))
  double fitted_c = 0.0;  // max_j sigma_j exp(j * rate), j from 1
  // Least squares log sigma_j = intercept + slope * j over the points with
  // sigma_j in (1e-12, 1 - 1e-12).
  int regression_points = 0;
  bool regression_empty = true;  // fewer than two points
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

DecayReport decay_report(const OneBodyRDM& rdm, int impurity_modes, double omega);

}  // namespace qembed
