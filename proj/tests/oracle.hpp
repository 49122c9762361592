#pragma once

// Brute-force reference implementations over the full 2^N Fock space.
// Nothing here calls into the library's Fock-space code.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qembed/integrals.hpp"

namespace oracle {

using qembed::cplx;
using qembed::CMatrix;
using qembed::CVector;
using qembed::RMatrix;
using SpMat = Eigen::SparseMatrix<double>;

/// a_p (or a+_p) on the full space; basis index = occupation mask, sign
/// (-1)^(occupied modes below p).
inline SpMat ladder(int n_modes, int p, bool dagger) {
  const std::size_t dim = std::size_t{1} << n_modes;
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t s = 0; s < dim; ++s) {
    const bool occ = (s >> p) & 1U;
    if (occ == dagger) continue;
    int below = 0;
    for (int q = 0; q < p; ++q) below += (s >> q) & 1U;
    t.emplace_back(static_cast<int>(s ^ (std::size_t{1} << p)), static_cast<int>(s),
                   below % 2 ? -1.0 : 1.0);
  }
  SpMat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

struct Ladders {
  std::vector<SpMat> c, a;  // creators, annihilators
  explicit Ladders(int n) {
    for (int p = 0; p < n; ++p) {
      c.push_back(ladder(n, p, true));
      a.push_back(ladder(n, p, false));
    }
  }
};

/// E_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q.
inline SpMat full_hamiltonian(const qembed::MolecularIntegrals& h) {
  const int n = h.n_modes();
  const Ladders l(n);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  SpMat out(dim, dim);
  out.setIdentity();
  out *= h.core_energy();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      if (h.one_body()(p, q) != 0.0) out += h.one_body()(p, q) * (l.c[p] * l.a[q]);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const double g = h.two_body(p, q, r, s);
          if (g == 0.0) continue;
          out += (0.5 * g) * SpMat(l.c[p] * l.c[r] * l.a[s] * l.a[q]);
        }
  return out;
}

/// Indices of the n-particle sector in ascending mask order.
inline std::vector<std::size_t> sector_indices(int n_modes, int electrons) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < (std::size_t{1} << n_modes); ++s)
    if (std::popcount(s) == electrons) out.push_back(s);
  return out;
}

inline CMatrix sector_matrix(const qembed::MolecularIntegrals& h, int electrons) {
  const RMatrix full = RMatrix(full_hamiltonian(h));
  const auto idx = sector_indices(h.n_modes(), electrons);
  const auto d = static_cast<Eigen::Index>(idx.size());
  CMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      m(i, j) = full(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                     static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
  return m;
}

inline double ground_energy(const qembed::MolecularIntegrals& h, int electrons) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sector_matrix(h, electrons), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

/// Full-space vector from sector amplitudes.
inline CVector embed(const CVector& sector, int n_modes, int electrons) {
  const auto idx = sector_indices(n_modes, electrons);
  CVector v = CVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n_modes));
  for (std::size_t i = 0; i < idx.size(); ++i)
    v[static_cast<Eigen::Index>(idx[i])] = sector[static_cast<Eigen::Index>(i)];
  return v;
}

inline CVector restrict(const CVector& full, int n_modes, int electrons) {
  const auto idx = sector_indices(n_modes, electrons);
  CVector v(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = full[static_cast<Eigen::Index>(idx[i])];
  return v;
}

/// gamma_pq = <psi| a+_p a_q |psi> for a full-space vector.
inline CMatrix rdm(const CVector& full, int n_modes) {
  const Ladders l(n_modes);
  CMatrix g(n_modes, n_modes);
  for (int p = 0; p < n_modes; ++p)
    for (int q = 0; q < n_modes; ++q) {
      const SpMat op = l.c[p] * l.a[q];
      const CVector w = op.cast<cplx>() * full;
      g(p, q) = full.dot(w);
    }
  return g;
}

/// a+(x_1) ... a+(x_n)|vac> with a+(x) = sum_p x_p a+_p.
inline CVector determinant(const CMatrix& orbitals) {
  const int n_modes = static_cast<int>(orbitals.rows());
  const Ladders l(n_modes);
  CVector v = CVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n_modes));
  v[0] = 1.0;
  for (Eigen::Index k = orbitals.cols() - 1; k >= 0; --k) {
    CVector w = CVector::Zero(v.size());
    for (int p = 0; p < n_modes; ++p) w += orbitals(p, k) * (l.c[p].cast<cplx>() * v);
    v = w;
  }
  return v;
}

/// exp(i sum_qp H_qp a+_q a_p): the Fock-space image of U = exp(iH).
inline CMatrix rotation(const CMatrix& hermitian) {
  const int n = static_cast<int>(hermitian.rows());
  const Ladders l(n);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  CMatrix k = CMatrix::Zero(dim, dim);
  for (int q = 0; q < n; ++q)
    for (int p = 0; p < n; ++p)
      k += hermitian(q, p) * CMatrix(RMatrix(l.c[q] * l.a[p]).cast<cplx>());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
  const CVector phases = (cplx(0, 1) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// U = exp(iH) for a Hermitian H.
inline CMatrix unitary(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  const CVector phases = (cplx(0, 1) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Von Neumann entropy of mode p from an explicit partial trace.
inline double mode_entropy(const CVector& full, int n_modes, int p) {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  const std::size_t bit = std::size_t{1} << p;
  for (std::size_t rest = 0; rest < (std::size_t{1} << n_modes); ++rest) {
    if (rest & bit) continue;
    const cplx c0 = full[static_cast<Eigen::Index>(rest)];
    const cplx c1 = full[static_cast<Eigen::Index>(rest | bit)];
    rho(0, 0) += c0 * std::conj(c0);
    rho(0, 1) += c0 * std::conj(c1);
    rho(1, 0) += c1 * std::conj(c0);
    rho(1, 1) += c1 * std::conj(c1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double x = es.eigenvalues()[i];
    if (x > 1e-300) s -= x * std::log(x);
  }
  return s;
}

}  // namespace oracle
