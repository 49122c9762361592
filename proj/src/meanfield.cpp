#include "qembed/meanfield.hpp"

#include <cmath>

namespace qembed {

namespace {

void check_density(const RMatrix& d, int n) {
  if (d.rows() != n || d.cols() != n) throw DimensionMismatch("density must be N x N");
  if (n == 0) return;
  if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidArgument("density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<RMatrix> es(d, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8 || es.eigenvalues().maxCoeff() > 1 + 1e-8)
    throw InvalidArgument("density spectrum outside [0, 1]");
}

RMatrix occupied_density(const RMatrix& c, int n) {
  const RMatrix occ = c.leftCols(n);
  return occ * occ.transpose();
}

}  // namespace

RMatrix fock_matrix(const MolecularIntegrals& h, const RMatrix& density) {
  check_density(density, h.n_modes());
  return h.one_body() + h.coulomb_exchange(density);
}

double density_energy(const MolecularIntegrals& h, const RMatrix& density) {
  const RMatrix g = h.coulomb_exchange(density);
  return h.core_energy() + (h.one_body().cwiseProduct(density)).sum() +
         0.5 * (g.cwiseProduct(density)).sum();
}

SymmetricEigen aufbau(const RMatrix& fock) {
  return canonical_eigh(RMatrix(0.5 * (fock + fock.transpose())));
}

MeanFieldResult hartree_fock(const MolecularIntegrals& h, int electrons,
                             const ScfOptions& opts) {
  const int n_modes = h.n_modes();
  if (electrons < 0 || electrons > n_modes)
    throw InvalidArgument("electron count must lie in [0, N]");
  if (opts.damping <= 0.0 || opts.damping > 1.0)
    throw InvalidArgument("damping weight must lie in (0, 1]");

  MeanFieldResult out;
  SymmetricEigen eig = aufbau(h.one_body());
  RMatrix density = occupied_density(eig.vectors, electrons);
  RMatrix fock = h.one_body() + h.coulomb_exchange(density);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    eig = aufbau(fock);
    const RMatrix next = occupied_density(eig.vectors, electrons);
    const double change = n_modes ? (next - density).cwiseAbs().maxCoeff() : 0.0;
    out.iterations = it;
    if (change < opts.tolerance) {
      density = next;
      out.converged = true;
      break;
    }
    density = (1.0 - opts.damping) * density + opts.damping * next;
    fock = h.one_body() + h.coulomb_exchange(density);
    out.energy_history.push_back(density_energy(h, density));
  }

  // Final canonical orbitals from the Fock matrix of the determinant itself.
  out.fock = h.one_body() + h.coulomb_exchange(density);
  eig = aufbau(out.fock);
  out.orbitals = eig.vectors;
  out.orbital_energies.assign(eig.values.data(), eig.values.data() + eig.values.size());
  out.density = occupied_density(eig.vectors, electrons);
  out.determinant = SlaterDeterminant::from_real(out.orbitals.leftCols(electrons));
  out.energy = density_energy(h, out.density);
  if (out.converged) out.energy_history.push_back(out.energy);
  return out;
}

RMatrix restricted_core_potential(const MolecularIntegrals& spatial,
                                  const RMatrix& occupied) {
  const int n = spatial.n_modes();
  if (occupied.rows() != n) throw DimensionMismatch("orbital rows must equal N");
  RMatrix v = RMatrix::Zero(n, n);
  const RMatrix d = occupied * occupied.transpose();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          acc += (2.0 * spatial.two_body(p, q, r, s) - spatial.two_body(p, r, s, q)) * d(r, s);
      v(p, q) = acc;
    }
  return v;
}

double restricted_core_energy(const MolecularIntegrals& spatial,
                              const RMatrix& occupied) {
  const MolecularIntegrals mo = spatial.transformed(occupied);
  const int k = mo.n_modes();
  double e = spatial.core_energy();
  for (int c = 0; c < k; ++c) {
    e += 2.0 * mo.one_body()(c, c);
    for (int d = 0; d < k; ++d)
      e += 2.0 * mo.two_body(c, c, d, d) - mo.two_body(c, d, d, c);
  }
  return e;
}

}  // namespace qembed
