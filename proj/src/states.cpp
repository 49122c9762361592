#include "qembed/states.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <numeric>

namespace qembed {

SlaterDeterminant SlaterDeterminant::computational(int n_modes,
                                                   const std::vector<int>& modes) {
  CMatrix c = CMatrix::Zero(n_modes, static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k] < 0 || modes[k] >= n_modes) throw InvalidArgument("mode index out of range");
    c(modes[k], static_cast<Eigen::Index>(k)) = 1.0;
  }
  SlaterDeterminant d(std::move(c));
  d.validate();
  return d;
}

void SlaterDeterminant::validate(double tol) const {
  const CMatrix gram = orbitals.adjoint() * orbitals;
  const double err =
      (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (gram.size() > 0 && err > tol)
    throw InvalidArgument("determinant orbitals are not orthonormal (error " +
                          std::to_string(err) + ")");
}

WaveFunction determinant_to_wavefunction(const SlaterDeterminant& det,
                                         std::uint64_t cap) {
  const int n = det.electrons();
  const SectorPtr basis = enumerate_sector(det.modes(), n, cap);
  WaveFunction out(basis);
  if (n == 0) {
    out.coeffs[0] = 1.0;
    return out;
  }
  parallel_for(basis->size(), [&](std::size_t begin, std::size_t end) {
    CMatrix minor(n, n);
    for (std::size_t i = begin; i < end; ++i) {
      std::uint64_t bits = basis->state(i);
      for (int row = 0; row < n; ++row) {
        minor.row(row) = det.orbitals.row(std::countr_zero(bits));
        bits &= bits - 1;
      }
      out.coeffs[static_cast<Eigen::Index>(i)] = minor.partialPivLu().determinant();
    }
  });
  return out;
}

cplx overlap(const WaveFunction& phi, const WaveFunction& psi) {
  if (phi.modes() != psi.modes() || phi.electrons() != psi.electrons())
    throw DimensionMismatch("overlap between different sectors");
  return phi.coeffs.dot(psi.coeffs);
}

WaveFunction wedge(const WaveFunction& phi, const std::vector<int>& a_modes,
                   const WaveFunction& chi) {
  const int n_modes = chi.modes();
  if (static_cast<int>(a_modes.size()) != phi.modes())
    throw DimensionMismatch("mode list size differs from the left factor's mode count");
  std::uint64_t a_mask = 0;
  for (std::size_t k = 0; k < a_modes.size(); ++k) {
    const int p = a_modes[k];
    if (p < 0 || p >= n_modes) throw InvalidArgument("mode index out of range");
    if (k > 0 && p <= a_modes[k - 1])
      throw InvalidArgument("fragment modes must be strictly ascending");
    a_mask |= std::uint64_t{1} << p;
  }
  const SectorPtr basis = enumerate_sector(n_modes, phi.electrons() + chi.electrons());
  WaveFunction out(basis);
  std::vector<int> creators;
  for (std::size_t j = 0; j < chi.size(); ++j) {
    const cplx cj = chi.coeffs[static_cast<Eigen::Index>(j)];
    if (cj == 0.0) continue;
    const std::uint64_t cbits = chi.basis->state(j);
    if (cbits & a_mask)
      throw InvalidArgument("right factor has weight on the left factor's modes");
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const cplx ci = phi.coeffs[static_cast<Eigen::Index>(i)];
      if (ci == 0.0) continue;
      creators.clear();
      std::uint64_t local = phi.basis->state(i);
      while (local) {
        creators.push_back(a_modes[static_cast<std::size_t>(std::countr_zero(local))]);
        local &= local - 1;
      }
      const auto t = apply_term(creators, {}, OccupationState{cbits, n_modes});
      out.coeffs[static_cast<Eigen::Index>(basis->index_of(t->state.bits))] +=
          static_cast<double>(t->sign) * ci * cj;
    }
  }
  return out;
}

WaveFunction wedge(const WaveFunction& phi, const std::vector<int>& a_modes,
                   const SlaterDeterminant& theta,
                   const std::vector<int>& c_modes) {
  const int n_modes = theta.modes();
  std::vector<bool> in_c(static_cast<std::size_t>(n_modes), false);
  for (int p : c_modes) {
    if (p < 0 || p >= n_modes) throw InvalidArgument("mode index out of range");
    in_c[static_cast<std::size_t>(p)] = true;
  }
  for (int p : a_modes)
    if (p >= 0 && p < n_modes && in_c[static_cast<std::size_t>(p)])
      throw InvalidArgument("wedge factors share mode " + std::to_string(p));
  for (int p = 0; p < n_modes; ++p)
    if (!in_c[static_cast<std::size_t>(p)] &&
        theta.orbitals.row(p).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidArgument("determinant orbitals leak outside their mode set");
  return wedge(phi, a_modes, determinant_to_wavefunction(theta));
}

namespace {

// Applies the induced rotation of the 2x2 unitary u acting on modes (i, j).
void apply_two_mode(CVector& c, const SectorBasis& basis, int i, int j,
                    const Eigen::Matrix2cd& u) {
  const std::uint64_t mi = std::uint64_t{1} << i;
  const std::uint64_t mj = std::uint64_t{1} << j;
  const cplx det = u.determinant();
  const int modes = basis.modes();
  CVector out = CVector::Zero(c.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const cplx amp = c[static_cast<Eigen::Index>(k)];
    if (amp == 0.0) continue;
    const std::uint64_t s = basis.state(k);
    const bool oi = s & mi;
    const bool oj = s & mj;
    const auto idx = static_cast<Eigen::Index>(k);
    if (oi == oj) {
      out[idx] += oi ? det * amp : amp;
      continue;
    }
    // One particle in the pair: a+_i -> u00 a+_i + u10 a+_j and
    // a+_j -> u01 a+_i + u11 a+_j.
    const int from = oi ? i : j;
    const int to = oi ? j : i;
    const cplx stay = oi ? u(0, 0) : u(1, 1);
    const cplx move = oi ? u(1, 0) : u(0, 1);
    out[idx] += stay * amp;
    const int cr[] = {to};
    const int an[] = {from};
    const auto t = apply_term(cr, an, OccupationState{s, modes});
    out[static_cast<Eigen::Index>(basis.index_of(t->state.bits))] +=
        static_cast<double>(t->sign) * move * amp;
  }
  c = std::move(out);
}

void check_unitary(const CMatrix& u, int n) {
  if (u.rows() != n || u.cols() != n)
    throw DimensionMismatch("rotation must be N x N");
  const double err = (u.adjoint() * u - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (n > 0 && err > 1e-10)
    throw InvalidArgument("rotation matrix is not unitary (error " + std::to_string(err) + ")");
}

}  // namespace

WaveFunction rotate_orbitals(const WaveFunction& psi, const CMatrix& u) {
  const int n = psi.modes();
  check_unitary(u, n);

  // Reduce U to a diagonal by left Givens rotations on rows (r-1, r):
  // G_k ... G_1 U = D, hence U = G_1^dag ... G_k^dag D.
  struct Step {
    int row;
    Eigen::Matrix2cd g;
  };
  std::vector<Step> steps;
  CMatrix work = u;
  for (int col = 0; col < n; ++col)
    for (int r = n - 1; r > col; --r) {
      const cplx a = work(r - 1, col);
      const cplx b = work(r, col);
      if (std::abs(b) == 0.0) continue;
      const double rho = std::hypot(std::abs(a), std::abs(b));
      Eigen::Matrix2cd g;
      g << std::conj(a) / rho, std::conj(b) / rho, -b / rho, a / rho;
      const Eigen::Matrix<cplx, 2, Eigen::Dynamic> rows = work.middleRows(r - 1, 2);
      work.middleRows(r - 1, 2) = g * rows;
      steps.push_back({r, g});
    }

  CVector c = psi.coeffs;
  const SectorBasis& basis = *psi.basis;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    std::uint64_t bits = basis.state(k);
    cplx phase = 1.0;
    while (bits) {
      const int p = std::countr_zero(bits);
      phase *= work(p, p);
      bits &= bits - 1;
    }
    c[static_cast<Eigen::Index>(k)] *= phase;
  }
  for (auto it = steps.rbegin(); it != steps.rend(); ++it)
    apply_two_mode(c, basis, it->row - 1, it->row, it->g.adjoint());
  return WaveFunction(psi.basis, std::move(c));
}

SlaterDeterminant rotate_determinant(const SlaterDeterminant& det,
                                     const CMatrix& u) {
  check_unitary(u, det.modes());
  return SlaterDeterminant(u * det.orbitals);
}

std::vector<std::size_t> amplitude_order(const WaveFunction& psi) {
  std::vector<std::size_t> order(psi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> mag(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i)
    mag[i] = std::norm(psi.coeffs[static_cast<Eigen::Index>(i)]);
  // Basis states are already in ascending bit order, so a stable sort on
  // magnitude alone realizes the tie-break.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  return order;
}

SumOfSlater sum_of_slater(const WaveFunction& psi, std::size_t terms,
                          bool renormalize) {
  if (terms < 1 || terms > psi.size())
    throw InvalidArgument("term count must lie in [1, sector dimension]");
  const auto order = amplitude_order(psi);
  SumOfSlater sos;
  sos.basis = psi.basis;
  double weight = 0.0;
  for (std::size_t k = 0; k < terms; ++k) {
    const cplx c = psi.coeffs[static_cast<Eigen::Index>(order[k])];
    sos.terms.push_back({c, psi.basis->state(order[k])});
    weight += std::norm(c);
  }
  sos.retained_weight = weight;
  if (renormalize) {
    if (weight == 0.0) throw InvalidArgument("retained amplitudes are all zero");
    const double s = 1.0 / std::sqrt(weight);
    for (auto& t : sos.terms) t.coefficient *= s;
    sos.renormalized = true;
  }
  return sos;
}

WaveFunction SumOfSlater::to_wavefunction() const {
  WaveFunction w(basis);
  for (const auto& t : terms)
    w.coeffs[static_cast<Eigen::Index>(basis->index_of(t.bits))] = t.coefficient;
  return w;
}

}  // namespace qembed
