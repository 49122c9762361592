#include "qembed/mps.hpp"

#include <Eigen/SVD>

namespace qembed {

int MPSState::max_bond() const {
  int d = 1;
  for (int b : bond_dims) d = std::max(d, b);
  return d;
}

cplx MPSState::amplitude(std::uint64_t bits) const {
  CMatrix row = sites.front()[bits & 1U];
  for (int k = 1; k < modes(); ++k) row = row * sites[static_cast<std::size_t>(k)][(bits >> k) & 1U];
  return row(0, 0);
}

MPSState mps_compress(const WaveFunction& psi, int max_bond) {
  if (max_bond < 1) throw InvalidArgument("bond dimension must be at least 1");
  const int n = psi.modes();
  if (n < 1) throw InvalidArgument("MPS needs at least one mode");
  if (n > 26) throw SectorTooLarge(std::uint64_t{1} << n, std::uint64_t{1} << 26);

  MPSState out;
  out.electrons = psi.electrons();
  // Remainder tensor: rows = left bond, columns = occupation bits of the
  // remaining modes (lowest remaining mode in the lowest bit).
  CMatrix rest = CMatrix::Zero(1, Eigen::Index{1} << n);
  for (std::size_t i = 0; i < psi.size(); ++i)
    rest(0, static_cast<Eigen::Index>(psi.basis->state(i))) = psi.coeffs[static_cast<Eigen::Index>(i)];

  for (int k = 0; k < n - 1; ++k) {
    const Eigen::Index dl = rest.rows();
    const Eigen::Index cols = rest.cols() / 2;
    CMatrix mat(dl * 2, cols);
    for (Eigen::Index l = 0; l < dl; ++l)
      for (Eigen::Index c = 0; c < cols; ++c) {
        mat(l * 2, c) = rest(l, 2 * c);
        mat(l * 2 + 1, c) = rest(l, 2 * c + 1);
      }
    Eigen::BDCSVD<CMatrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    Eigen::Index keep = 0;
    const double floor = s.size() > 0 ? 1e-14 * s[0] : 0.0;
    while (keep < s.size() && keep < max_bond && s[keep] > floor) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    double dropped = 0.0;
    for (Eigen::Index i = keep; i < s.size(); ++i) dropped += s[i] * s[i];
    out.discarded_weight.push_back(dropped);

    std::array<CMatrix, 2> site{CMatrix(dl, keep), CMatrix(dl, keep)};
    for (Eigen::Index l = 0; l < dl; ++l) {
      site[0].row(l) = svd.matrixU().block(l * 2, 0, 1, keep);
      site[1].row(l) = svd.matrixU().block(l * 2 + 1, 0, 1, keep);
    }
    out.sites.push_back(std::move(site));
    out.bond_dims.push_back(static_cast<int>(keep));
    rest = s.head(keep).cast<cplx>().asDiagonal() *
           svd.matrixV().leftCols(keep).adjoint();
  }
  const double norm = rest.norm();
  if (norm == 0.0) throw InvalidArgument("cannot compress a zero state");
  std::array<CMatrix, 2> last{rest.col(0) / norm, rest.col(1) / norm};
  out.sites.push_back(std::move(last));
  return out;
}

WaveFunction mps_to_wavefunction(const MPSState& m) {
  const SectorPtr basis = enumerate_sector(m.modes(), m.electrons);
  WaveFunction w(basis);
  for (std::size_t i = 0; i < basis->size(); ++i)
    w.coeffs[static_cast<Eigen::Index>(i)] = m.amplitude(basis->state(i));
  w.normalize();
  return w;
}

cplx mps_overlap(const MPSState& m, const WaveFunction& psi) {
  if (m.modes() != psi.modes()) throw DimensionMismatch("mode count differs");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    acc += std::conj(m.amplitude(psi.basis->state(i))) *
           psi.coeffs[static_cast<Eigen::Index>(i)];
  return acc;
}

}  // namespace qembed
