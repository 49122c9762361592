#include "qembed/embedding.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <utility>

namespace qembed {

namespace {

std::vector<int> checked_mode_set(const std::vector<int>& modes, int n,
                                  const char* what) {
  std::vector<int> out = modes;
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw InvalidArgument(std::string(what) + " contains duplicates");
  for (int p : out)
    if (p < 0 || p >= n) throw InvalidArgument(std::string(what) + " index out of range");
  return out;
}

RMatrix real_part_checked(const CMatrix& m, const char* what) {
  if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument(std::string(what) + " must be real for integral transforms");
  return m.real();
}

// Orthonormal basis of the complement of span(cols), canonical order.
RMatrix complement(const RMatrix& cols, int n) {
  const RMatrix p = RMatrix::Identity(n, n) - cols * cols.transpose();
  const SymmetricEigen eig = canonical_eigh(p, /*descending=*/true, 1e-8);
  const auto k = static_cast<Eigen::Index>(n - cols.cols());
  return eig.vectors.leftCols(k);
}

std::vector<int> iota_range(int begin, int end) {
  std::vector<int> v;
  for (int i = begin; i < end; ++i) v.push_back(i);
  return v;
}

}  // namespace

CMatrix SchmidtPartition::rotated_occupied() const {
  CMatrix out(n_modes, electrons());
  out << pure_fragment_orbitals, entangled_orbitals, core_orbitals;
  return out;
}

SchmidtPartition schmidt_bath(const SlaterDeterminant& det,
                              const std::vector<int>& fragment_modes, double tol) {
  det.validate();
  const int n_modes = det.modes();
  const int n = det.electrons();
  SchmidtPartition part;
  part.n_modes = n_modes;
  part.tolerance = tol;
  part.fragment_modes = checked_mode_set(fragment_modes, n_modes, "fragment");
  if (part.fragment_modes.empty()) throw InvalidArgument("fragment must be nonempty");
  const auto na = static_cast<Eigen::Index>(part.fragment_modes.size());

  std::vector<bool> in_frag(static_cast<std::size_t>(n_modes), false);
  for (int p : part.fragment_modes) in_frag[static_cast<std::size_t>(p)] = true;
  CMatrix xa(na, n);
  for (Eigen::Index i = 0; i < na; ++i) xa.row(i) = det.orbitals.row(part.fragment_modes[static_cast<std::size_t>(i)]);

  CMatrix v = CMatrix::Identity(n, n);
  RVector sigma = RVector::Zero(n);
  if (n > 0) {
    Eigen::JacobiSVD<CMatrix> svd(xa, Eigen::ComputeFullU | Eigen::ComputeFullV);
    v = svd.matrixV();
    sigma.head(svd.singularValues().size()) = svd.singularValues();
  }
  part.singular_values = sigma;
  const CMatrix y = det.orbitals * v;

  std::vector<Eigen::Index> pure, ent, core;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (sigma[k] >= 1.0 - tol)
      pure.push_back(k);
    else if (sigma[k] <= tol)
      core.push_back(k);
    else
      ent.push_back(k);
  }
  auto gather = [&](const std::vector<Eigen::Index>& idx) {
    CMatrix m(n_modes, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = y.col(idx[i]);
    return m;
  };
  part.pure_fragment_orbitals = gather(pure);
  part.entangled_orbitals = gather(ent);
  part.core_orbitals = gather(core);
  part.bath_orbitals = part.entangled_orbitals;
  for (int p = 0; p < n_modes; ++p)
    if (in_frag[static_cast<std::size_t>(p)]) {
      part.bath_orbitals.row(p).setZero();
      part.core_orbitals.row(p).setZero();
    }
  for (Eigen::Index k = 0; k < part.bath_orbitals.cols(); ++k)
    part.bath_orbitals.col(k).normalize();
  // Core columns lose at most tol of fragment weight; restore orthonormality.
  if (part.core_orbitals.cols() > 0) {
    Eigen::HouseholderQR<CMatrix> qr(part.core_orbitals);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n_modes, part.core_orbitals.cols());
    // Keep each column aligned with its original direction.
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
      const cplx d = q.col(k).dot(part.core_orbitals.col(k));
      if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
    }
    part.core_orbitals = q;
  }
  return part;
}

RMatrix EmbeddingProblem::core_basis() const {
  RMatrix c(n_modes, static_cast<Eigen::Index>(core_frame_modes.size()));
  for (std::size_t k = 0; k < core_frame_modes.size(); ++k)
    c.col(static_cast<Eigen::Index>(k)) = frame.col(core_frame_modes[k]);
  return c;
}

SlaterDeterminant EmbeddingProblem::core_determinant() const {
  return SlaterDeterminant::from_real(core_basis());
}

WaveFunction EmbeddingProblem::assemble(const WaveFunction& active_state) const {
  if (active_state.modes() != active_count || active_state.electrons() != n_active)
    throw DimensionMismatch("active state does not match the embedding problem");
  std::uint64_t excluded = 0;
  for (int p : excluded_frame_modes) excluded |= std::uint64_t{1} << p;
  std::vector<int> kept;
  for (int p = 0; p < active_count; ++p)
    if (!((excluded >> p) & 1U)) kept.push_back(p);

  // Active state restricted to the kept modes (excluded modes empty).
  const SectorPtr local = enumerate_sector(static_cast<int>(kept.size()), n_active);
  WaveFunction phi(local);
  for (std::size_t i = 0; i < active_state.size(); ++i) {
    const std::uint64_t bits = active_state.basis->state(i);
    if (bits & excluded) continue;
    std::uint64_t packed = 0;
    for (std::size_t k = 0; k < kept.size(); ++k)
      if ((bits >> kept[k]) & 1U) packed |= std::uint64_t{1} << k;
    phi.coeffs[static_cast<Eigen::Index>(local->index_of(packed))] =
        active_state.coeffs[static_cast<Eigen::Index>(i)];
  }
  if (phi.norm() < 1e-14)
    throw InvalidArgument("active state has no weight outside the excluded modes");
  phi.normalize();

  std::uint64_t core_bits = 0;
  for (int p : core_frame_modes) core_bits |= std::uint64_t{1} << p;
  const SectorPtr core_sector =
      enumerate_sector(n_modes, static_cast<int>(core_frame_modes.size()));
  const WaveFunction chi = WaveFunction::basis_state(core_sector, core_bits);
  const WaveFunction in_frame = wedge(phi, kept, chi);
  return rotate_orbitals(in_frame, frame.cast<cplx>());
}

EmbeddingProblem dmet_effective(const MolecularIntegrals& h,
                                const SchmidtPartition& part) {
  const int n = h.n_modes();
  if (part.n_modes != n) throw DimensionMismatch("partition and Hamiltonian mode counts differ");
  const RMatrix bath = real_part_checked(part.bath_orbitals, "bath orbitals");
  const RMatrix core = real_part_checked(part.core_orbitals, "core orbitals");
  const auto na = static_cast<Eigen::Index>(part.fragment_modes.size());
  const Eigen::Index nb = bath.cols();
  const Eigen::Index nc = core.cols();

  EmbeddingProblem prob;
  prob.scheme = "dmet";
  prob.n_modes = n;
  prob.fragment_modes = part.fragment_modes;
  prob.bath_count = static_cast<int>(nb);
  prob.active_count = static_cast<int>(na + nb);
  prob.core_electrons = static_cast<int>(nc);
  prob.n_active = part.electrons() - static_cast<int>(nc);

  RMatrix occupied_frame(n, na + nb + nc);
  occupied_frame.setZero();
  for (Eigen::Index i = 0; i < na; ++i) occupied_frame(part.fragment_modes[static_cast<std::size_t>(i)], i) = 1.0;
  occupied_frame.middleCols(na, nb) = bath;
  occupied_frame.rightCols(nc) = core;
  const double ortho =
      (occupied_frame.transpose() * occupied_frame -
       RMatrix::Identity(occupied_frame.cols(), occupied_frame.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (occupied_frame.size() > 0 && ortho > 1e-10)
    throw InvalidArgument("fragment, bath and core orbitals are not orthonormal");
  if (prob.n_active < 0 || prob.n_active > prob.active_count)
    throw InvalidArgument("active electron count inconsistent with the partition");

  prob.frame.resize(n, n);
  prob.frame.leftCols(occupied_frame.cols()) = occupied_frame;
  prob.frame.rightCols(n - occupied_frame.cols()) = complement(occupied_frame, n);
  prob.core_frame_modes = iota_range(prob.active_count, prob.active_count + static_cast<int>(nc));

  const RMatrix pc = core * core.transpose();
  const RMatrix g_core = h.coulomb_exchange(pc);
  const RMatrix act = prob.active_basis();
  prob.effective = h.transformed(act);
  prob.effective.one_body() = act.transpose() * (h.one_body() + g_core) * act;
  prob.effective.set_core_energy(0.0);
  prob.env_energy = density_energy(h, pc);
  return prob;
}

EmbeddingProblem huzinaga_effective(const MolecularIntegrals& h,
                                    const MeanFieldResult& mf,
                                    const std::vector<int>& active_orbitals,
                                    double mu) {
  const int n = h.n_modes();
  if (mf.orbitals.rows() != n) throw DimensionMismatch("mean-field result is for another model");
  const std::vector<int> a = checked_mode_set(active_orbitals, n, "active orbital set");
  if (a.empty()) throw InvalidArgument("active orbital set must be nonempty");
  const int n_occ = mf.electrons();

  std::vector<bool> in_a(static_cast<std::size_t>(n), false);
  for (int i : a) in_a[static_cast<std::size_t>(i)] = true;
  std::vector<int> env_occ, rest;
  for (int i = 0; i < n; ++i) {
    if (in_a[static_cast<std::size_t>(i)]) continue;
    (i < n_occ ? env_occ : rest).push_back(i);
  }

  EmbeddingProblem prob;
  prob.scheme = "huzinaga";
  prob.n_modes = n;
  prob.active_orbitals = a;
  prob.level_shift = mu;
  const int na = static_cast<int>(a.size());
  const int nc = static_cast<int>(env_occ.size());
  prob.active_count = na + nc;
  prob.core_electrons = nc;
  prob.n_active = n_occ - nc;
  prob.frame.resize(n, n);
  int col = 0;
  for (const std::vector<int>* list : {&a, &std::as_const(env_occ), &std::as_const(rest)})
    for (int i : *list) prob.frame.col(col++) = mf.orbitals.col(i);
  prob.core_frame_modes = iota_range(na, na + nc);
  prob.excluded_frame_modes = prob.core_frame_modes;

  const RMatrix cc = prob.core_basis();
  const RMatrix pc = cc * cc.transpose();
  const RMatrix shifted = mf.fock - mu * RMatrix::Identity(n, n);
  const RMatrix h_tilde =
      h.one_body() + h.coulomb_exchange(pc) - (shifted * pc + pc * shifted);
  const RMatrix act = prob.active_basis();
  prob.effective = h.transformed(act);
  prob.effective.one_body() = act.transpose() * h_tilde * act;
  prob.effective.one_body() =
      0.5 * (prob.effective.one_body() + prob.effective.one_body().transpose()).eval();
  prob.effective.set_core_energy(0.0);
  prob.env_energy = density_energy(h, pc);
  return prob;
}

EmbeddingResult embed_solve(const EmbeddingProblem& prob, const SolverOptions& opts) {
  EmbeddingResult out;
  out.fragment = ground_state(prob.effective, prob.n_active, opts);
  out.active_energy = out.fragment.energy;
  out.total_energy = prob.env_energy + out.active_energy;
  const WaveFunction& frag = out.fragment.state;
  for (std::size_t i = 0; i < frag.size(); ++i) {
    const std::uint64_t bits = frag.basis->state(i);
    for (int p : prob.excluded_frame_modes)
      if ((bits >> p) & 1U) out.leakage += std::norm(frag.coeffs[static_cast<Eigen::Index>(i)]);
  }
  out.guiding = prob.assemble(frag);
  return out;
}

}  // namespace qembed
