#include "qembed/impurity.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "qembed/meanfield.hpp"

namespace qembed {

namespace {

// a-frame ladder on eigenmode j expressed through b ladders.
Ladder to_b(int j, bool creation, int n_negative) {
  return j < n_negative ? Ladder{j, !creation} : Ladder{j, creation};
}

// Sign s with |T>_b = s |T xor holes>_a.
int particle_hole_sign(std::uint64_t t, std::uint64_t holes, int n_negative) {
  std::vector<Ladder> ops;
  std::uint64_t bits = t;
  while (bits) {
    const int j = std::countr_zero(bits);
    ops.push_back(Ladder{j, j >= n_negative});
    bits &= bits - 1;
  }
  const auto r = apply_ladders(ops, holes);
  return r->second;
}

std::vector<int> iota_vec(int begin, int end) {
  std::vector<int> v;
  for (int i = begin; i < end; ++i) v.push_back(i);
  return v;
}

// Orthonormal basis of {x in span(cols) : first m components vanish}.
RMatrix impurity_free_part(const RMatrix& cols, int m) {
  if (cols.cols() == 0 || m == 0) return cols;
  const RMatrix top = cols.topRows(m);
  Eigen::JacobiSVD<RMatrix> svd(top, Eigen::ComputeFullV);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10) ++rank;
  const RMatrix null = svd.matrixV().rightCols(cols.cols() - rank);
  RMatrix out = cols * null;
  // Exact zeros on the impurity rows; re-orthonormalize the rest.
  out.topRows(m).setZero();
  if (out.cols() > 0) {
    Eigen::HouseholderQR<RMatrix> qr(out);
    out = qr.householderQ() * RMatrix::Identity(out.rows(), out.cols());
  }
  return out;
}

RMatrix orthogonal_complement(const RMatrix& cols, int n) {
  const RMatrix p = RMatrix::Identity(n, n) - cols * cols.transpose();
  const SymmetricEigen eig = canonical_eigh(p, /*descending=*/true, 1e-8);
  return eig.vectors.leftCols(n - cols.cols());
}

double snap(double x) {
  if (std::abs(x) < 1e-12) return 0.0;
  if (std::abs(1.0 - x) < 1e-12) return 1.0;
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

std::vector<std::uint64_t> ParticleHoleFrame::b_basis() const {
  const SectorPtr sector = enumerate_sector(n_modes, electrons);
  std::vector<std::uint64_t> out;
  out.reserve(sector->size());
  for (std::uint64_t s : sector->states()) out.push_back(s ^ holes());
  std::sort(out.begin(), out.end());
  return out;
}

ParticleHoleFrame particle_hole(const ImpurityModel& m, int electrons) {
  m.validate();
  const int n = m.n_modes();
  if (electrons < 0 || electrons > n) throw InvalidArgument("electron count out of range");
  ParticleHoleFrame f;
  f.n_modes = n;
  f.electrons = electrons;
  f.n_negative = m.negative_count();
  f.eigenmodes = m.free_orbitals;
  for (double e : m.epsilons) {
    f.abs_epsilons.push_back(std::abs(e));
    if (e < 0) f.energy_shift += e;
  }
  f.reference = SlaterDeterminant::from_real(m.free_orbitals.leftCols(f.n_negative));

  const MolecularIntegrals t = m.integrals.transformed(m.free_orbitals);
  const int nn = f.n_negative;
  FermionOperator op(n);
  op.add_constant(t.core_energy() - f.energy_shift);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double v = t.one_body()(p, q);
      if (std::abs(v) < 1e-15) continue;
      op.add({to_b(p, true, nn), to_b(q, false, nn)}, v);
    }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          if (p == r || q == s) continue;
          const double v = t.two_body(p, q, r, s);
          if (std::abs(v) < 1e-15) continue;
          op.add({to_b(p, true, nn), to_b(r, true, nn), to_b(s, false, nn),
                  to_b(q, false, nn)},
                 0.5 * v);
        }
  op.prune(1e-14);
  f.transformed = std::move(op);
  return f;
}

WaveFunction to_eigenmodes(const WaveFunction& psi, const ParticleHoleFrame& f) {
  return rotate_orbitals(psi, f.eigenmodes.transpose().cast<cplx>());
}

FockVector to_particle_hole(const WaveFunction& psi, const ParticleHoleFrame& f) {
  const WaveFunction eig = to_eigenmodes(psi, f);
  FockVector v;
  v.modes = f.n_modes;
  v.states = f.b_basis();
  v.coeffs = CVector::Zero(static_cast<Eigen::Index>(v.states.size()));
  const std::uint64_t holes = f.holes();
  for (std::size_t i = 0; i < eig.size(); ++i) {
    const std::uint64_t t = eig.basis->state(i) ^ holes;
    const auto k = v.find(t);
    v.coeffs[static_cast<Eigen::Index>(*k)] =
        static_cast<double>(particle_hole_sign(t, holes, f.n_negative)) *
        eig.coeffs[static_cast<Eigen::Index>(i)];
  }
  return v;
}

OneBodyRDM particle_hole_rdm(const OneBodyRDM& rdm, int n_negative) {
  const int n = rdm.modes();
  CMatrix g = CMatrix::Zero(n, n);
  const int h = n_negative;
  g.topLeftCorner(h, h) = CMatrix::Identity(h, h) - rdm.gamma.topLeftCorner(h, h).transpose();
  g.bottomRightCorner(n - h, n - h) = rdm.gamma.bottomRightCorner(n - h, n - h);
  return {g};
}

int max_excitations(const WaveFunction& psi, const ParticleHoleFrame& f, double tol) {
  const WaveFunction eig = to_eigenmodes(psi, f);
  int best = 0;
  for (std::size_t i = 0; i < eig.size(); ++i)
    if (std::abs(eig.coeffs[static_cast<Eigen::Index>(i)]) > tol)
      best = std::max(best, std::popcount(eig.basis->state(i) ^ f.holes()));
  return best;
}

TruncationResult truncate_low_energy(const ImpurityModel& m, int electrons,
                                     double eps, std::optional<int> m_cut) {
  if (!(eps > 0.0)) throw InvalidArgument("target precision must be positive");
  const int n = m.n_modes();
  const int mm = m.impurity_modes;
  TruncationResult out;
  out.cutoff_terms = m_cut.value_or(std::max(1, interaction_term_count(m.integrals)));
  if (out.cutoff_terms < 1) throw InvalidArgument("cutoff term count must be positive");
  out.threshold = eps / out.cutoff_terms;

  std::vector<int> kept;
  for (int j = 0; j < n; ++j) {
    if (std::abs(m.epsilons[static_cast<std::size_t>(j)]) <= out.threshold) {
      out.dropped.push_back(j);
      if (m.epsilons[static_cast<std::size_t>(j)] < 0) ++out.dropped_occupied;
    } else {
      kept.push_back(j);
    }
  }
  out.electrons = electrons - out.dropped_occupied;
  if (out.dropped.empty()) {
    out.model = m;
    out.basis = RMatrix::Identity(n, n);
    return out;
  }
  if (out.electrons < 0 || out.electrons > static_cast<int>(kept.size()))
    throw InvalidArgument("electron count incompatible with the frozen modes");

  RMatrix frozen_occ(n, out.dropped_occupied);
  RMatrix keep(n, static_cast<Eigen::Index>(kept.size()));
  int c = 0;
  for (int j : out.dropped)
    if (m.epsilons[static_cast<std::size_t>(j)] < 0) frozen_occ.col(c++) = m.free_orbitals.col(j);
  for (std::size_t k = 0; k < kept.size(); ++k)
    keep.col(static_cast<Eigen::Index>(k)) = m.free_orbitals.col(kept[k]);

  // New modes: the impurity directions projected into the kept space first.
  const auto nk = keep.cols();
  const RMatrix y = keep.topRows(mm).transpose();  // nk x M coordinates
  Eigen::JacobiSVD<RMatrix> svd(y);
  if (mm > 0 && svd.singularValues().minCoeff() < 1e-8)
    throw InvalidArgument("frozen modes remove an impurity direction");
  RMatrix r(nk, nk);
  if (mm > 0) {
    Eigen::HouseholderQR<RMatrix> qr(y);
    const RMatrix qy = qr.householderQ() * RMatrix::Identity(nk, mm);
    r << qy, orthogonal_complement(qy, static_cast<int>(nk));
  } else {
    r = RMatrix::Identity(nk, nk);
  }
  out.basis = keep * r;

  const RMatrix pf = frozen_occ * frozen_occ.transpose();
  MolecularIntegrals t = m.integrals.transformed(out.basis);
  RMatrix h = out.basis.transpose() *
              (m.integrals.one_body() + m.integrals.coulomb_exchange(pf)) * out.basis;
  h = 0.5 * (h + h.transpose()).eval();
  t.one_body() = h;
  t.set_core_energy(density_energy(m.integrals, pf));
  const int nn = static_cast<int>(nk);
  for (int p = 0; p < nn; ++p)
    for (int q = 0; q < nn; ++q)
      for (int rr = 0; rr < nn; ++rr)
        for (int s = 0; s < nn; ++s)
          if (std::max({p, q, rr, s}) >= mm) t.two_body_tensor()[t.index(p, q, rr, s)] = 0.0;

  ImpurityModel nm;
  nm.impurity_modes = mm;
  nm.integrals = std::move(t);
  const SymmetricEigen eig = canonical_eigh(h);
  nm.epsilons.assign(eig.values.data(), eig.values.data() + eig.values.size());
  for (double& e : nm.epsilons) e = std::clamp(e, -1.0, 1.0);
  nm.free_orbitals = eig.vectors;
  nm.omega = 0.0;
  for (double e : nm.epsilons)
    if (e != 0.0 && (nm.omega == 0.0 || std::abs(e) < nm.omega)) nm.omega = std::abs(e);
  out.model = std::move(nm);
  return out;
}

ActiveSelection select_active(const OneBodyRDM& gamma, const ImpurityModel& m,
                              int electrons, int k, FreezePolicy policy) {
  const int n = m.n_modes();
  const int mm = m.impurity_modes;
  if (gamma.modes() != n) throw DimensionMismatch("RDM and model mode counts differ");
  if (k > n) throw InvalidArgument("K exceeds the mode count");
  if (k < 2 * mm) throw InvalidArgument("K must be at least 2M");
  if (electrons < 0 || electrons > n) throw InvalidArgument("electron count out of range");

  const int nn = m.negative_count();
  const RMatrix lminus = impurity_free_part(m.free_orbitals.leftCols(nn), mm);
  const RMatrix lplus = impurity_free_part(m.free_orbitals.rightCols(n - nn), mm);
  RMatrix l_all(n, lminus.cols() + lplus.cols());
  l_all << lplus, lminus;
  const RMatrix ext = orthogonal_complement(l_all, n);

  ActiveSelection sel;
  sel.n_modes = n;
  sel.requested_k = k;
  sel.l_plus_dim = static_cast<int>(lplus.cols());
  sel.l_minus_dim = static_cast<int>(lminus.cols());

  // Branch eigenmodes, each listed in freezing order.
  auto branch = [&](const RMatrix& l, bool plus) {
    const NaturalOrbitals no = natural_orbitals(gamma.in_basis(l.cast<cplx>()));
    std::vector<std::pair<CVector, double>> modes;  // descending occupation
    for (Eigen::Index i = 0; i < no.occupations.size(); ++i)
      modes.emplace_back(l.cast<cplx>() * no.orbitals.col(i), snap(no.occupations[i]));
    // + freezes the emptiest first, - freezes the fullest first.
    if (plus) std::reverse(modes.begin(), modes.end());
    return modes;
  };
  const auto plus = branch(lplus, true);
  const auto minus = branch(lminus, false);
  auto cost = [&](bool is_plus, std::size_t idx) {
    if (is_plus) return idx < plus.size() ? std::sqrt(plus[idx].second) : INFINITY;
    return idx < minus.size() ? std::sqrt(1.0 - minus[idx].second) : INFINITY;
  };

  const int dp = sel.l_plus_dim;
  const int dm = sel.l_minus_dim;
  const int target = std::min(n - k, dp + dm);
  if (policy == FreezePolicy::kAuto)
    policy = k >= 4 * mm ? FreezePolicy::kProof : FreezePolicy::kBalanced;
  sel.policy = policy;
  int fp = 0, fm = 0;
  if (policy == FreezePolicy::kProof) {
    const int keep = k / 2 - mm;
    fp = std::clamp(dp - keep, 0, dp);
    fm = std::clamp(dm - keep, 0, dm);
  } else {
    fp = target / 2;
    fm = target / 2;
    if (target % 2) (cost(true, static_cast<std::size_t>(fp)) <= cost(false, static_cast<std::size_t>(fm)) ? fp : fm) += 1;
    fp = std::min(fp, dp);
    fm = std::min(fm, dm);
  }
  // Reach exactly `target` frozen modes.
  while (fp + fm > target) {
    if (fp > 0 && (fm == 0 || cost(true, static_cast<std::size_t>(fp - 1)) >= cost(false, static_cast<std::size_t>(fm - 1))))
      --fp;
    else
      --fm;
  }
  while (fp + fm < target) {
    const double cp = fp < dp ? cost(true, static_cast<std::size_t>(fp)) : INFINITY;
    const double cm = fm < dm ? cost(false, static_cast<std::size_t>(fm)) : INFINITY;
    (cp <= cm ? fp : fm) += 1;
  }

  const int active = n - fp - fm;
  sel.active_count = active;
  sel.basis.resize(n, n);
  int col = 0;
  auto push = [&](const CVector& x, double occ) {
    sel.basis.col(col) = x;
    sel.occupations.push_back(occ);
    ++col;
  };
  for (Eigen::Index i = 0; i < ext.cols(); ++i) {
    const CVector x = ext.col(i).cast<cplx>();
    push(x, gamma.occupation(x));
  }
  for (std::size_t i = static_cast<std::size_t>(fp); i < plus.size(); ++i) push(plus[i].first, plus[i].second);
  for (std::size_t i = static_cast<std::size_t>(fm); i < minus.size(); ++i) push(minus[i].first, minus[i].second);
  for (int i = 0; i < fm; ++i) {
    sel.i_minus.push_back(col);
    sel.delta_bound += std::sqrt(1.0 - minus[static_cast<std::size_t>(i)].second);
    push(minus[static_cast<std::size_t>(i)].first, minus[static_cast<std::size_t>(i)].second);
  }
  for (int i = 0; i < fp; ++i) {
    sel.i_plus.push_back(col);
    sel.delta_bound += std::sqrt(plus[static_cast<std::size_t>(i)].second);
    push(plus[static_cast<std::size_t>(i)].first, plus[static_cast<std::size_t>(i)].second);
  }
  return sel;
}

namespace {

// psi in the selection frame with the freeze constraints applied.
WaveFunction projected_in_frame(const WaveFunction& psi, const ActiveSelection& sel) {
  if (psi.modes() != sel.n_modes) throw DimensionMismatch("state and selection mode counts differ");
  WaveFunction f = rotate_orbitals(psi, sel.basis.adjoint());
  std::uint64_t filled = 0, empty = 0;
  for (int p : sel.i_minus) filled |= std::uint64_t{1} << p;
  for (int p : sel.i_plus) empty |= std::uint64_t{1} << p;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::uint64_t s = f.basis->state(i);
    if ((s & filled) != filled || (s & empty) != 0) f.coeffs[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return f;
}

}  // namespace

double projected_weight(const WaveFunction& psi, const ActiveSelection& sel) {
  return projected_in_frame(psi, sel).norm();
}

ProjectionResult project_excitations(const WaveFunction& psi, const ActiveSelection& sel) {
  WaveFunction f = projected_in_frame(psi, sel);
  if (f.norm() < 1e-14)
    throw InvalidArgument("projection annihilates the state (delta bound " +
                          std::to_string(sel.delta_bound) + ")");
  f.normalize();
  ProjectionResult out;
  out.state = rotate_orbitals(f, sel.basis);
  out.achieved_overlap = std::abs(overlap(out.state, psi));
  out.delta_bound = sel.delta_bound;
  return out;
}

Theorem1State theorem1_state(const WaveFunction& psi, const ActiveSelection& sel) {
  WaveFunction f = projected_in_frame(psi, sel);
  if (f.norm() < 1e-14)
    throw InvalidArgument("projection annihilates the state (delta bound " +
                          std::to_string(sel.delta_bound) + ")");
  f.normalize();
  Theorem1State out;
  out.frame = sel.basis;
  out.projected = rotate_orbitals(f, sel.basis);
  out.overlap = std::abs(overlap(out.projected, psi));

  const int k = sel.active_count;
  const int fm = static_cast<int>(sel.i_minus.size());
  CMatrix theta(sel.n_modes, fm);
  for (int i = 0; i < fm; ++i) theta.col(i) = sel.basis.col(sel.i_minus[static_cast<std::size_t>(i)]);
  out.theta = SlaterDeterminant(std::move(theta));
  out.theta_frame_modes = sel.i_minus;
  const int active_electrons = psi.electrons() - fm;
  if (active_electrons < 0 || active_electrons > k)
    throw InvalidArgument("selection leaves an impossible active electron count");
  out.phi = WaveFunction(enumerate_sector(k, active_electrons));
  const std::uint64_t active_mask = k == 0 ? 0 : (std::uint64_t{1} << k) - 1;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::uint64_t s = f.basis->state(i);
    const cplx c = f.coeffs[static_cast<Eigen::Index>(i)];
    if (c == 0.0) continue;
    // Active modes precede every frozen mode, so no reordering sign.
    out.phi.coeffs[static_cast<Eigen::Index>(out.phi.basis->index_of(s & active_mask))] = c;
  }
  return out;
}

WaveFunction Theorem1State::reconstruct() const {
  const int n = static_cast<int>(frame.rows());
  const int k = phi.modes();
  std::uint64_t filled = 0;
  for (int p : theta_frame_modes) filled |= std::uint64_t{1} << p;
  const SectorPtr sector = enumerate_sector(n, std::popcount(filled));
  const WaveFunction chi = WaveFunction::basis_state(sector, filled);
  return rotate_orbitals(wedge(phi, iota_vec(0, k), chi), frame);
}

MixedOverlap mixed_guiding_overlap(const WaveFunction& psi, int k_exc,
                                   const ParticleHoleFrame& frame) {
  if (k_exc < 0) throw InvalidArgument("excitation cap must be nonnegative");
  const WaveFunction eig = to_eigenmodes(psi, frame);
  MixedOverlap out;
  for (std::size_t i = 0; i < eig.size(); ++i)
    if (std::popcount(eig.basis->state(i) ^ frame.holes()) <= k_exc) {
      ++out.dim_v;
      out.weight += std::norm(eig.coeffs[static_cast<Eigen::Index>(i)]);
    }
  for (int j = 0; j <= std::min(k_exc, frame.n_modes); ++j) out.dim_v_fock += binomial(frame.n_modes, j);
  out.overlap_with_tau = out.dim_v ? out.weight / static_cast<double>(out.dim_v) : 0.0;
  out.overlap_fock = out.weight / static_cast<double>(out.dim_v_fock);
  return out;
}

PartialNumberStats partial_number_stats(const OneBodyRDM& gamma, const ImpurityModel& m) {
  if (!(m.omega > 0.0)) throw InvalidArgument("partial number blocks need a positive gap");
  const double log_term = std::log(2.0 / m.omega);
  PartialNumberStats out;
  out.block_size = std::max(1, static_cast<int>(std::ceil(14.0 * m.impurity_modes * log_term)));
  const NaturalOrbitals no = natural_orbitals(gamma);
  const auto n = no.occupations.size();
  for (Eigen::Index start = 0, s = 1; start < n; start += out.block_size, ++s) {
    const Eigen::Index len = std::min<Eigen::Index>(out.block_size, n - start);
    PartialNumberRow row;
    row.s = static_cast<int>(s);
    row.block_sum = no.occupations.segment(start, len).sum();
    row.reference = std::exp(-static_cast<double>(s));
    const double scale = std::max(1, m.impurity_modes) * log_term * row.reference;
    out.fitted_c0 = std::max(out.fitted_c0, row.block_sum / scale);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace qembed
