#include "qembed/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qembed {

void fix_phase(CVector& v) {
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > mag + 1e-14) {
      mag = std::abs(v[i]);
      best = i;
    }
  if (mag > 0.0) v *= std::conj(v[best]) / std::abs(v[best]);
}

namespace {

struct LanczosOutcome {
  double value = 0.0;
  CVector vector;
  double residual = 0.0;
  int matvecs = 0;
};

void project_out(CVector& w, const std::vector<CVector>& against) {
  for (const CVector& u : against) w -= u.dot(w) * u;
}

// Lowest eigenpair of `op` restricted to the orthogonal complement of
// `deflate` (orthonormal vectors). Restarted Lanczos with full
// reorthogonalization; each restart starts from the current Ritz vector.
LanczosOutcome lanczos(const SectorHamiltonian& op,
                       const std::vector<CVector>& deflate,
                       const SolverOptions& opts, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(op.dimension());
  const Eigen::Index free_dim = dim - static_cast<Eigen::Index>(deflate.size());
  if (free_dim <= 0) throw InvalidArgument("no space left after deflation");
  SplitMix64 rng(seed);
  CVector start(dim);
  for (Eigen::Index i = 0; i < dim; ++i) start[i] = rng.normal();
  project_out(start, deflate);
  start.normalize();

  const Eigen::Index m_max =
      std::min<Eigen::Index>(std::max(opts.krylov_dim, 2), free_dim);
  LanczosOutcome best;
  best.residual = std::numeric_limits<double>::infinity();
  int matvecs = 0;
  CVector w(dim);

  while (matvecs < opts.max_iterations) {
    std::vector<CVector> basis;
    std::vector<double> alpha;
    std::vector<double> beta;
    basis.push_back(start);
    bool exhausted = false;
    for (Eigen::Index j = 0; j < m_max; ++j) {
      op.apply(basis.back(), w);
      ++matvecs;
      project_out(w, deflate);
      const double a = basis.back().dot(w).real();
      alpha.push_back(a);
      // Two passes of Gram-Schmidt against the whole Krylov basis.
      for (int pass = 0; pass < 2; ++pass) project_out(w, basis);
      project_out(w, deflate);
      const double b = w.norm();
      if (j + 1 == m_max) break;
      if (b < 1e-12 * std::max(1.0, std::abs(a))) {
        exhausted = true;
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const auto k = static_cast<Eigen::Index>(alpha.size());
    RVector diag = Eigen::Map<RVector>(alpha.data(), k);
    RVector off = k > 1 ? RVector(Eigen::Map<RVector>(beta.data(), k - 1)) : RVector();
    Eigen::SelfAdjointEigenSolver<RMatrix> tri;
    tri.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const RVector y = tri.eigenvectors().col(0);
    CVector x = CVector::Zero(dim);
    for (Eigen::Index i = 0; i < k; ++i) x += y[i] * basis[static_cast<std::size_t>(i)];
    project_out(x, deflate);
    x.normalize();
    op.apply(x, w);
    ++matvecs;
    project_out(w, deflate);
    const double theta = x.dot(w).real();
    const double res = (w - theta * x).norm();
    if (res < best.residual) {
      best.value = theta;
      best.vector = x;
      best.residual = res;
    }
    if (res <= opts.tolerance) break;
    if (exhausted && res > opts.tolerance) {
      // Invariant subspace found but residual polluted by rounding; restart
      // from the Ritz vector perturbed by a fresh random direction.
      CVector kick(dim);
      for (Eigen::Index i = 0; i < dim; ++i) kick[i] = rng.normal();
      project_out(kick, deflate);
      x += 1e-3 * kick / kick.norm();
      x.normalize();
    }
    start = x;
  }
  best.matvecs = matvecs;
  return best;
}

}  // namespace

GroundStateResult ground_state(const SectorHamiltonian& op,
                               const SolverOptions& opts) {
  GroundStateResult result;
  LanczosOutcome g = lanczos(op, {}, opts, opts.seed);
  if (g.residual > opts.tolerance)
    throw ConvergenceError("ground-state solver did not converge", g.residual);
  fix_phase(g.vector);
  result.energy = g.value;
  result.state = WaveFunction(op.basis(), std::move(g.vector));
  result.residual = g.residual;
  result.iterations = g.matvecs;
  if (opts.check_degeneracy && op.dimension() > 1) {
    LanczosOutcome e1 = lanczos(op, {result.state.coeffs}, opts, derive_seed(opts.seed, 1));
    result.iterations += e1.matvecs;
    // The Ritz value bounds E1 from above; with residual r the true value
    // lies within r of it.
    result.gap = e1.value - result.energy;
    result.degenerate = result.gap - e1.residual < opts.degeneracy_threshold;
  }
  return result;
}

GroundStateResult ground_state(const MolecularIntegrals& h, int electrons,
                               const SolverOptions& opts) {
  const SectorPtr basis = enumerate_sector(h.n_modes(), electrons);
  const SectorHamiltonian op(h, basis, opts.memory_budget);
  return ground_state(op, opts);
}

CMatrix dense_hamiltonian(const MolecularIntegrals& h, int electrons,
                          std::uint64_t cap) {
  const SectorPtr basis = enumerate_sector(h.n_modes(), electrons, cap);
  const int n = h.n_modes();
  const auto dim = static_cast<Eigen::Index>(basis->size());
  CMatrix mat = CMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const OccupationState s{basis->state(static_cast<std::size_t>(col)), n};
    mat(col, col) += h.core_energy();
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double v = h.one_body()(p, q);
        if (v == 0.0) continue;
        const int c[] = {p};
        const int a[] = {q};
        if (auto t = apply_term(c, a, s))
          mat(static_cast<Eigen::Index>(basis->index_of(t->state.bits)), col) += v * t->sign;
      }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int u = 0; u < n; ++u) {
            if (p == r || q == u) continue;
            const double v = h.two_body(p, q, r, u);
            if (v == 0.0) continue;
            const int c[] = {p, r};
            const int a[] = {u, q};
            if (auto t = apply_term(c, a, s))
              mat(static_cast<Eigen::Index>(basis->index_of(t->state.bits)), col) +=
                  0.5 * v * t->sign;
          }
  }
  return mat;
}

std::vector<double> dense_spectrum(const MolecularIntegrals& h, int electrons,
                                   std::uint64_t cap) {
  const CMatrix mat = dense_hamiltonian(h, electrons, cap);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mat, Eigen::EigenvaluesOnly);
  const RVector ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace qembed
