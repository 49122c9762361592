#include "qembed/model.hpp"

#include <algorithm>
#include <cmath>

namespace qembed {

MolecularIntegrals::MolecularIntegrals(int n_modes)
    : n_(n_modes),
      h_(RMatrix::Zero(n_modes, n_modes)),
      g_(static_cast<std::size_t>(n_modes) * n_modes * n_modes * n_modes, 0.0) {
  if (n_modes < 0 || n_modes > kMaxModes)
    throw InvalidArgument("mode count must be in [0, 63]");
}

void MolecularIntegrals::set_two_body(int p, int q, int r, int s,
                                      double value) {
  for (auto [a, b] : {std::pair{p, q}, std::pair{q, p}})
    for (auto [c, d] : {std::pair{r, s}, std::pair{s, r}}) {
      g_[index(a, b, c, d)] = value;
      g_[index(c, d, a, b)] = value;
    }
}

bool MolecularIntegrals::has_two_body() const {
  return std::any_of(g_.begin(), g_.end(), [](double v) { return v != 0.0; });
}

double MolecularIntegrals::symmetry_error() const {
  double err = (h_ - h_.transpose()).cwiseAbs().maxCoeff();
  if (n_ == 0) return 0.0;
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int r = 0; r < n_; ++r)
        for (int s = 0; s < n_; ++s) {
          const double v = two_body(p, q, r, s);
          err = std::max({err, std::abs(v - two_body(q, p, r, s)),
                          std::abs(v - two_body(p, q, s, r)),
                          std::abs(v - two_body(r, s, p, q))});
        }
  return err;
}

void MolecularIntegrals::validate(double tol) const {
  const double err = symmetry_error();
  if (err > tol)
    throw InvalidArgument("integrals violate Hermiticity/8-fold symmetry by " +
                          std::to_string(err));
}

MolecularIntegrals MolecularIntegrals::transformed(const RMatrix& c) const {
  if (c.rows() != n_)
    throw DimensionMismatch("orbital matrix rows must equal mode count");
  const int k = static_cast<int>(c.cols());
  const auto n = static_cast<Eigen::Index>(n_);
  MolecularIntegrals out(k);
  out.core_energy_ = core_energy_;
  out.h_ = c.transpose() * h_ * c;

  // Four quarter transformations, last index first.
  std::vector<double> a(static_cast<std::size_t>(n * n * n * k), 0.0);
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int r = 0; r < n_; ++r)
        for (int s = 0; s < n_; ++s) {
          const double v = two_body(p, q, r, s);
          if (v == 0.0) continue;
          for (int d = 0; d < k; ++d)
            a[((static_cast<std::size_t>(p) * n + q) * n + r) * k + d] += v * c(s, d);
        }
  std::vector<double> b(static_cast<std::size_t>(n * n * k * k), 0.0);
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int r = 0; r < n_; ++r)
        for (int d = 0; d < k; ++d) {
          const double v = a[((static_cast<std::size_t>(p) * n + q) * n + r) * k + d];
          if (v == 0.0) continue;
          for (int cc = 0; cc < k; ++cc)
            b[((static_cast<std::size_t>(p) * n + q) * k + cc) * k + d] += v * c(r, cc);
        }
  std::vector<double> e(static_cast<std::size_t>(n * k * k * k), 0.0);
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q)
      for (int cc = 0; cc < k; ++cc)
        for (int d = 0; d < k; ++d) {
          const double v = b[((static_cast<std::size_t>(p) * n + q) * k + cc) * k + d];
          if (v == 0.0) continue;
          for (int bb = 0; bb < k; ++bb)
            e[((static_cast<std::size_t>(p) * k + bb) * k + cc) * k + d] += v * c(q, bb);
        }
  for (int p = 0; p < n_; ++p)
    for (int bb = 0; bb < k; ++bb)
      for (int cc = 0; cc < k; ++cc)
        for (int d = 0; d < k; ++d) {
          const double v = e[((static_cast<std::size_t>(p) * k + bb) * k + cc) * k + d];
          if (v == 0.0) continue;
          for (int aa = 0; aa < k; ++aa) out.g_[out.index(aa, bb, cc, d)] += v * c(p, aa);
        }
  return out;
}

RMatrix MolecularIntegrals::coulomb_exchange(const RMatrix& d) const {
  if (d.rows() != n_ || d.cols() != n_)
    throw DimensionMismatch("density must be N x N");
  RMatrix out = RMatrix::Zero(n_, n_);
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q) {
      double acc = 0.0;
      for (int r = 0; r < n_; ++r)
        for (int s = 0; s < n_; ++s)
          acc += (two_body(p, q, r, s) - two_body(p, r, s, q)) * d(r, s);
      out(p, q) = acc;
    }
  return out;
}

int ImpurityModel::negative_count() const {
  return static_cast<int>(
      std::count_if(epsilons.begin(), epsilons.end(), [](double e) { return e < 0; }));
}

void ImpurityModel::validate() const {
  const int n = n_modes();
  integrals.validate();
  if (impurity_modes < 0 || impurity_modes > n)
    throw InvalidArgument("impurity mode count out of range");
  if (static_cast<int>(epsilons.size()) != n)
    throw InvalidArgument("need one single-particle energy per mode");
  for (double e : epsilons)
    if (e < -1.0 || e > 1.0)
      throw InvalidArgument("single-particle energy outside [-1, 1]");
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          if (std::max({p, q, r, s}) >= impurity_modes &&
              integrals.two_body(p, q, r, s) != 0.0)
            throw InvalidArgument("two-body term outside the impurity modes");
}

namespace {

double min_nonzero_abs(const std::vector<double>& eps) {
  double w = 0.0;
  for (double e : eps)
    if (e != 0.0 && (w == 0.0 || std::abs(e) < w)) w = std::abs(e);
  return w;
}

std::vector<double> draw_epsilons(int n, const EpsilonSpec& spec,
                                  SplitMix64& rng) {
  if (!spec.values.empty()) {
    if (static_cast<int>(spec.values.size()) != n)
      throw InvalidArgument("explicit epsilon list must have one entry per mode");
    for (double e : spec.values)
      if (!(e >= -1.0 && e <= 1.0))
        throw InvalidArgument("single-particle energy outside [-1, 1]");
    return spec.values;
  }
  if (spec.band < 0.0 || spec.band >= 1.0)
    throw InvalidArgument("excluded band must lie in [0, 1)");
  const int negative = spec.negative.value_or(n / 2);
  if (negative < 0 || negative > n)
    throw InvalidArgument("negative mode count out of range");
  std::vector<double> eps(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double mag = rng.uniform(spec.band, 1.0);
    eps[static_cast<std::size_t>(j)] = j < negative ? -mag : mag;
  }
  // Keep the band strict: a draw of exactly `band` is allowed (closed edge).
  return eps;
}

// Antisymmetrized physicists' tensor of sum h_pqrs a+_p a+_q a_r a_s.
std::vector<double> antisymmetrize(const std::vector<double>& h, int m) {
  auto at = [&](int p, int q, int r, int s) {
    return h[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s];
  };
  std::vector<double> out(h.size());
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s)
          out[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s] =
              0.25 * (at(p, q, r, s) - at(q, p, r, s) - at(p, q, s, r) +
                      at(q, p, s, r));
  return out;
}

}  // namespace

ImpurityModel build_impurity_model(int n_modes, int impurity_modes,
                                   const EpsilonSpec& eps_spec,
                                   const ImpuritySpec& imp, std::uint64_t seed,
                                   Hybridization hyb) {
  if (impurity_modes < 0 || impurity_modes > n_modes)
    throw InvalidArgument("impurity mode count must satisfy 0 <= M <= N");
  SplitMix64 rng(seed);
  ImpurityModel model;
  model.impurity_modes = impurity_modes;
  model.integrals = MolecularIntegrals(n_modes);

  std::vector<double> eps = draw_epsilons(n_modes, eps_spec, rng);
  std::vector<int> order(static_cast<std::size_t>(n_modes));
  for (int j = 0; j < n_modes; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eps[static_cast<std::size_t>(a)] < eps[static_cast<std::size_t>(b)]; });
  model.epsilons.resize(static_cast<std::size_t>(n_modes));
  for (int j = 0; j < n_modes; ++j)
    model.epsilons[static_cast<std::size_t>(j)] = eps[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
  model.omega = min_nonzero_abs(model.epsilons);

  model.free_orbitals = hyb == Hybridization::kRandom
                            ? random_orthogonal(n_modes, rng)
                            : RMatrix::Identity(n_modes, n_modes);
  const RVector diag = Eigen::Map<const RVector>(model.epsilons.data(), n_modes);
  model.integrals.one_body() =
      model.free_orbitals * diag.asDiagonal() * model.free_orbitals.transpose();
  // Exact symmetry, independent of rounding in the product above.
  RMatrix& h = model.integrals.one_body();
  h = 0.5 * (h + h.transpose()).eval();

  const int m = impurity_modes;
  MolecularIntegrals& g = model.integrals;
  if (imp.zero) {
    // free model
  } else if (imp.amplitudes.empty()) {
    for (int p = 0; p < m; ++p)
      for (int q = 0; q <= p; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s <= r; ++s) {
            if (p * m + q < r * m + s) continue;
            g.set_two_body(p, q, r, s, rng.uniform(-imp.strength, imp.strength));
          }
  } else {
    const auto expected = static_cast<std::size_t>(m) * m * m * m;
    if (imp.amplitudes.size() != expected)
      throw InvalidArgument("impurity amplitudes must have M^4 entries");
    auto amp = [&](int p, int q, int r, int s) {
      return imp.amplitudes[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s];
    };
    // Chemists' candidate: (pq|rs) = 2 h_{p r s q}, projected onto the
    // 8-fold symmetric subspace.
    std::vector<double> chem(expected);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s)
            chem[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s] =
                imp.chemist ? amp(p, q, r, s) : 2.0 * amp(p, r, s, q);
    auto c = [&](int p, int q, int r, int s) {
      return chem[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s];
    };
    std::vector<double> sym(expected);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s)
            sym[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s] =
                (c(p, q, r, s) + c(q, p, r, s) + c(p, q, s, r) + c(q, p, s, r) +
                 c(r, s, p, q) + c(s, r, p, q) + c(r, s, q, p) + c(s, r, q, p)) /
                8.0;
    // The symmetrized tensor must describe the same operator as the input.
    std::vector<double> phys_in(expected);
    std::vector<double> phys_sym(expected);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s) {
            const auto i = ((static_cast<std::size_t>(p) * m + q) * m + r) * m + s;
            const auto j = ((static_cast<std::size_t>(p) * m + s) * m + q) * m + r;
            phys_in[i] = imp.chemist ? 0.5 * chem[j] : amp(p, q, r, s);
            phys_sym[i] = 0.5 * sym[j];
          }
    const auto a_in = antisymmetrize(phys_in, m);
    const auto a_sym = antisymmetrize(phys_sym, m);
    for (std::size_t i = 0; i < expected; ++i)
      if (std::abs(a_in[i] - a_sym[i]) > 1e-12)
        throw InvalidArgument(
            "impurity interaction is not Hermitian or not representable by "
            "real 8-fold symmetric integrals");
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s)
            g.two_body_tensor()[g.index(p, q, r, s)] =
                sym[((static_cast<std::size_t>(p) * m + q) * m + r) * m + s];
  }
  model.validate();
  return model;
}

int interaction_term_count(const MolecularIntegrals& m) {
  const int n = m.n_modes();
  int count = 0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s)
          if (p * n + q >= r * n + s && m.two_body(p, q, r, s) != 0.0) ++count;
  return count;
}

MolecularIntegrals build_oligomer(const MolecularIntegrals& monomer, int copies,
                                  const std::optional<OligomerCoupling>& coupling) {
  const int nm = monomer.n_modes();
  if (copies < 1) throw InvalidArgument("oligomer needs at least one copy");
  if (static_cast<long>(copies) * nm > kMaxModes)
    throw InvalidArgument("oligomer exceeds 63 modes");
  if (copies == 1) return monomer;
  const int n = copies * nm;
  MolecularIntegrals out(n);
  out.set_core_energy(copies * monomer.core_energy());
  for (int k = 0; k < copies; ++k) {
    const int off = k * nm;
    out.one_body().block(off, off, nm, nm) = monomer.one_body();
    for (int p = 0; p < nm; ++p)
      for (int q = 0; q < nm; ++q)
        for (int r = 0; r < nm; ++r)
          for (int s = 0; s < nm; ++s)
            out.two_body_tensor()[out.index(off + p, off + q, off + r, off + s)] =
                monomer.two_body(p, q, r, s);
  }
  if (coupling) {
    const RMatrix block = coupling->block.value_or(RMatrix::Identity(nm, nm));
    if (block.rows() != nm || block.cols() != nm)
      throw DimensionMismatch("coupling block must be N_mono x N_mono");
    for (int k = 0; k + 1 < copies; ++k) {
      const int a = k * nm;
      const int b = (k + 1) * nm;
      out.one_body().block(a, b, nm, nm) += coupling->scale * block;
      out.one_body().block(b, a, nm, nm) += coupling->scale * block.transpose();
    }
  }
  return out;
}

MolecularIntegrals spin_double(const MolecularIntegrals& spatial) {
  const int n = spatial.n_modes();
  if (2 * n > kMaxModes) throw InvalidArgument("spin-doubled model exceeds 63 modes");
  MolecularIntegrals out(2 * n);
  out.set_core_energy(spatial.core_energy());
  out.one_body().block(0, 0, n, n) = spatial.one_body();
  out.one_body().block(n, n, n, n) = spatial.one_body();
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s)
              out.two_body_tensor()[out.index(p + s1 * n, q + s1 * n, r + s2 * n,
                                              s + s2 * n)] =
                  spatial.two_body(p, q, r, s);
  return out;
}

MolecularIntegrals hubbard_chain(int sites, double t, double u, bool periodic) {
  MolecularIntegrals m(sites);
  for (int i = 0; i + 1 < sites; ++i) {
    m.one_body()(i, i + 1) = -t;
    m.one_body()(i + 1, i) = -t;
  }
  if (periodic && sites > 2) {
    m.one_body()(0, sites - 1) = -t;
    m.one_body()(sites - 1, 0) = -t;
  }
  for (int i = 0; i < sites; ++i) m.set_two_body(i, i, i, i, u);
  return m;
}

MolecularIntegrals random_integrals(int n_modes, std::uint64_t seed,
                                    double scale) {
  SplitMix64 rng(seed);
  MolecularIntegrals m(n_modes);
  for (int p = 0; p < n_modes; ++p)
    for (int q = 0; q <= p; ++q) {
      const double v = rng.uniform(-1.0, 1.0);
      m.one_body()(p, q) = v;
      m.one_body()(q, p) = v;
    }
  const int n = n_modes;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s)
          if (p * n + q >= r * n + s)
            m.set_two_body(p, q, r, s, rng.uniform(-scale, scale));
  return m;
}

}  // namespace qembed
