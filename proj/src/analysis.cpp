#include "qembed/analysis.hpp"

#include <cmath>

namespace qembed {

OneBodyRDM one_rdm(const WaveFunction& psi) {
  const int n = psi.modes();
  const SectorBasis& basis = *psi.basis;
  CMatrix g = CMatrix::Zero(n, n);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const cplx cj = psi.coeffs[static_cast<Eigen::Index>(j)];
    if (cj == 0.0) continue;
    const std::uint64_t s = basis.state(j);
    for (int q = 0; q < n; ++q) {
      if (!((s >> q) & 1U)) continue;
      g(q, q) += std::norm(cj);
      const std::uint64_t removed = s ^ (std::uint64_t{1} << q);
      const int sign_q = parity_below(s, q);
      for (int p = 0; p < n; ++p) {
        if ((s >> p) & 1U) continue;
        const std::uint64_t target = removed | (std::uint64_t{1} << p);
        const int sign = sign_q * parity_below(removed, p);
        // <psi| a+_p a_q |s> picks the amplitude of the target pattern.
        g(p, q) += static_cast<double>(sign) *
                   std::conj(psi.coeffs[static_cast<Eigen::Index>(basis.index_of(target))]) * cj;
      }
    }
  }
  return {g};
}

NaturalOrbitals natural_orbitals(const OneBodyRDM& rdm) {
  const CMatrix herm = 0.5 * (rdm.gamma + rdm.gamma.adjoint());
  HermitianEigen eig = canonical_eigh(herm, /*descending=*/true);
  return {std::move(eig.values), eig.vectors.conjugate()};
}

double binary_entropy(double x) {
  x = std::clamp(x, 0.0, 1.0);
  double s = 0.0;
  if (x > 0.0) s -= x * std::log(x);
  if (x < 1.0) s -= (1.0 - x) * std::log(1.0 - x);
  return s;
}

double single_orbital_entropy(const OneBodyRDM& rdm, int mode) {
  if (mode < 0 || mode >= rdm.modes()) throw InvalidArgument("mode index out of range");
  return binary_entropy(rdm.gamma(mode, mode).real());
}

double single_orbital_entropy(const WaveFunction& psi, int mode) {
  if (mode < 0 || mode >= psi.modes()) throw InvalidArgument("mode index out of range");
  double x = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if ((psi.basis->state(i) >> mode) & 1U) x += std::norm(psi.coeffs[static_cast<Eigen::Index>(i)]);
  return binary_entropy(x);
}

DecayReport decay_report(const OneBodyRDM& rdm, int impurity_modes, double omega) {
  if (impurity_modes < 1) throw InvalidArgument("decay rate needs M >= 1");
  if (!(omega > 0.0 && omega < 2.0)) throw InvalidArgument("gap must lie in (0, 2)");
  DecayReport r;
  r.impurity_modes = impurity_modes;
  r.omega = omega;
  const NaturalOrbitals no = natural_orbitals(rdm);
  r.occupations.assign(no.occupations.data(), no.occupations.data() + no.occupations.size());
  r.rate = 1.0 / (14.0 * impurity_modes * std::log(2.0 / omega));
  for (std::size_t j = 0; j < r.occupations.size(); ++j) {
    const double sigma = std::max(r.occupations[j], 0.0);
    r.fitted_c = std::max(r.fitted_c, sigma * std::exp(static_cast<double>(j + 1) * r.rate));
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < r.occupations.size(); ++j) {
    const double sigma = r.occupations[j];
    if (sigma > 1e-12 && sigma < 1.0 - 1e-12) {
      xs.push_back(static_cast<double>(j + 1));
      ys.push_back(std::log(sigma));
    }
  }
  r.regression_points = static_cast<int>(xs.size());
  if (xs.size() < 2) return r;
  r.regression_empty = false;
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return r;
}

}  // namespace qembed
