#include "qembed/fock.hpp"

#include <array>
#include <bit>

namespace qembed {

namespace {

// binom[n][k] for n, k <= 64, used by the combinatorial ranking.
const std::array<std::array<std::uint64_t, 65>, 65>& binomial_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, 65>, 65> t{};
    for (int n = 0; n <= 64; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k)
        t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

void check_mode(int p, int modes) {
  if (p < 0 || p >= modes)
    throw InvalidArgument("mode index " + std::to_string(p) +
                          " out of range for " + std::to_string(modes) +
                          " modes");
}

}  // namespace

SectorBasis::SectorBasis(int modes, int electrons)
    : modes_(modes), electrons_(electrons) {
  if (modes < 0 || modes > kMaxModes || electrons < 0 || electrons > modes)
    throw InvalidArgument("invalid sector: " + std::to_string(modes) +
                          " modes, " + std::to_string(electrons) +
                          " electrons");
  const std::uint64_t dim = binomial(modes, electrons);
  states_.reserve(dim);
  if (electrons == 0) {
    states_.push_back(0);
    return;
  }
  // Gosper's hack enumerates same-popcount masks in increasing order.
  std::uint64_t v = (std::uint64_t{1} << electrons) - 1;
  for (std::uint64_t i = 0; i < dim; ++i) {
    states_.push_back(v);
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }
}

std::size_t SectorBasis::index_of(std::uint64_t bits) const {
  const auto& table = binomial_table();
  std::size_t rank = 0;
  int k = 1;
  while (bits) {
    const int p = std::countr_zero(bits);
    rank += table[p][k];
    ++k;
    bits &= bits - 1;
  }
  return rank;
}

std::optional<std::size_t> SectorBasis::find(std::uint64_t bits) const {
  if (std::popcount(bits) != electrons_) return std::nullopt;
  if (modes_ < 64 && (bits >> modes_) != 0) return std::nullopt;
  return index_of(bits);
}

SectorPtr enumerate_sector(int modes, int electrons, std::uint64_t cap) {
  if (modes < 0 || modes > kMaxModes || electrons < 0 || electrons > modes)
    throw InvalidArgument("invalid sector: " + std::to_string(modes) +
                          " modes, " + std::to_string(electrons) +
                          " electrons");
  const std::uint64_t dim = binomial(modes, electrons);
  if (dim > cap) throw SectorTooLarge(dim, cap);
  return std::make_shared<const SectorBasis>(modes, electrons);
}

void WaveFunction::normalize() {
  const double n = coeffs.norm();
  if (n == 0.0) throw InvalidArgument("cannot normalize a zero wavefunction");
  coeffs /= n;
}

WaveFunction WaveFunction::basis_state(SectorPtr b, std::uint64_t bits) {
  const auto idx = b->find(bits);
  if (!idx) throw InvalidArgument("occupation pattern not in sector");
  WaveFunction w(std::move(b));
  w.coeffs[static_cast<Eigen::Index>(*idx)] = 1.0;
  return w;
}

WaveFunction WaveFunction::random(SectorPtr b, SplitMix64& rng, bool real) {
  WaveFunction w(std::move(b));
  for (Eigen::Index i = 0; i < w.coeffs.size(); ++i)
    w.coeffs[i] = real ? cplx(rng.normal(), 0.0) : cplx(rng.normal(), rng.normal());
  w.normalize();
  return w;
}

std::optional<TermResult> apply_term(std::span<const int> creators,
                                     std::span<const int> annihilators,
                                     OccupationState s) {
  std::uint64_t seen = 0;
  for (int p : creators) {
    check_mode(p, s.modes);
    if ((seen >> p) & 1U) throw InvalidArgument("repeated creation index");
    seen |= std::uint64_t{1} << p;
  }
  seen = 0;
  for (int p : annihilators) {
    check_mode(p, s.modes);
    if ((seen >> p) & 1U) throw InvalidArgument("repeated annihilation index");
    seen |= std::uint64_t{1} << p;
  }

  std::uint64_t bits = s.bits;
  int sign = 1;
  for (auto it = annihilators.rbegin(); it != annihilators.rend(); ++it) {
    const std::uint64_t m = std::uint64_t{1} << *it;
    if (!(bits & m)) return std::nullopt;
    sign *= parity_below(bits, *it);
    bits ^= m;
  }
  for (auto it = creators.rbegin(); it != creators.rend(); ++it) {
    const std::uint64_t m = std::uint64_t{1} << *it;
    if (bits & m) return std::nullopt;
    sign *= parity_below(bits, *it);
    bits |= m;
  }
  return TermResult{OccupationState{bits, s.modes}, sign};
}

std::optional<std::pair<std::uint64_t, int>> apply_ladders(
    std::span<const Ladder> ops, std::uint64_t bits) {
  int sign = 1;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const std::uint64_t m = std::uint64_t{1} << it->mode;
    const bool occupied = bits & m;
    if (occupied == it->creation) return std::nullopt;
    sign *= parity_below(bits, it->mode);
    bits ^= m;
  }
  return std::pair{bits, sign};
}

SectorHamiltonian::SectorHamiltonian(const MolecularIntegrals& h,
                                     SectorPtr basis,
                                     std::size_t memory_budget_bytes)
    : h_(h), basis_(std::move(basis)) {
  if (h.n_modes() != basis_->modes())
    throw DimensionMismatch("Hamiltonian has " + std::to_string(h.n_modes()) +
                            " modes, basis has " +
                            std::to_string(basis_->modes()));
  const int n = h.n_modes();
  coulomb_.resize(n, n);
  exchange_.resize(n, n);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r) {
      coulomb_(p, r) = h.two_body(p, p, r, r);
      exchange_(p, r) = h.two_body(p, r, r, p);
    }

  const auto ne = static_cast<std::uint64_t>(basis_->electrons());
  const auto nv = static_cast<std::uint64_t>(n) - ne;
  const std::uint64_t per_row = 1 + ne * nv + ne * (ne > 0 ? ne - 1 : 0) / 2 *
                                                  (nv * (nv > 0 ? nv - 1 : 0) / 2);
  const double estimate = static_cast<double>(per_row) *
                          static_cast<double>(basis_->size()) *
                          (sizeof(double) + sizeof(std::uint32_t));
  if (estimate <= static_cast<double>(memory_budget_bytes) &&
      basis_->size() < (std::uint64_t{1} << 32))
    build_cache();
}

void SectorHamiltonian::build_cache() {
  const std::size_t dim = basis_->size();
  row_start_.assign(dim + 1, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t count = 0;
    for_each_in_row(i, [&](std::size_t, double) { ++count; });
    row_start_[i + 1] = row_start_[i] + count;
  }
  col_.resize(row_start_[dim]);
  val_.resize(row_start_[dim]);
  parallel_for(dim, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t k = row_start_[i];
      for_each_in_row(i, [&](std::size_t j, double v) {
        col_[k] = static_cast<std::uint32_t>(j);
        val_[k] = v;
        ++k;
      });
    }
  });
  cached_ = true;
}

void SectorHamiltonian::apply(const CVector& x, CVector& y) const {
  const std::size_t dim = basis_->size();
  if (static_cast<std::size_t>(x.size()) != dim)
    throw DimensionMismatch("vector length does not match sector dimension");
  y.resize(x.size());
  parallel_for(dim, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      cplx acc = 0.0;
      if (cached_) {
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k)
          acc += val_[k] * x[col_[k]];
      } else {
        for_each_in_row(i, [&](std::size_t j, double v) {
          acc += v * x[static_cast<Eigen::Index>(j)];
        });
      }
      y[static_cast<Eigen::Index>(i)] = acc;
    }
  });
}

WaveFunction apply_hamiltonian(const MolecularIntegrals& h,
                               const WaveFunction& psi) {
  if (h.n_modes() != psi.modes())
    throw DimensionMismatch("Hamiltonian has " + std::to_string(h.n_modes()) +
                            " modes, wavefunction has " +
                            std::to_string(psi.modes()));
  const SectorHamiltonian op(h, psi.basis, 0);
  return WaveFunction(psi.basis, op.apply(psi.coeffs));
}

double expectation(const MolecularIntegrals& h, const WaveFunction& psi) {
  const WaveFunction hpsi = apply_hamiltonian(h, psi);
  return psi.coeffs.dot(hpsi.coeffs).real();
}

}  // namespace qembed
