#include "qembed/fermion_operator.hpp"

#include <algorithm>
#include <cmath>

namespace qembed {

namespace {

// Creators sort before annihilators; within a kind, ascending mode.
int rank(const Ladder& l) { return (l.creation ? 0 : 64) + l.mode; }

}  // namespace

double FermionOperator::constant() const {
  const auto it = terms_.find(Term{});
  return it == terms_.end() ? 0.0 : it->second;
}

void FermionOperator::add(const Term& ops, double coeff) {
  for (const Ladder& l : ops)
    if (l.mode < 0 || l.mode >= n_modes_) throw InvalidArgument("ladder mode out of range");
  if (coeff != 0.0) add_ordered(ops, coeff);
}

void FermionOperator::add_ordered(Term ops, double coeff) {
  // Bubble sort; each swap of neighbours contributes the anticommutator.
  for (std::size_t pass = 0; pass < ops.size(); ++pass) {
    bool swapped = false;
    for (std::size_t i = 0; i + 1 < ops.size(); ++i) {
      const int r0 = rank(ops[i]);
      const int r1 = rank(ops[i + 1]);
      if (r0 == r1) return;  // a_p a_p = a+_p a+_p = 0
      if (r0 < r1) continue;
      if (ops[i].mode == ops[i + 1].mode && ops[i].creation != ops[i + 1].creation) {
        Term contracted;
        contracted.reserve(ops.size() - 2);
        contracted.insert(contracted.end(), ops.begin(), ops.begin() + static_cast<long>(i));
        contracted.insert(contracted.end(), ops.begin() + static_cast<long>(i) + 2, ops.end());
        add_ordered(std::move(contracted), coeff);
      }
      std::swap(ops[i], ops[i + 1]);
      coeff = -coeff;
      swapped = true;
    }
    if (!swapped) break;
  }
  terms_[ops] += coeff;
}

void FermionOperator::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

RMatrix FermionOperator::dense(const std::vector<std::uint64_t>& basis) const {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  RMatrix m = RMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col)
    for (const auto& [ops, c] : terms_) {
      const auto r = apply_ladders(ops, basis[static_cast<std::size_t>(col)]);
      if (!r) continue;
      const auto it = std::lower_bound(basis.begin(), basis.end(), r->first);
      if (it == basis.end() || *it != r->first) continue;
      m(it - basis.begin(), col) += c * r->second;
    }
  return m;
}

std::optional<std::size_t> FockVector::find(std::uint64_t bits) const {
  const auto it = std::lower_bound(states.begin(), states.end(), bits);
  if (it == states.end() || *it != bits) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

double expectation(const FermionOperator& op, const FockVector& v) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < v.states.size(); ++j) {
    const cplx cj = v.coeffs[static_cast<Eigen::Index>(j)];
    if (cj == 0.0) continue;
    for (const auto& [ops, c] : op.terms()) {
      const auto r = apply_ladders(ops, v.states[j]);
      if (!r) continue;
      if (const auto i = v.find(r->first))
        acc += std::conj(v.coeffs[static_cast<Eigen::Index>(*i)]) * c *
               static_cast<double>(r->second) * cj;
    }
  }
  return acc.real();
}

CMatrix one_rdm(const FockVector& v) {
  const int n = v.modes;
  CMatrix g = CMatrix::Zero(n, n);
  for (std::size_t j = 0; j < v.states.size(); ++j) {
    const cplx cj = v.coeffs[static_cast<Eigen::Index>(j)];
    if (cj == 0.0) continue;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const Ladder ops[] = {{p, true}, {q, false}};
        const auto r = apply_ladders(ops, v.states[j]);
        if (!r) continue;
        if (const auto i = v.find(r->first))
          g(p, q) += std::conj(v.coeffs[static_cast<Eigen::Index>(*i)]) *
                     static_cast<double>(r->second) * cj;
      }
  }
  return g;
}

}  // namespace qembed
