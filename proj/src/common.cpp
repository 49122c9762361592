#include "qembed/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

namespace qembed {

namespace {
std::atomic<std::uint64_t> g_max_dim{std::uint64_t{1} << 22};
std::atomic<int> g_threads{1};
}  // namespace

SectorTooLarge::SectorTooLarge(std::uint64_t dimension, std::uint64_t cap)
    : Error("sector too large: binomial dimension " + std::to_string(dimension) +
            " exceeds cap " + std::to_string(cap)),
      dimension_(dimension),
      cap_(cap) {}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (int i = 0; i < k; ++i) result = result * (n - i) / (i + 1);
  return static_cast<std::uint64_t>(result);
}

std::uint64_t max_sector_dim() { return g_max_dim.load(); }
void set_max_sector_dim(std::uint64_t cap) { g_max_dim.store(cap); }

int thread_count() { return g_threads.load(); }
void set_thread_count(int threads) { g_threads.store(std::max(1, threads)); }

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const auto workers =
      static_cast<std::size_t>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
  SplitMix64 mix(global_seed ^ (0xd1b54a32d192ed03ULL * (index + 1)));
  return mix.next();
}

RMatrix random_orthogonal(int n, SplitMix64& rng) {
  RMatrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<RMatrix> qr(g);
  RMatrix q = qr.householderQ() * RMatrix::Identity(n, n);
  const RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

CMatrix random_unitary(int n, SplitMix64& rng) {
  CMatrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = cplx(rng.normal(), rng.normal());
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

namespace {

template <class Matrix>
void canonicalize_group(Matrix& vecs, Eigen::Index begin, Eigen::Index end) {
  using Scalar = typename Matrix::Scalar;
  const Eigen::Index n = vecs.rows();
  const Eigen::Index k = end - begin;
  if (k > 1) {
    const Matrix block = vecs.middleCols(begin, k);
    Matrix fresh(n, k);
    Eigen::Index found = 0;
    for (Eigen::Index i = 0; i < n && found < k; ++i) {
      // Projection of e_i onto the group's span.
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = block * block.row(i).adjoint();
      for (Eigen::Index j = 0; j < found; ++j) v -= fresh.col(j).dot(v) * fresh.col(j);
      for (Eigen::Index j = 0; j < found; ++j) v -= fresh.col(j).dot(v) * fresh.col(j);
      const double norm = v.norm();
      if (norm < 1e-6) continue;
      fresh.col(found++) = v / norm;
    }
    if (found == k) vecs.middleCols(begin, k) = fresh;
  }
  for (Eigen::Index c = begin; c < end; ++c)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar x = vecs(i, c);
      if (std::abs(x) > 1e-12) {
        vecs.col(c) *= std::abs(x) / x;
        break;
      }
    }
}

template <class Matrix, class Result>
Result eigh_impl(const Matrix& a, bool descending, double tol) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  RVector values = es.eigenvalues();
  Matrix vecs = es.eigenvectors();
  if (descending) {
    values = values.reverse().eval();
    vecs = vecs.rowwise().reverse().eval();
  }
  const Eigen::Index n = values.size();
  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && std::abs(values[end] - values[end - 1]) <= tol) ++end;
    canonicalize_group(vecs, begin, end);
    begin = end;
  }
  return Result{std::move(values), std::move(vecs)};
}

}  // namespace

HermitianEigen canonical_eigh(const CMatrix& a, bool descending, double tol) {
  return eigh_impl<CMatrix, HermitianEigen>(a, descending, tol);
}

SymmetricEigen canonical_eigh(const RMatrix& a, bool descending, double tol) {
  return eigh_impl<RMatrix, SymmetricEigen>(a, descending, tol);
}

}  // namespace qembed
