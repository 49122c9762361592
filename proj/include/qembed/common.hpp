#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qembed {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Largest mode count representable by a single 64-bit occupation mask.
inline constexpr int kMaxModes = 63;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SectorTooLarge : public Error {
 public:
  SectorTooLarge(std::uint64_t dimension, std::uint64_t cap);
  std::uint64_t dimension() const { return dimension_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t dimension_;
  std::uint64_t cap_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// binomial(n, k) for n <= 63; exact in 64-bit arithmetic.
std::uint64_t binomial(int n, int k);

/// Global cap on sector dimensions, overridable from the CLI (--max-dim).
std::uint64_t max_sector_dim();
void set_max_sector_dim(std::uint64_t cap);

/// Worker count used by parallel kernels. Results never depend on it.
int thread_count();
void set_thread_count(int threads);

/// Runs body(begin, end) over [0, n) split into contiguous chunks.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// SplitMix64: seed sequencing for ensembles and the base generator
/// for every random draw in the library (platform independent).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
};

/// Seed of ensemble member `index` derived from a global seed.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index);

/// Haar-random real orthogonal matrix (QR of a Gaussian matrix, sign fixed).
RMatrix random_orthogonal(int n, SplitMix64& rng);

/// Random complex unitary (QR of a complex Gaussian matrix, phases fixed).
CMatrix random_unitary(int n, SplitMix64& rng);

/// Eigen-decomposition of a Hermitian matrix with reproducible vectors.
/// Inside each degenerate group (eigenvalues within `tol`) the basis is
/// rebuilt by orthonormalizing the projections of e_0, e_1, ... in index
/// order; every vector's first non-negligible component is made real and
/// positive.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;  // columns
};
HermitianEigen canonical_eigh(const CMatrix& a, bool descending = false,
                              double tol = 1e-10);

struct SymmetricEigen {
  RVector values;
  RMatrix vectors;
};
SymmetricEigen canonical_eigh(const RMatrix& a, bool descending = false,
                              double tol = 1e-10);

}  // namespace qembed
