#pragma once

#include <cstdint>

#include "pqroot/matrix.hpp"

namespace pqroot {

/// xoshiro256++ with SplitMix64 seeding. Pinned algorithm so ensembles are
/// bit-reproducible across platforms; never change silently.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t s_[4];
};

/// Recipe for a reproducible random SPD matrix.
struct MatrixSpec {
  std::size_t n = 0;
  double density = 1.0;
  double cond = 1.0;             // target lambda_max / lambda_min
  double spectral_radius = 1.0;  // target rho(A)
  std::uint64_t seed = 0;

  void validate() const;
};

struct DensityUnreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic for a fixed spec. Eigenvalues: lambda_max = 1,
/// lambda_min = 1/cond, interior log-uniform in [1/cond, 1]; seeded random
/// Givens rotations fill entries until the density target is reached; the
/// result is rescaled so rho(A) hits spectral_radius.
SymMatrix generate_spd(const MatrixSpec& spec);

struct MatrixMeasure {
  double density = 0.0;
  double cond = 0.0;
  double rho = 0.0;
};

/// density = nnz / n^2 (exact zero test), cond = lambda_max / lambda_min,
/// rho = lambda_max. Throws NotPositiveDefinite when lambda_min <= 0.
MatrixMeasure measure(const SymMatrix& a);

}  // namespace pqroot
