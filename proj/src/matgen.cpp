#include "pqroot/matgen.hpp"

#include <cmath>

#include "pqroot/eigen.hpp"
#include "pqroot/iteration.hpp"

namespace pqroot {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kRotationCapFactor = 50;

}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Xoshiro256pp::below(std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % bound;
}

void MatrixSpec::validate() const {
  if (n < 1) throw std::invalid_argument("MatrixSpec: n must be >= 1");
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("MatrixSpec: density must lie in (0, 1]");
  if (density * static_cast<double>(n) * static_cast<double>(n) < static_cast<double>(n))
    throw std::invalid_argument("MatrixSpec: density * n^2 must be >= n");
  if (!(cond >= 1.0)) throw std::invalid_argument("MatrixSpec: cond must be >= 1");
  if (!(spectral_radius > 0.0))
    throw std::invalid_argument("MatrixSpec: spectral_radius must be > 0");
}

namespace {

// Two-sided Givens rotation keeping bit-exact symmetry via mirrored writes.
// Returns the nnz delta from the touched entries (exact-zero test).
long long apply_rotation(Matrix& a, std::size_t i, std::size_t j, double c, double s) {
  const std::size_t n = a.n();
  long long delta = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    const double aik = a(i, k);
    const double ajk = a(j, k);
    const double ni = c * aik - s * ajk;
    const double nj = s * aik + c * ajk;
    delta += 2 * ((ni != 0.0) - (aik != 0.0));
    delta += 2 * ((nj != 0.0) - (ajk != 0.0));
    a(i, k) = ni;
    a(k, i) = ni;
    a(j, k) = nj;
    a(k, j) = nj;
  }
  const double aii = a(i, i);
  const double ajj = a(j, j);
  const double aij = a(i, j);
  const double nii = c * c * aii - 2.0 * c * s * aij + s * s * ajj;
  const double njj = s * s * aii + 2.0 * c * s * aij + c * c * ajj;
  const double nij = c * s * (aii - ajj) + (c * c - s * s) * aij;
  delta += (nii != 0.0) - (aii != 0.0);
  delta += (njj != 0.0) - (ajj != 0.0);
  delta += 2 * ((nij != 0.0) - (aij != 0.0));
  a(i, i) = nii;
  a(j, j) = njj;
  a(i, j) = nij;
  a(j, i) = nij;
  return delta;
}

}  // namespace

SymMatrix generate_spd(const MatrixSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  Xoshiro256pp rng(spec.seed);

  std::vector<double> lam(n, 1.0);
  if (n >= 2) lam[1] = 1.0 / spec.cond;
  const double log_lo = std::log(1.0 / spec.cond);
  for (std::size_t i = 2; i < n; ++i)
    lam[i] = std::exp(log_lo * (1.0 - rng.uniform01()));  // log-uniform in [1/cond, 1]

  if (spec.cond == 1.0) {
    // equal eigenvalues: every orthogonal similarity of I is I itself
    std::vector<double> d(n, spec.spectral_radius);
    return SymMatrix::diagonal(d);
  }

  Matrix a(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = lam[i];
  long long nnz = 0;
  for (std::size_t i = 0; i < n; ++i) nnz += lam[i] != 0.0;

  const double target = spec.density * static_cast<double>(n) * static_cast<double>(n);
  const long long cap =
      static_cast<long long>(kRotationCapFactor) * static_cast<long long>(n) *
      static_cast<long long>(n);
  long long rotations = 0;
  while (static_cast<double>(nnz) < target) {
    if (rotations >= cap)
      throw DensityUnreachable("generate_spd: density " + std::to_string(spec.density) +
                               " unreachable after " + std::to_string(cap) + " rotations");
    const std::size_t i = static_cast<std::size_t>(rng.below(n));
    const std::size_t j = static_cast<std::size_t>(rng.below(n));
    const double theta = kTwoPi * rng.uniform01();
    if (i == j) continue;
    nnz += apply_rotation(a, i, j, std::cos(theta), std::sin(theta));
    ++rotations;
  }

  SymMatrix sym = SymMatrixUnchecked::wrap(std::move(a));
  const std::vector<double> ev = jacobi_eigenvalues(sym);
  const double rho = ev.back();
  return SymMatrix::symmetrized(scale(sym.mat(), spec.spectral_radius / rho));
}

MatrixMeasure measure(const SymMatrix& a) {
  const std::size_t n = a.n();
  long long nnz = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) nnz += a(i, j) != 0.0;
  const std::vector<double> ev = jacobi_eigenvalues(a);
  if (ev.front() <= 0.0)
    throw NotPositiveDefinite("measure: lambda_min = " + std::to_string(ev.front()));
  MatrixMeasure m;
  m.density = static_cast<double>(nnz) / (static_cast<double>(n) * static_cast<double>(n));
  m.cond = ev.back() / ev.front();
  m.rho = ev.back();
  return m;
}

}  // namespace pqroot
