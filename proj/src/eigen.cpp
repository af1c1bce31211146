#include "pqroot/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pqroot {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffTol = 1e-13;

double off_diag_fro(const Matrix& a) {
  const std::size_t n = a.n();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(2.0 * s);
}

// One two-sided rotation on the symmetric matrix a (full storage, kept
// symmetric by mirrored writes), optionally accumulated into q.
inline void rotate(Matrix& a, Matrix* q, std::size_t p, std::size_t r) {
  const double apr = a(p, r);
  if (apr == 0.0) return;
  const double app = a(p, p);
  const double arr = a(r, r);
  const double theta = 0.5 * (arr - app) / apr;
  double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const std::size_t n = a.n();

  a(p, p) = app - t * apr;
  a(r, r) = arr + t * apr;
  a(p, r) = 0.0;
  a(r, p) = 0.0;
  double* rowp = a.data() + p * n;
  double* rowr = a.data() + r * n;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == r) continue;
    const double akp = rowp[k];
    const double akr = rowr[k];
    const double np = c * akp - s * akr;
    const double nr = s * akp + c * akr;
    rowp[k] = np;
    rowr[k] = nr;
    a(k, p) = np;
    a(k, r) = nr;
  }
  if (q) {
    double* qd = q->data();
    for (std::size_t k = 0; k < n; ++k) {
      const double qkp = qd[k * n + p];
      const double qkr = qd[k * n + r];
      qd[k * n + p] = c * qkp - s * qkr;
      qd[k * n + r] = s * qkp + c * qkr;
    }
  }
}

// Core cyclic Jacobi; a is destroyed (becomes ~diagonal).
void jacobi_core(Matrix& a, Matrix* q) {
  const std::size_t n = a.n();
  if (n < 2) return;
  const double tol = kOffTol * norm_fro(a);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diag_fro(a) <= tol) return;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t r = p + 1; r < n; ++r) rotate(a, q, p, r);
  }
  if (off_diag_fro(a) <= tol) return;
  throw NonConvergence("jacobi_eigh: no convergence after 100 sweeps");
}

void sort_ascending(std::vector<double>& ev, Matrix* q) {
  const std::size_t n = ev.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return ev[a] < ev[b]; });
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = ev[idx[i]];
  ev = std::move(sorted);
  if (q) {
    Matrix qs(n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) qs(i, j) = (*q)(i, idx[j]);
    *q = std::move(qs);
  }
}

}  // namespace

EigenDecomposition jacobi_eigh(const SymMatrix& m) {
  Matrix a = m.mat();
  Matrix q = Matrix::identity(m.n());
  jacobi_core(a, &q);
  std::vector<double> ev(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) ev[i] = a(i, i);
  sort_ascending(ev, &q);
  return EigenDecomposition{std::move(ev), std::move(q)};
}

std::vector<double> jacobi_eigenvalues(const SymMatrix& m) {
  Matrix a = m.mat();
  jacobi_core(a, nullptr);
  std::vector<double> ev(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) ev[i] = a(i, i);
  sort_ascending(ev, nullptr);
  return ev;
}

double norm_two_sym(const SymMatrix& m) {
  if (m.n() == 0) return 0.0;
  const std::vector<double> ev = jacobi_eigenvalues(m);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

SymMatrix spectral_function(const SymMatrix& m, const std::function<double(double)>& f) {
  const EigenDecomposition ed = jacobi_eigh(m);
  const std::size_t n = m.n();
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) {
    fv[i] = f(ed.eigenvalues[i]);
    if (!std::isfinite(fv[i]))
      throw std::domain_error("spectral_function: f undefined at eigenvalue " +
                              std::to_string(ed.eigenvalues[i]));
  }
  // Q diag(fv) Q^T without touching any ledger
  const Matrix& q = ed.eigenvectors;
  Matrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * fv[k] * q(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SymMatrixUnchecked::wrap(std::move(out));
}

}  // namespace pqroot
