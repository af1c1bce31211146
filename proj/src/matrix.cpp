#include "pqroot/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace pqroot {

SymMatrix SymMatrix::from_matrix(Matrix m) {
  const std::size_t n = m.n();
  const double tol = kSymTol * std::max(1.0, max_abs(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol)
        throw std::invalid_argument(
            "SymMatrix: symmetry violated at (" + std::to_string(i) + "," +
            std::to_string(j) + "): |" + std::to_string(m(i, j)) + " - " +
            std::to_string(m(j, i)) + "| > " + std::to_string(tol));
  return SymMatrix(std::move(m));
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  const std::size_t n = m.n();
  Matrix s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = m(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return SymMatrix(std::move(s));
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  Matrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return SymMatrix(std::move(m));
}

Matrix mat_mul(const Matrix& a, const Matrix& b, MultLedger& ledger) {
  const std::size_t n = a.n();
  if (b.n() != n) throw std::invalid_argument("mat_mul: dimension mismatch");
  Matrix c(n);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * n;
    double* crow = pc + i * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = arow[k];
      const double* brow = pb + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  ledger.charge();
  return c;
}

Matrix transpose(const Matrix& m) {
  const std::size_t n = m.n();
  Matrix t(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(j, i) = m(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.n();
  if (b.n() != n) throw std::invalid_argument("add: dimension mismatch");
  Matrix c(n);
  for (std::size_t i = 0; i < n * n; ++i) c.data()[i] = a.data()[i] + b.data()[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.n();
  if (b.n() != n) throw std::invalid_argument("sub: dimension mismatch");
  Matrix c(n);
  for (std::size_t i = 0; i < n * n; ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

Matrix scale(const Matrix& m, double s) {
  const std::size_t n = m.n();
  Matrix c(n);
  for (std::size_t i = 0; i < n * n; ++i) c.data()[i] = s * m.data()[i];
  return c;
}

Matrix sub_from_identity(const Matrix& m) {
  const std::size_t n = m.n();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = (i == j ? 1.0 : 0.0) - m(i, j);
  return c;
}

double max_abs(const Matrix& m) {
  double v = 0.0;
  const std::size_t nn = m.n() * m.n();
  for (std::size_t i = 0; i < nn; ++i) v = std::max(v, std::abs(m.data()[i]));
  return v;
}

double norm_fro(const Matrix& m) {
  double s = 0.0;
  const std::size_t nn = m.n() * m.n();
  for (std::size_t i = 0; i < nn; ++i) {
    const double x = m.data()[i];
    s += x * x;
  }
  return std::sqrt(s);
}

double norm_one(const Matrix& m) {
  const std::size_t n = m.n();
  double best = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

double norm_inf(const Matrix& m) {
  const std::size_t n = m.n();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace pqroot
