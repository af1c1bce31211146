#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pqroot {

/// Counts full n x n * n x n matrix products. Additions, scalings,
/// transposes and norm evaluations are free.
struct MultLedger {
  long long count = 0;
  void charge() { ++count; }
};

/// Dense square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t n() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  bool operator==(const Matrix& o) const { return n_ == o.n_ && a_ == o.a_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Symmetric dense matrix. Construction checks
///   |a_ij - a_ji| <= 1e-12 * max(1, max|a_kl|).
class SymMatrix {
 public:
  static constexpr double kSymTol = 1e-12;

  SymMatrix() = default;

  /// Validates the symmetry invariant; throws std::invalid_argument.
  static SymMatrix from_matrix(Matrix m);

  /// (m + m^T) / 2. For symmetrizing products of commuting symmetric
  /// factors after roundoff.
  static SymMatrix symmetrized(const Matrix& m);

  static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }
  static SymMatrix diagonal(const std::vector<double>& d);

  std::size_t n() const { return m_.n(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& mat() const { return m_; }

  bool operator==(const SymMatrix& o) const { return m_ == o.m_; }

 private:
  explicit SymMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;

  friend class SymMatrixUnchecked;
};

/// Internal escape hatch for code paths that construct symmetric data by
/// construction (mirrored writes); skips the invariant scan.
class SymMatrixUnchecked {
 public:
  static SymMatrix wrap(Matrix m) { return SymMatrix(std::move(m)); }
};

/// Exact floating-point product; charges the ledger exactly 1.
Matrix mat_mul(const Matrix& a, const Matrix& b, MultLedger& ledger);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
Matrix sub_from_identity(const Matrix& m);  // I - m

double max_abs(const Matrix& m);
double norm_fro(const Matrix& m);

/// Max column absolute sum.
double norm_one(const Matrix& m);
inline double norm_one(const SymMatrix& m) { return norm_one(m.mat()); }

/// Max row absolute sum.
double norm_inf(const Matrix& m);
inline double norm_inf(const SymMatrix& m) { return norm_inf(m.mat()); }

inline double norm_fro(const SymMatrix& m) { return norm_fro(m.mat()); }
inline double max_abs(const SymMatrix& m) { return max_abs(m.mat()); }

}  // namespace pqroot
