#pragma once

#include <functional>

#include "pqroot/matrix.hpp"

namespace pqroot {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // orthogonal, columns match eigenvalues
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops below
/// 1e-13 * ||m||_F. Throws NonConvergence after 100 sweeps.
EigenDecomposition jacobi_eigh(const SymMatrix& m);

/// Same sweeps without accumulating eigenvectors.
std::vector<double> jacobi_eigenvalues(const SymMatrix& m);

/// Spectral norm = max |eigenvalue|, via the Jacobi sweeps.
double norm_two_sym(const SymMatrix& m);

/// Q diag(f(lambda_i)) Q^T. Throws std::domain_error if f produces a
/// non-finite value at some eigenvalue.
SymMatrix spectral_function(const SymMatrix& m, const std::function<double(double)>& f);

}  // namespace pqroot
