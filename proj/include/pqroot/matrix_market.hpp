#pragma once

#include <iosfwd>
#include <string>

#include "pqroot/matrix.hpp"

namespace pqroot {

struct MatrixMarketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MmFormat {
  CoordinateSymmetric,  // lower triangle, nonzeros only
  ArraySymmetric,       // lower triangle, column-major
  ArrayGeneral,         // full, column-major
};

/// Accepts coordinate/array, real, symmetric/general. General input is
/// checked against the SymMatrix tolerance and symmetrized.
SymMatrix read_matrix_market(const std::string& path);
SymMatrix read_matrix_market(std::istream& in);

/// Values printed with 17 significant digits (lossless round-trip).
void write_matrix_market(const std::string& path, const SymMatrix& m,
                         MmFormat format = MmFormat::CoordinateSymmetric);
void write_matrix_market(std::ostream& out, const SymMatrix& m,
                         MmFormat format = MmFormat::CoordinateSymmetric);

}  // namespace pqroot
