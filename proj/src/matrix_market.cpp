#include "pqroot/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pqroot {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string next_data_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '%') continue;
    return line;
  }
  throw MatrixMarketError("matrix market: unexpected end of file");
}

void format_value(char* buf, std::size_t len, double v) {
  std::snprintf(buf, len, "%.17g", v);
}

}  // namespace

SymMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError("matrix market: cannot open " + path);
  return read_matrix_market(in);
}

SymMatrix read_matrix_market(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw MatrixMarketError("matrix market: empty input");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw MatrixMarketError("matrix market: malformed header: " + header);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate" && format != "array")
    throw MatrixMarketError("matrix market: unsupported format " + format);
  if (field != "real")
    throw MatrixMarketError("matrix market: non-real field " + field);
  if (symmetry != "general" && symmetry != "symmetric")
    throw MatrixMarketError("matrix market: unsupported symmetry " + symmetry);

  const bool coord = format == "coordinate";
  const bool sym = symmetry == "symmetric";

  std::istringstream sz(next_data_line(in));
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (coord) {
    if (!(sz >> rows >> cols >> nnz))
      throw MatrixMarketError("matrix market: malformed size line");
  } else {
    if (!(sz >> rows >> cols))
      throw MatrixMarketError("matrix market: malformed size line");
  }
  if (rows != cols) throw MatrixMarketError("matrix market: matrix not square");

  Matrix m(rows);
  if (coord) {
    for (std::size_t e = 0; e < nnz; ++e) {
      std::istringstream ls(next_data_line(in));
      std::size_t i = 0, j = 0;
      double v = 0.0;
      if (!(ls >> i >> j >> v))
        throw MatrixMarketError("matrix market: malformed entry line");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw MatrixMarketError("matrix market: index out of range");
      m(i - 1, j - 1) = v;
      if (sym) m(j - 1, i - 1) = v;
    }
  } else {
    // array data is column-major; symmetric variant stores the lower triangle
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = sym ? j : 0; i < rows; ++i) {
        std::istringstream ls(next_data_line(in));
        double v = 0.0;
        if (!(ls >> v)) throw MatrixMarketError("matrix market: malformed value line");
        m(i, j) = v;
        if (sym) m(j, i) = v;
      }
    }
  }
  try {
    return SymMatrix::from_matrix(std::move(m));
  } catch (const std::invalid_argument& e) {
    throw MatrixMarketError(std::string("matrix market: ") + e.what());
  }
}

void write_matrix_market(const std::string& path, const SymMatrix& m, MmFormat format) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw MatrixMarketError("matrix market: cannot write " + path);
  write_matrix_market(out, m, format);
}

void write_matrix_market(std::ostream& out, const SymMatrix& m, MmFormat format) {
  const std::size_t n = m.n();
  char buf[64];
  switch (format) {
    case MmFormat::CoordinateSymmetric: {
      std::size_t nnz = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) nnz += m(i, j) != 0.0;
      out << "%%MatrixMarket matrix coordinate real symmetric\n";
      out << n << " " << n << " " << nnz << "\n";
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          if (m(i, j) == 0.0) continue;
          format_value(buf, sizeof buf, m(i, j));
          out << (i + 1) << " " << (j + 1) << " " << buf << "\n";
        }
      break;
    }
    case MmFormat::ArraySymmetric: {
      out << "%%MatrixMarket matrix array real symmetric\n";
      out << n << " " << n << "\n";
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j; i < n; ++i) {
          format_value(buf, sizeof buf, m(i, j));
          out << buf << "\n";
        }
      break;
    }
    case MmFormat::ArrayGeneral: {
      out << "%%MatrixMarket matrix array real general\n";
      out << n << " " << n << "\n";
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          format_value(buf, sizeof buf, m(i, j));
          out << buf << "\n";
        }
      break;
    }
  }
  if (!out) throw MatrixMarketError("matrix market: write failed");
}

}  // namespace pqroot
