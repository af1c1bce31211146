#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace pqroot;
using namespace pqroot::testing;

namespace {

void check_decomposition(const SymMatrix& m) {
  const EigenDecomposition ed = jacobi_eigh(m);
  const std::size_t n = m.n();
  // reconstruction: || Q diag Q^T - M ||_F <= 1e-10 ||M||_F
  MultLedger scratch;
  Matrix d(n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = ed.eigenvalues[i];
  const Matrix rec =
      mat_mul(mat_mul(ed.eigenvectors, d, scratch), transpose(ed.eigenvectors), scratch);
  CHECK(norm_fro(sub(rec, m.mat())) <= 1e-10 * std::max(norm_fro(m.mat()), 1e-30));
  // orthogonality: || Q^T Q - I ||_F <= 1e-10 sqrt(n)
  const Matrix qtq = mat_mul(transpose(ed.eigenvectors), ed.eigenvectors, scratch);
  CHECK(norm_fro(sub(qtq, Matrix::identity(n))) <= 1e-10 * std::sqrt(double(n)));
  // ascending
  for (std::size_t i = 1; i < n; ++i)
    CHECK(ed.eigenvalues[i - 1] <= ed.eigenvalues[i]);
}

}  // namespace

TEST_CASE("identity eigendecomposition") {
  const SymMatrix m = SymMatrix::identity(4);
  const EigenDecomposition ed = jacobi_eigh(m);
  for (double ev : ed.eigenvalues) CHECK(ev == doctest::Approx(1.0));
  check_decomposition(m);
}

TEST_CASE("2x2 hand eigenvalues") {
  const SymMatrix m = sym({{2, 1}, {1, 2}});
  const EigenDecomposition ed = jacobi_eigh(m);
  CHECK(ed.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ed.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
  check_decomposition(m);
}

TEST_CASE("diagonal input already sorted") {
  const SymMatrix m = SymMatrix::diagonal({5.0, 1.0, 3.0});
  const std::vector<double> ev = jacobi_eigenvalues(m);
  CHECK(ev[0] == 1.0);
  CHECK(ev[1] == 3.0);
  CHECK(ev[2] == 5.0);
}

TEST_CASE("decomposition invariants on random matrices") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed)
    check_decomposition(random_symmetric(12, seed));
}

TEST_CASE("norm_two_sym hand example and identity") {
  CHECK(norm_two_sym(SymMatrix::identity(5)) == doctest::Approx(1.0));
  const SymMatrix m = sym({{1, -2}, {-2, 1}});  // eigenvalues -1, 3
  CHECK(norm_two_sym(m) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("two-norm bounded by sqrt(norm1 norminf) over random symmetric matrices") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SymMatrix m = random_symmetric(3 + seed % 9, seed);
    const double two = norm_two_sym(m);
    CHECK(two <= std::sqrt(norm_one(m) * norm_inf(m)) * (1.0 + 1e-12));
  }
}

TEST_CASE("spectral_function scalar cases") {
  const SymMatrix a = SymMatrix::diagonal({4.0, 4.0});
  const SymMatrix half = spectral_function(a, [](double x) { return std::pow(x, -0.5); });
  CHECK(half(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(half(0, 1) == doctest::Approx(0.0));

  const SymMatrix d = SymMatrix::diagonal({1.0, 16.0});
  const SymMatrix q4 = spectral_function(d, [](double x) { return std::pow(x, -0.25); });
  CHECK(q4(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q4(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("spectral_function hand 2x2 inverse square root") {
  const SymMatrix a = sym({{2, 1}, {1, 2}});
  const SymMatrix b = spectral_function(a, [](double x) { return std::pow(x, -0.5); });
  const double diag = (1.0 + 1.0 / std::sqrt(3.0)) / 2.0;
  const double off = -(1.0 - 1.0 / std::sqrt(3.0)) / 2.0;
  CHECK(b(0, 0) == doctest::Approx(diag).epsilon(1e-12));
  CHECK(b(0, 1) == doctest::Approx(off).epsilon(1e-12));
  // B^2 A = I
  MultLedger scratch;
  const Matrix b2a = mat_mul(mat_mul(b.mat(), b.mat(), scratch), a.mat(), scratch);
  CHECK(norm_fro(sub(b2a, Matrix::identity(2))) <= 1e-12);
}

TEST_CASE("spectral_function identity map reproduces input") {
  for (std::uint64_t seed = 3; seed <= 6; ++seed) {
    const SymMatrix m = random_symmetric(9, seed);
    const SymMatrix same = spectral_function(m, [](double x) { return x; });
    CHECK(norm_fro(sub(same.mat(), m.mat())) <= 1e-10 * norm_fro(m.mat()));
  }
}

TEST_CASE("inverse p-th root ground truth residual") {
  for (int p : {1, 2, 3, 6}) {
    const SymMatrix a = random_spd(10, 1e-3, 1.0, 40 + p);  // cond 1e3
    const SymMatrix b =
        spectral_function(a, [&](double x) { return std::pow(x, -1.0 / p); });
    MultLedger scratch;
    Matrix bp = b.mat();
    for (int i = 2; i <= p; ++i) bp = mat_mul(bp, b.mat(), scratch);
    const Matrix res = mat_mul(bp, a.mat(), scratch);
    CHECK(norm_fro(sub(res, Matrix::identity(10))) <= 1e-8);
  }
}

TEST_CASE("spectral_function rejects undefined values") {
  const SymMatrix ind = SymMatrix::diagonal({-1.0, 2.0});
  CHECK_THROWS_AS(spectral_function(ind, [](double x) { return std::pow(x, -0.5); }),
                  std::domain_error);
}

TEST_CASE("I - C contraction for SPD C with norm <= 1") {
  for (std::uint64_t seed = 11; seed <= 30; ++seed) {
    const SymMatrix c = random_spd(8, 0.05, 0.95, seed);
    const std::vector<double> ev = jacobi_eigenvalues(c);
    REQUIRE(norm_two_sym(c) <= 1.0);
    const SymMatrix imc = SymMatrix::symmetrized(sub_from_identity(c.mat()));
    const double lhs = norm_two_sym(imc);
    CHECK(lhs == doctest::Approx(1.0 - ev.front()).epsilon(1e-12));
    CHECK(lhs < 1.0);
  }
}
