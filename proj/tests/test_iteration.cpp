#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include <mpfr.h>

#include "doctest.h"
#include "pqroot/iteration.hpp"
#include "test_helpers.hpp"

using namespace pqroot;
using namespace pqroot::testing;

namespace {

IterationParams scalar_params(int p, int q, double eps = 1e-8,
                              StopCriterion stop = StopCriterion::ErrorNorm) {
  IterationParams params;
  params.p = p;
  params.q = q;
  params.epsilon = eps;
  params.stop = stop;
  return params;
}

// Independent replay of the scalar recurrence in 200-bit arithmetic
// (roughly 60 decimal digits); returns the iteration count under the
// error criterion. Oracle only; shares no code with scalar_invroot.
int scalar_count_hiprec(double lambda, int p, int q, double eps, int max_iter = 200) {
  const mpfr_prec_t prec = 200;
  mpfr_t b, r, t, rp, bp, truth, lam, diff, tmp;
  mpfr_inits2(prec, b, r, t, rp, bp, truth, lam, diff, tmp, (mpfr_ptr)nullptr);
  mpfr_set_d(lam, lambda, MPFR_RNDN);
  // truth = lambda^(-1/p)
  mpfr_set_si(tmp, -1, MPFR_RNDN);
  mpfr_div_si(tmp, tmp, p, MPFR_RNDN);
  mpfr_pow(truth, lam, tmp, MPFR_RNDN);

  mpfr_set_d(b, 1.0, MPFR_RNDN);
  auto update_residual = [&]() {
    mpfr_pow_si(bp, b, p, MPFR_RNDN);
    mpfr_mul(bp, bp, lam, MPFR_RNDN);
    mpfr_si_sub(r, 1, bp, MPFR_RNDN);
  };
  update_residual();

  int k = 0;
  while (true) {
    mpfr_sub(diff, b, truth, MPFR_RNDN);
    mpfr_abs(diff, diff, MPFR_RNDN);
    if (mpfr_cmp_d(diff, eps) < 0) break;
    mpfr_abs(tmp, r, MPFR_RNDN);
    if (mpfr_cmp_d(tmp, 10.0) > 0) {
      k = -k;
      break;
    }
    if (k == max_iter) break;
    // t = p + r + r^2 + ... + r^{q-1}
    mpfr_set_si(t, p, MPFR_RNDN);
    mpfr_set(rp, r, MPFR_RNDN);
    mpfr_add(t, t, rp, MPFR_RNDN);
    for (int i = 2; i < q; ++i) {
      mpfr_mul(rp, rp, r, MPFR_RNDN);
      mpfr_add(t, t, rp, MPFR_RNDN);
    }
    mpfr_mul(b, b, t, MPFR_RNDN);
    mpfr_div_si(b, b, p, MPFR_RNDN);
    update_residual();
    ++k;
  }
  mpfr_clears(b, r, t, rp, bp, truth, lam, diff, tmp, (mpfr_ptr)nullptr);
  return k;
}

// literal evaluation of the binomial sum form
// (1/p) [ (p-1) I - sum_{i=1}^q C(q,i) (-1)^i (B^p A)^{i-1} ] B
SymMatrix binomial_form_step(const SymMatrix& b, const SymMatrix& a, int p, int q) {
  MultLedger scratch;
  const std::size_t n = b.n();
  Matrix bp = b.mat();
  for (int i = 2; i <= p; ++i) bp = mat_mul(bp, b.mat(), scratch);
  const Matrix m = mat_mul(bp, a.mat(), scratch);
  auto binom = [](int nn, int kk) {
    double v = 1.0;
    for (int i = 1; i <= kk; ++i) v = v * (nn - kk + i) / i;
    return v;
  };
  Matrix sum(n);
  Matrix mpow = Matrix::identity(n);  // (B^p A)^{i-1}, starting at i = 1
  for (int i = 1; i <= q; ++i) {
    const double coeff = binom(q, i) * ((i % 2 == 0) ? 1.0 : -1.0);
    sum = add(sum, scale(mpow, coeff));
    if (i < q) mpow = mat_mul(mpow, m, scratch);
  }
  const Matrix inner = sub(scale(Matrix::identity(n), double(p - 1)), sum);
  return SymMatrix::symmetrized(scale(mat_mul(inner, b.mat(), scratch), 1.0 / p));
}

// literal defining form (1/p)[(p-1)B - ((I - B^p A)^q - I) B^{1-p} A^{-1}]
// with B^{1-p} and A^{-1} taken spectrally
SymMatrix defining_form_step(const SymMatrix& b, const SymMatrix& a, int p, int q) {
  MultLedger scratch;
  const std::size_t n = b.n();
  Matrix bp = b.mat();
  for (int i = 2; i <= p; ++i) bp = mat_mul(bp, b.mat(), scratch);
  const Matrix r = sub_from_identity(mat_mul(bp, a.mat(), scratch));
  Matrix rq = r;
  for (int i = 2; i <= q; ++i) rq = mat_mul(rq, r, scratch);
  const Matrix num = sub(rq, Matrix::identity(n));
  const SymMatrix b1mp =
      spectral_function(b, [&](double x) { return std::pow(x, 1.0 - p); });
  const SymMatrix ainv = spectral_function(a, [](double x) { return 1.0 / x; });
  const Matrix tail = mat_mul(mat_mul(num, b1mp.mat(), scratch), ainv.mat(), scratch);
  return SymMatrix::symmetrized(
      scale(sub(scale(b.mat(), double(p - 1)), tail), 1.0 / p));
}

}  // namespace

TEST_CASE("scalar inverse square root of 1.5 over q") {
  // q = 2..8 iteration counts under the error criterion
  const int expected[] = {5, 4, 3, 4, 3, 4, 4};
  for (int q = 2; q <= 8; ++q) {
    const ScalarReport rep = scalar_invroot(1.5, scalar_params(2, q), 1.0);
    CHECK(rep.converged);
    CHECK(rep.iterations == expected[q - 2]);
  }
}

TEST_CASE("scalar exact start stops immediately") {
  for (int p : {1, 2, 5}) {
    const ScalarReport rep = scalar_invroot(1.0, scalar_params(p, 3), 1.0);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(rep.value_history.size() == 1);
    CHECK(rep.value_history[0] == 1.0);
    CHECK(rep.residual_history[0] == 0.0);
  }
}

TEST_CASE("scalar counts agree with the high-precision replay") {
  struct Case {
    double lambda;
    int p, q;
  };
  const Case cases[] = {
      {0.5, 1, 3}, {0.5, 2, 4}, {1.5, 2, 2}, {1.5, 2, 4}, {0.1, 3, 3}, {1e-6, 1, 5},
  };
  for (const auto& c : cases) {
    const int oracle = scalar_count_hiprec(c.lambda, c.p, c.q, 1e-8);
    const ScalarReport rep = scalar_invroot(c.lambda, scalar_params(c.p, c.q), 1.0);
    INFO("lambda=", c.lambda, " p=", c.p, " q=", c.q);
    CHECK(rep.converged);
    CHECK(rep.iterations == oracle);
  }
}

TEST_CASE("scalar divergence guard") {
  const ScalarReport rep = scalar_invroot(2.1, scalar_params(1, 2), 1.0);
  CHECK_FALSE(rep.converged);
  CHECK(rep.diverged);
}

TEST_CASE("scalar histories are aligned") {
  const ScalarReport rep = scalar_invroot(0.5, scalar_params(2, 3), 1.0);
  CHECK(rep.value_history.size() == std::size_t(rep.iterations) + 1);
  CHECK(rep.residual_history.size() == rep.value_history.size());
  CHECK(rep.error_history.size() == rep.value_history.size());
  // r_k = 1 - b_k^2 * 0.5 entrywise
  for (std::size_t k = 0; k < rep.value_history.size(); ++k) {
    const double b = rep.value_history[k];
    CHECK(rep.residual_history[k] == doctest::Approx(1.0 - b * b * 0.5).epsilon(1e-15));
  }
}

TEST_CASE("scalar parameter validation") {
  CHECK_THROWS_AS(scalar_invroot(-1.0, scalar_params(2, 3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(scalar_invroot(1.0, scalar_params(0, 3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(scalar_invroot(1.0, scalar_params(2, 1), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(scalar_invroot(1.0, scalar_params(2, 3), -2.0), std::invalid_argument);
}

TEST_CASE("matrix_step on the identity") {
  for (auto [p, q] : {std::pair{1, 2}, {3, 4}, {2, 6}}) {
    MultLedger ledger;
    const SymMatrix i4 = SymMatrix::identity(4);
    const auto [next, r] = matrix_step(i4, i4, p, q, ledger);
    CHECK(rel_diff_fro(next, i4) == 0.0);
    CHECK(norm_fro(r.mat()) == 0.0);
    CHECK(ledger.count == p + q - 1);
  }
}

TEST_CASE("matrix_step p=1 q=2 equals explicit 2B - B^2 A elementwise") {
  const SymMatrix a = random_spd(6, 0.2, 0.9, 7);
  // commuting start: B = polynomial in A
  const SymMatrix bc = spectral_function(a, [](double x) { return 1.0 + 0.3 * x; });
  MultLedger l1, l2;
  const auto [next, r] = matrix_step(bc, a, 1, 2, l1);
  const SymMatrix ns = newton_schulz_step(bc, a, l2);
  CHECK(max_abs(sub(next.mat(), ns.mat())) <= 1e-13 * std::max(1.0, max_abs(ns)));
}

TEST_CASE("1x1 matrix_step reproduces the scalar recurrence bit for bit") {
  for (auto [p, q] : {std::pair{1, 2}, {2, 3}, {3, 5}, {4, 2}}) {
    const double lambda = 0.37;
    const double b0 = 1.0;
    // one scalar step under the same arithmetic
    IterationParams params = scalar_params(p, q, 1e-30, StopCriterion::ResidualNorm);
    params.max_iter = 1;
    const ScalarReport srep = scalar_invroot(lambda, params, b0);
    REQUIRE(srep.value_history.size() >= 2);

    MultLedger ledger;
    Matrix a1(1), b1(1);
    a1(0, 0) = lambda;
    b1(0, 0) = b0;
    const auto [next, r] = matrix_step(SymMatrix::from_matrix(b1),
                                       SymMatrix::from_matrix(a1), p, q, ledger);
    CHECK(next(0, 0) == srep.value_history[1]);
    CHECK(r(0, 0) == srep.residual_history[0]);
  }
}

TEST_CASE("matrix_step matches the binomial sum form") {
  const SymMatrix a = random_spd(8, 0.3, 1.2, 17);
  for (auto [p, q] : {std::pair{1, 3}, {2, 2}, {2, 5}, {3, 4}}) {
    SymMatrix b = SymMatrix::identity(8);
    MultLedger ledger;
    for (int step = 0; step < 3; ++step) {
      const SymMatrix oracle = binomial_form_step(b, a, p, q);
      const auto [next, r] = matrix_step(b, a, p, q, ledger);
      CHECK(rel_diff_fro(next, oracle) <= 1e-12);
      b = next;
    }
  }
}

TEST_CASE("matrix_step matches the literal defining form") {
  const SymMatrix a = random_spd(7, 0.5, 1.5, 23);  // well conditioned
  for (auto [p, q] : {std::pair{2, 2}, {2, 3}, {3, 2}, {4, 3}}) {
    SymMatrix b = SymMatrix::identity(7);
    MultLedger ledger;
    for (int step = 0; step < 2; ++step) {
      const SymMatrix oracle = defining_form_step(b, a, p, q);
      const auto [next, r] = matrix_step(b, a, p, q, ledger);
      CHECK(rel_diff_fro(next, oracle) <= 1e-9);
      b = next;
    }
  }
}

TEST_CASE("reference stepper equivalences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 3 + seed % 6;
    const SymMatrix a = random_spd(n, 0.2, 0.95, 100 + seed);
    const SymMatrix b = spectral_function(a, [](double x) { return 1.0 + 0.1 * x; });

    MultLedger l;
    // bini with p=1 is exactly newton-schulz algebraically
    const SymMatrix bini1 = bini_step(b, a, 1, l);
    const SymMatrix ns = newton_schulz_step(b, a, l);
    CHECK(rel_diff_fro(bini1, ns) <= 1e-13);

    for (int p : {1, 2, 3}) {
      const auto [mstep, r] = matrix_step(b, a, p, 2, l);
      const SymMatrix bini = bini_step(b, a, p, l);
      CHECK(rel_diff_fro(mstep, bini) <= 1e-13);
    }
    for (int q : {2, 3, 5}) {
      const auto [mstep, r] = matrix_step(b, a, 1, q, l);
      const SymMatrix alt = altman_step(b, a, q, l);
      CHECK(rel_diff_fro(mstep, alt) <= 1e-13);
    }
  }
}

TEST_CASE("reference stepper ledger counts") {
  const SymMatrix a = random_spd(4, 0.3, 0.9, 3);
  const SymMatrix b = SymMatrix::identity(4);
  MultLedger l1;
  (void)bini_step(b, a, 3, l1);
  CHECK(l1.count == 4);  // B^{p+1} needs p products, then times A
  MultLedger l2;
  (void)altman_step(b, a, 4, l2);
  CHECK(l2.count == 4);  // BA, R^2, R^3, B*T
  MultLedger l3;
  (void)newton_schulz_step(b, a, l3);
  CHECK(l3.count == 2);
}

TEST_CASE("pan_reif_init examples") {
  const SymMatrix two_i = SymMatrix::diagonal({2.0, 2.0, 2.0});
  const SymMatrix b0 = pan_reif_init(two_i);
  CHECK(b0(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  const SymMatrix d = SymMatrix::diagonal({1.0, 4.0});
  const SymMatrix b1 = pan_reif_init(d);
  CHECK(b1(0, 0) == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(b1(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  MultLedger scratch;
  const SymMatrix r0 = SymMatrix::symmetrized(
      sub_from_identity(mat_mul(b1.mat(), d.mat(), scratch)));
  CHECK(norm_two_sym(r0) == doctest::Approx(0.9375).epsilon(1e-14));

  CHECK_THROWS_AS(pan_reif_init(SymMatrix::diagonal({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("pan_reif start contracts for spectral radius >= 1") {
  // residual norm of I - B0^p A evaluated on the spectrum (B0 commutes with A)
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const double rho = 1.0 + 9.0 * (seed % 10) / 10.0;
    const SymMatrix a = random_spd(8, rho / 50.0, rho, 500 + seed);
    const double s = norm_one(a) * norm_inf(a);
    for (int p = 1; p <= 5; ++p) {
      double worst = 0.0;
      for (double lam : jacobi_eigenvalues(a)) {
        const double delta = std::pow(lam / s, p) * lam;
        CHECK(delta > 0.0);
        worst = std::max(worst, std::abs(1.0 - delta));
      }
      CHECK(worst < 1.0);
    }
  }
}

TEST_CASE("matrix_invroot on the identity charges only the initial residual") {
  IterationParams params;
  params.p = 3;
  params.q = 4;
  params.epsilon = 1e-10;
  const IterationReport rep = matrix_invroot(SymMatrix::identity(5), params);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.mults == 3);
  CHECK(rel_diff_fro(rep.final, SymMatrix::identity(5)) == 0.0);
}

TEST_CASE("matrix_invroot converges to the spectral ground truth") {
  Matrix raw = from_rows({{2.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3}});
  const SymMatrix a = SymMatrix::from_matrix(raw);
  IterationParams params;
  params.p = 2;
  params.q = 3;
  params.epsilon = 1e-10;
  const IterationReport rep = matrix_invroot(a, params);
  CHECK(rep.converged);
  MultLedger scratch;
  const Matrix b2a = mat_mul(mat_mul(rep.final.mat(), rep.final.mat(), scratch), a.mat(), scratch);
  CHECK(norm_two_sym(SymMatrix::symmetrized(sub_from_identity(b2a))) < 1e-9);
  const SymMatrix truth =
      spectral_function(a, [](double x) { return std::pow(x, -0.5); });
  CHECK(rel_diff_fro(rep.final, truth) <= 1e-9);
}

TEST_CASE("ledger identity holds for every run") {
  for (auto [p, q] : {std::pair{1, 2}, {1, 5}, {2, 3}, {3, 4}, {4, 6}}) {
    const SymMatrix a = random_spd(6, 0.01, 0.9, 77);
    IterationParams params;
    params.p = p;
    params.q = q;
    params.epsilon = 1e-6;
    const IterationReport rep = matrix_invroot(a, params);
    CHECK(rep.mults == p + (p + q - 1) * static_cast<long long>(rep.iterations));
    CHECK(rep.residual_norms.size() == std::size_t(rep.iterations) + 1);
    if (rep.converged) CHECK(rep.residual_norms.back() < params.epsilon);
  }
}

TEST_CASE("matrix_invroot error criterion uses the tracked error") {
  const SymMatrix a = random_spd(5, 0.3, 0.9, 11);
  IterationParams params;
  params.p = 2;
  params.q = 2;
  params.epsilon = 1e-8;
  params.stop = StopCriterion::ErrorNorm;
  const IterationReport rep = matrix_invroot(a, params);
  CHECK(rep.converged);
  CHECK(rep.error_norms.size() == rep.residual_norms.size());
  CHECK(rep.error_norms.back() < 1e-8);
}

TEST_CASE("matrix_invroot rejects non-SPD input") {
  IterationParams params;
  params.p = 2;
  params.q = 2;
  CHECK_THROWS_AS(matrix_invroot(SymMatrix::diagonal({1.0, -1.0}), params),
                  NotPositiveDefinite);
}

TEST_CASE("matrix_invroot flags divergence") {
  // rho(A) beyond the q=2 convergence radius for p=1 with B0 = I
  IterationParams params;
  params.p = 1;
  params.q = 2;
  params.epsilon = 1e-8;
  const IterationReport rep = matrix_invroot(SymMatrix::diagonal({2.2, 1.0}), params);
  CHECK_FALSE(rep.converged);
  CHECK(rep.diverged);
}

TEST_CASE("matrix_step rejects a non-commuting pair") {
  const SymMatrix a = SymMatrix::diagonal({1.0, 2.0});
  const SymMatrix b = sym({{2, 1}, {1, 1}});
  MultLedger l;
  CHECK_THROWS_AS(matrix_step(b, a, 1, 2, l), CommutationError);
  CHECK_THROWS_AS(matrix_step(b, a, 3, 2, l), CommutationError);
}

TEST_CASE("iterates commute with A along the run") {
  const SymMatrix a = random_spd(6, 0.05, 0.9, 31);
  const double norm_a = norm_two_sym(a);
  IterationParams params;
  params.p = 2;
  params.q = 4;
  params.epsilon = 1e-9;
  SymMatrix b = SymMatrix::identity(6);
  MultLedger ledger;
  for (int k = 0; k < 4; ++k) {
    MultLedger scratch;
    const Matrix ba = mat_mul(b.mat(), a.mat(), scratch);
    const Matrix ab = mat_mul(a.mat(), b.mat(), scratch);
    CHECK(norm_fro(sub(ba, ab)) <= 1e-8 * norm_a * norm_two_sym(b));
    const auto [next, r] = matrix_step(b, a, params.p, params.q, ledger);
    b = next;
  }
}

TEST_CASE("spectral mapping: matrix iterates follow the scalar recurrence") {
  const SymMatrix a = random_spd(8, 0.1, 0.95, 55);
  const EigenDecomposition ed = jacobi_eigh(a);
  const int p = 2, q = 3;
  const double alpha = 0.8;

  std::vector<double> scalar_b(8, alpha);
  SymMatrix b = SymMatrix::diagonal(std::vector<double>(8, alpha));
  MultLedger ledger;
  for (int step = 0; step < 5; ++step) {
    const auto [next, r] = matrix_step(b, a, p, q, ledger);
    b = next;
    for (std::size_t i = 0; i < 8; ++i) {
      IterationParams params = scalar_params(p, q, 1e-30, StopCriterion::ResidualNorm);
      params.max_iter = step + 1;
      const ScalarReport srep =
          scalar_invroot(ed.eigenvalues[i], params, alpha);
      // a run that hits an exactly-zero residual freezes at its fixed point
      const std::size_t idx =
          std::min<std::size_t>(step + 1, srep.value_history.size() - 1);
      scalar_b[i] = srep.value_history[idx];
    }
    // Rayleigh quotients in A's eigenbasis recover the per-eigenvalue iterates
    for (std::size_t i = 0; i < 8; ++i) {
      double bi = 0.0;
      for (std::size_t r1 = 0; r1 < 8; ++r1)
        for (std::size_t c1 = 0; c1 < 8; ++c1)
          bi += ed.eigenvectors(r1, i) * b(r1, c1) * ed.eigenvectors(c1, i);
      CHECK(std::abs(bi - scalar_b[i]) <= 1e-12 * std::max(1.0, std::abs(scalar_b[i])));
    }
  }
}

TEST_CASE("engine trajectory equals repeated matrix_step exactly") {
  const SymMatrix a = random_spd(5, 0.2, 0.9, 99);
  IterationParams params;
  params.p = 2;
  params.q = 3;
  params.epsilon = 1e-9;
  const IterationReport rep = matrix_invroot(a, params);

  SymMatrix b = SymMatrix::identity(5);
  MultLedger ledger;
  for (int k = 0; k < rep.iterations; ++k) {
    const auto [next, r] = matrix_step(b, a, params.p, params.q, ledger);
    b = next;
  }
  CHECK(rel_diff_fro(rep.final, b) == 0.0);
}
