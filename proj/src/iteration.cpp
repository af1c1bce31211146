#include "pqroot/iteration.hpp"

#include <cmath>

namespace pqroot {

namespace {

constexpr double kCommutationTol = 1e-8;
constexpr double kDivergenceGuard = 1e2;  // abort when ||R_k||_2 exceeds this

double norm_two_upper_bound(const Matrix& m) {
  return std::min(norm_fro(m), std::sqrt(norm_one(m) * norm_inf(m)));
}

// R = I - A B^p, unsymmetrized; charges exactly p.
Matrix residual_raw(const SymMatrix& b, const SymMatrix& a, int p, MultLedger& ledger) {
  Matrix bp = b.mat();
  for (int i = 2; i <= p; ++i) bp = mat_mul(bp, b.mat(), ledger);
  return sub_from_identity(mat_mul(a.mat(), bp, ledger));
}

// B_next = (1/p) B [pI + R + ... + R^{q-1}], residual powers taken literally;
// charges exactly q - 1. The new iterate is symmetrized (the carrier is
// symmetric; the projection stays within the step's own roundoff).
SymMatrix expansion_raw(const SymMatrix& b, const Matrix& r, int p, int q,
                        MultLedger& ledger) {
  const std::size_t n = b.n();
  Matrix t = add(scale(Matrix::identity(n), static_cast<double>(p)), r);
  Matrix rp = r;
  for (int i = 2; i < q; ++i) {
    rp = mat_mul(rp, r, ledger);
    t = add(t, rp);
  }
  return SymMatrix::symmetrized(scale(mat_mul(b.mat(), t, ledger), 1.0 / p));
}

}  // namespace

ScalarReport scalar_invroot(double lambda, const IterationParams& params, double b0) {
  params.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("scalar_invroot: lambda must be > 0");
  if (!(b0 > 0.0)) throw std::invalid_argument("scalar_invroot: b0 must be > 0");

  const int p = params.p;
  const int q = params.q;
  const double inv_p = 1.0 / p;
  const double truth = std::pow(lambda, -1.0 / p);

  double b = b0;
  double bp = b;
  for (int i = 2; i <= p; ++i) bp *= b;
  double r = 1.0 - lambda * bp;

  ScalarReport rep;
  rep.value_history.push_back(b);
  rep.residual_history.push_back(r);
  rep.error_history.push_back(b - truth);

  int k = 0;
  while (true) {
    const double stopq = params.stop == StopCriterion::ErrorNorm
                             ? std::abs(b - truth)
                             : std::abs(r);
    if (stopq < params.epsilon) {
      rep.converged = true;
      break;
    }
    if (std::abs(r) > 10.0) {
      rep.diverged = true;
      break;
    }
    if (k == params.max_iter) break;

    double t = static_cast<double>(p);
    double rp = r;
    t += rp;
    for (int i = 2; i < q; ++i) {
      rp *= r;
      t += rp;
    }
    b = inv_p * (b * t);
    bp = b;
    for (int i = 2; i <= p; ++i) bp *= b;
    r = 1.0 - lambda * bp;
    ++k;
    rep.value_history.push_back(b);
    rep.residual_history.push_back(r);
    rep.error_history.push_back(b - truth);
  }
  rep.iterations = k;
  return rep;
}

SymMatrix pan_reif_init(const SymMatrix& a) {
  const double s = norm_one(a) * norm_inf(a);
  if (s == 0.0) throw std::invalid_argument("pan_reif_init: zero matrix");
  return SymMatrix::symmetrized(scale(a.mat(), 1.0 / s));
}

SymMatrix make_start_matrix(const SymMatrix& a, const InitPolicy& init) {
  switch (init.kind) {
    case InitPolicy::Identity:
      return SymMatrix::identity(a.n());
    case InitPolicy::ScaledIdentity: {
      std::vector<double> d(a.n(), init.alpha);
      return SymMatrix::diagonal(d);
    }
    case InitPolicy::ScaledA:
      return SymMatrix::symmetrized(scale(a.mat(), init.alpha));
    case InitPolicy::PanReif:
      return pan_reif_init(a);
  }
  throw std::logic_error("make_start_matrix: unknown init policy");
}

std::pair<SymMatrix, SymMatrix> matrix_step(const SymMatrix& b, const SymMatrix& a, int p,
                                            int q, MultLedger& ledger) {
  if (p < 1 || q < 2) throw std::invalid_argument("matrix_step: need p >= 1, q >= 2");
  const Matrix r = residual_raw(b, a, p, ledger);  // p products
  // gross commutation witness: ||A B^p - B^p A||_F is the asymmetry of the
  // product just computed, bounded for a commuting pair by the B-commutator
  // scaled with p ||B||^{p-1}
  const double asym = norm_fro(sub(r, transpose(r)));
  const double ub_b = norm_two_upper_bound(b.mat());
  double tol = kCommutationTol * norm_two_upper_bound(a.mat()) * ub_b;
  for (int i = 1; i < p; ++i) tol *= ub_b;
  tol *= p;
  if (asym > tol && asym > SymMatrix::kSymTol * std::max(1.0, max_abs(r)))
    throw CommutationError(
        "matrix_step: commutation violated, ||A B^p - B^p A||_F = " +
        std::to_string(asym) + " > " + std::to_string(tol));
  SymMatrix next = expansion_raw(b, r, p, q, ledger);  // q-1 products
  return {std::move(next), SymMatrix::symmetrized(r)};
}

SymMatrix bini_step(const SymMatrix& b, const SymMatrix& a, int p, MultLedger& ledger) {
  Matrix bp = b.mat();
  for (int i = 2; i <= p + 1; ++i) bp = mat_mul(bp, b.mat(), ledger);
  const Matrix bpa = mat_mul(bp, a.mat(), ledger);
  return SymMatrix::symmetrized(
      scale(sub(scale(b.mat(), static_cast<double>(p + 1)), bpa), 1.0 / p));
}

SymMatrix altman_step(const SymMatrix& b, const SymMatrix& a, int q, MultLedger& ledger) {
  const std::size_t n = b.n();
  const Matrix ba = mat_mul(b.mat(), a.mat(), ledger);
  const Matrix r = sub_from_identity(ba);
  Matrix t = add(Matrix::identity(n), r);
  Matrix rp = r;
  for (int i = 2; i < q; ++i) {
    rp = mat_mul(rp, r, ledger);
    t = add(t, rp);
  }
  return SymMatrix::symmetrized(mat_mul(b.mat(), t, ledger));
}

SymMatrix newton_schulz_step(const SymMatrix& b, const SymMatrix& a, MultLedger& ledger) {
  const Matrix bb = mat_mul(b.mat(), b.mat(), ledger);
  const Matrix bba = mat_mul(bb, a.mat(), ledger);
  return SymMatrix::symmetrized(sub(scale(b.mat(), 2.0), bba));
}

IterationReport matrix_invroot(const SymMatrix& a, const IterationParams& params,
                               const RunOptions& opts) {
  params.validate();
  const int p = params.p;
  const int q = params.q;

  const EigenDecomposition ed = jacobi_eigh(a);
  if (ed.eigenvalues.front() <= 0.0)
    throw NotPositiveDefinite("matrix_invroot: input has eigenvalue " +
                              std::to_string(ed.eigenvalues.front()));
  const double norm_a = std::max(std::abs(ed.eigenvalues.front()),
                                 std::abs(ed.eigenvalues.back()));

  const bool track_error = opts.track_error || params.stop == StopCriterion::ErrorNorm;
  SymMatrix truth;
  if (track_error) {
    const std::size_t n = a.n();
    const Matrix& qv = ed.eigenvectors;
    std::vector<double> fv(n);
    for (std::size_t i = 0; i < n; ++i)
      fv[i] = std::pow(ed.eigenvalues[i], -1.0 / p);
    Matrix z(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += qv(i, k) * fv[k] * qv(j, k);
        z(i, j) = s;
        z(j, i) = s;
      }
    truth = SymMatrixUnchecked::wrap(std::move(z));
  }

  SymMatrix b = make_start_matrix(a, params.init);
  {
    // start matrices must commute with A; checked once, literally
    MultLedger scratch;
    const Matrix ba = mat_mul(b.mat(), a.mat(), scratch);
    const Matrix ab = mat_mul(a.mat(), b.mat(), scratch);
    const double comm = norm_fro(sub(ba, ab));
    const double tol =
        kCommutationTol * norm_a * std::min(norm_fro(b.mat()),
                                            std::sqrt(norm_one(b) * norm_inf(b)));
    if (comm > tol && comm > SymMatrix::kSymTol * std::max(1.0, max_abs(ba)))
      throw CommutationError("matrix_invroot: B0 does not commute with A, ||B0 A - A B0||_F = " +
                             std::to_string(comm));
  }

  MultLedger ledger;
  Matrix r = residual_raw(b, a, p, ledger);  // the standalone +p in m(p,q,j)

  IterationReport rep;
  rep.residual_norms.push_back(norm_two_sym(SymMatrix::symmetrized(r)));
  if (track_error)
    rep.error_norms.push_back(
        norm_two_sym(SymMatrix::symmetrized(sub(b.mat(), truth.mat()))));

  int k = 0;
  int small_run = 0;
  while (true) {
    const double stopq = params.stop == StopCriterion::ErrorNorm
                             ? rep.error_norms.back()
                             : rep.residual_norms.back();
    if (stopq < params.epsilon) {
      rep.converged = true;
      break;
    }
    if (rep.residual_norms.back() > kDivergenceGuard) {
      rep.diverged = true;
      break;
    }
    if (k == params.max_iter) break;

    b = expansion_raw(b, r, p, q, ledger);  // q-1 products
    r = residual_raw(b, a, p, ledger);      // p products
    ++k;
    rep.residual_norms.push_back(norm_two_sym(SymMatrix::symmetrized(r)));
    if (track_error)
      rep.error_norms.push_back(
          norm_two_sym(SymMatrix::symmetrized(sub(b.mat(), truth.mat()))));

    if (opts.stall_stop) {
      const std::size_t m = rep.residual_norms.size();
      const double prev = rep.residual_norms[m - 2];
      const double change = std::abs(rep.residual_norms[m - 1] - prev) / prev;
      if (change < opts.stall_rel_change) {
        ++small_run;
      } else {
        if (small_run >= opts.stall_window) {
          rep.stagnated = true;
          break;
        }
        small_run = 0;
      }
    }
  }

  rep.iterations = k;
  rep.mults = ledger.count;
  rep.final = std::move(b);
  return rep;
}

}  // namespace pqroot
