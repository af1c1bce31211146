#pragma once

#include <optional>
#include <utility>

#include "pqroot/eigen.hpp"
#include "pqroot/matrix.hpp"

namespace pqroot {

enum class StopCriterion { ResidualNorm, ErrorNorm };

struct InitPolicy {
  enum Kind { Identity, ScaledIdentity, ScaledA, PanReif };
  Kind kind = Identity;
  double alpha = 1.0;  // for ScaledIdentity / ScaledA
};

struct IterationParams {
  int p = 1;
  int q = 2;
  double epsilon = 1e-4;
  int max_iter = 100;
  StopCriterion stop = StopCriterion::ResidualNorm;
  InitPolicy init{};

  void validate() const {
    if (p < 1) throw std::invalid_argument("IterationParams: p must be >= 1");
    if (q < 2) throw std::invalid_argument("IterationParams: q must be >= 2");
    if (!(epsilon > 0.0)) throw std::invalid_argument("IterationParams: epsilon must be > 0");
    if (max_iter < 1) throw std::invalid_argument("IterationParams: max_iter must be >= 1");
    if ((init.kind == InitPolicy::ScaledIdentity || init.kind == InitPolicy::ScaledA) &&
        !(init.alpha > 0.0))
      throw std::invalid_argument("IterationParams: alpha must be > 0");
  }
};

struct ScalarReport {
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  std::vector<double> value_history;     // b_k
  std::vector<double> residual_history;  // r_k = 1 - b_k^p * lambda
  std::vector<double> error_history;     // b_k - lambda^(-1/p)
};

/// Scalar (p,q) iteration b_{k+1} = (1/p) b_k (p + r_k + ... + r_k^{q-1}),
/// r_k = 1 - b_k^p lambda. Arithmetic mirrors the matrix path entrywise, so
/// a 1x1 matrix run reproduces it bit for bit.
ScalarReport scalar_invroot(double lambda, const IterationParams& params, double b0);

/// B0 = A / (||A||_1 ||A||_inf). Throws on the zero matrix.
SymMatrix pan_reif_init(const SymMatrix& a);

SymMatrix make_start_matrix(const SymMatrix& a, const InitPolicy& init);

struct CommutationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One step of the (p,q) iteration:
///   R = I - A B^p,  B_next = (1/p) B [pI + R + ... + R^{q-1}].
/// Charges exactly p + q - 1 products (p for the residual, q-2 for the
/// residual powers, 1 for the update). Returns (B_next, R).
///
/// The residual is used unsymmetrized inside the update; with this pairing
/// the roundoff perturbations stay self-correcting (for p = 1 the identity
/// I - A B_next = R^q holds without assuming commutation). Only the new
/// iterate and the returned residual are symmetrized.
///
/// Throws CommutationError when the input pair grossly violates B A = A B
/// (threshold 1e-8 * ||A||_2 * ||B||_2 scaled to the computed power, using
/// norm upper bounds).
std::pair<SymMatrix, SymMatrix> matrix_step(const SymMatrix& b, const SymMatrix& a, int p,
                                            int q, MultLedger& ledger);

/// Reference steppers for equivalence testing only.
SymMatrix bini_step(const SymMatrix& b, const SymMatrix& a, int p, MultLedger& ledger);
SymMatrix altman_step(const SymMatrix& b, const SymMatrix& a, int q, MultLedger& ledger);
SymMatrix newton_schulz_step(const SymMatrix& b, const SymMatrix& a, MultLedger& ledger);

struct IterationReport {
  bool converged = false;
  bool diverged = false;
  bool stagnated = false;
  int iterations = 0;
  long long mults = 0;
  std::vector<double> residual_norms;  // ||R_k||_2, k = 0..iterations
  std::vector<double> error_norms;     // ||B_k - A^(-1/p)||_2 when tracked
  SymMatrix final;
};

/// Optional extras beyond IterationParams.
struct RunOptions {
  /// Track ||B_k - A^(-1/p)||_2 each step even under ResidualNorm.
  bool track_error = false;
  /// Stop once the residual norm visibly stops moving: after `window`
  /// consecutive steps with relative change < rel_change, the run ends at
  /// the first step whose change is >= rel_change again (the stall break).
  bool stall_stop = false;
  double stall_rel_change = 1e-3;
  int stall_window = 3;
};

/// Full (p,q) run. Total products: p + (p+q-1) * iterations, always.
/// The stop test runs on R_0 / B_0 as well, so an exact start gives 0
/// iterations and p charged products. B_0's commutation with A is checked
/// once, against 1e-8 * ||A||_2 * ||B_0||_2.
IterationReport matrix_invroot(const SymMatrix& a, const IterationParams& params,
                               const RunOptions& opts = {});

}  // namespace pqroot
