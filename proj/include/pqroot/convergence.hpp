#pragma once

#include <optional>
#include <vector>

#include "pqroot/iteration.hpp"

namespace pqroot {

/// Exact one-step residual map at lambda = 1: b0 = (1-r0)^(1/p), one scalar
/// step, returns r1 = 1 - b1^p. Returns 1.0 at r0 == 1 (the map's limit);
/// throws outside [0, 1].
double residual_map(int p, int q, double r0);

/// The verbatim one-step bound bracket of the convergence condition,
///   g(r) = r^q - (1/p^p) sum_{i=2}^p C(p,i) p^{p-i} r^{i-1} (1-r)^{1-i} (1-r^q)^i,
/// evaluated on a residual spectrum; returns max |g|. Documented to disagree
/// with the exact map for p >= 2 (see corrected_condition_c), kept for
/// reference against the printed formula.
double paper_condition_c(const std::vector<double>& spectrum_r0, int p, int q);

/// Same structure with q replaced by q-1 in the powers,
///   h(r) = r^{q-1} - (1/p^p) sum_{i=2}^p C(p,i) p^{p-i} r^{i-1} (1-r)^{1-i} (1-r^{q-1})^i,
/// which satisfies residual_map(p,q,r) == r * h(r). Returns max |h|.
double corrected_condition_c(const std::vector<double>& spectrum_r0, int p, int q);

/// Largest q <= q_cap with |residual_map(p,q,r)| < 1 on the grid
/// {delta, delta+step, ..., 1-delta}, delta = 1e-6. p = 1 never fails and
/// returns q_cap.
int stability_scan_max_q(int p, double r_grid_step = 1e-4, int q_cap = 40);

/// Symmetric scan over p; empty optional means every p <= p_cap passes
/// ("exceeds cap").
std::optional<int> stability_scan_max_p(int q, double r_grid_step = 1e-4, int p_cap = 20);

/// Least-squares slope of log e_{k+1} vs log e_k over the qualifying tail:
/// strictly decreasing |errors| above 1e-13, preferring those below 1e-2,
/// extended backwards until at least 3 points are available. Throws when
/// fewer than 3 usable points exist.
double estimate_order(const std::vector<double>& error_history);

struct QScanRow {
  int q = 0;
  double mean_iterations = 0.0;
  double mean_mults = 0.0;
  int converged_runs = 0;
};

struct QScanResult {
  int q_best = 0;
  std::vector<QScanRow> rows;
};

/// Runs matrix_invroot for each q in [q_lo, q_hi]; q_best minimizes mean
/// mults among converged q, ties broken by mean iterations, then smallest q.
/// Throws when every q diverges.
QScanResult optimal_q_search(const SymMatrix& a, int p, int q_lo, int q_hi,
                             const IterationParams& base);

}  // namespace pqroot
