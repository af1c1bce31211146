#include "pqroot/convergence.hpp"

#include <algorithm>
#include <cmath>

namespace pqroot {

namespace {

constexpr double kGridDelta = 1e-6;
constexpr double kOrderFloor = 1e-13;
constexpr double kOrderWindowHi = 1e-2;
constexpr int kOrderMinPoints = 3;

double binom(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// shared bracket for the printed (qq = q) and corrected (qq = q-1) forms
double condition_bracket(double r, int p, int qq) {
  double acc = std::pow(r, qq);
  if (p >= 2) {
    const double pp = std::pow(static_cast<double>(p), p);
    double s = 0.0;
    for (int i = 2; i <= p; ++i) {
      s += binom(p, i) * std::pow(static_cast<double>(p), p - i) *
           std::pow(r, i - 1) * std::pow(1.0 - r, 1 - i) *
           std::pow(1.0 - std::pow(r, qq), i);
    }
    acc -= s / pp;
  }
  return acc;
}

double condition_max(const std::vector<double>& spectrum, int p, int qq) {
  double best = 0.0;
  for (double r : spectrum) {
    if (!(r > -1.0 && r < 1.0))
      throw std::domain_error("condition: spectrum entry outside (-1, 1)");
    best = std::max(best, std::abs(condition_bracket(r, p, qq)));
  }
  return best;
}

bool scan_pair_stable(int p, int q, double step) {
  // grid {delta, delta+step, ..., 1-delta}, endpoint included
  const double hi = 1.0 - kGridDelta;
  double r = kGridDelta;
  while (true) {
    if (!(std::abs(residual_map(p, q, r)) < 1.0)) return false;
    if (r >= hi) break;
    r += step;
    if (r > hi) r = hi;
  }
  return true;
}

}  // namespace

double residual_map(int p, int q, double r0) {
  if (p < 1 || q < 2) throw std::invalid_argument("residual_map: need p >= 1, q >= 2");
  if (r0 < 0.0 || r0 > 1.0)
    throw std::domain_error("residual_map: r0 must lie in [0, 1]");
  if (r0 == 1.0) return 1.0;  // limit of the map as r0 -> 1

  const double b0 = std::pow(1.0 - r0, 1.0 / p);
  double t = static_cast<double>(p);
  double rp = r0;
  t += rp;
  for (int i = 2; i < q; ++i) {
    rp *= r0;
    t += rp;
  }
  const double b1 = (1.0 / p) * (b0 * t);
  double bp = b1;
  for (int i = 2; i <= p; ++i) bp *= b1;
  return 1.0 - bp;
}

double paper_condition_c(const std::vector<double>& spectrum_r0, int p, int q) {
  if (p < 1 || q < 2) throw std::invalid_argument("paper_condition_c: need p >= 1, q >= 2");
  return condition_max(spectrum_r0, p, q);
}

double corrected_condition_c(const std::vector<double>& spectrum_r0, int p, int q) {
  if (p < 1 || q < 2)
    throw std::invalid_argument("corrected_condition_c: need p >= 1, q >= 2");
  return condition_max(spectrum_r0, p, q - 1);
}

int stability_scan_max_q(int p, double r_grid_step, int q_cap) {
  if (p < 1) throw std::invalid_argument("stability_scan_max_q: p must be >= 1");
  if (p == 1) return q_cap;  // r1 = r0^q never leaves [0,1)
  int best = 0;
  for (int q = 2; q <= q_cap; ++q)
    if (scan_pair_stable(p, q, r_grid_step)) best = q;
  return best;
}

std::optional<int> stability_scan_max_p(int q, double r_grid_step, int p_cap) {
  if (q < 2) throw std::invalid_argument("stability_scan_max_p: q must be >= 2");
  int best = 0;
  for (int p = 1; p <= p_cap; ++p)
    if (scan_pair_stable(p, q, r_grid_step)) best = p;
  if (best >= p_cap) return std::nullopt;  // exceeds cap
  return best;
}

double estimate_order(const std::vector<double>& error_history) {
  // usable magnitudes above the floating-point floor
  std::vector<double> mags;
  for (double e : error_history) {
    const double m = std::abs(e);
    if (m > kOrderFloor) mags.push_back(m);
  }
  // strictly decreasing tail, scanned from the end
  std::size_t start = mags.size();
  while (start > 0) {
    if (start == mags.size() || mags[start - 1] > mags[start])
      --start;
    else
      break;
  }
  std::vector<double> tail(mags.begin() + start, mags.end());
  // prefer the asymptotic window below 1e-2, extend backwards if short
  std::size_t first = 0;
  while (first < tail.size() && tail[first] >= kOrderWindowHi) ++first;
  while (first > 0 && tail.size() - first < kOrderMinPoints) --first;
  tail.erase(tail.begin(), tail.begin() + first);

  if (tail.size() < kOrderMinPoints)
    throw std::invalid_argument("estimate_order: insufficient usable points");

  // least-squares slope of log e_{k+1} against log e_k
  const std::size_t m = tail.size() - 1;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(tail[i]);
    const double y = std::log(tail[i + 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("estimate_order: degenerate abscissae");
  return (m * sxy - sx * sy) / denom;
}

QScanResult optimal_q_search(const SymMatrix& a, int p, int q_lo, int q_hi,
                             const IterationParams& base) {
  if (q_lo < 2 || q_hi < q_lo)
    throw std::invalid_argument("optimal_q_search: bad q range");
  QScanResult res;
  bool any = false;
  double best_mults = 0.0, best_iters = 0.0;
  for (int q = q_lo; q <= q_hi; ++q) {
    IterationParams params = base;
    params.p = p;
    params.q = q;
    const IterationReport rep = matrix_invroot(a, params);
    QScanRow row;
    row.q = q;
    row.mean_iterations = rep.iterations;
    row.mean_mults = static_cast<double>(rep.mults);
    row.converged_runs = rep.converged ? 1 : 0;
    res.rows.push_back(row);
    if (!rep.converged) continue;
    const bool better =
        !any || row.mean_mults < best_mults ||
        (row.mean_mults == best_mults && row.mean_iterations < best_iters);
    if (better) {
      any = true;
      best_mults = row.mean_mults;
      best_iters = row.mean_iterations;
      res.q_best = q;
    }
  }
  if (!any) throw std::runtime_error("optimal_q_search: every q diverged");
  return res;
}

}  // namespace pqroot
