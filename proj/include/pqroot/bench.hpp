#pragma once

#include <string>

#include "pqroot/convergence.hpp"
#include "pqroot/iteration.hpp"
#include "pqroot/matgen.hpp"

namespace pqroot {

struct ExperimentConfig {
  std::vector<MatrixSpec> specs;  // cell templates; seed is the base seed
  std::vector<int> p_list;
  std::vector<int> q_list;
  double epsilon = 1e-4;
  int max_iter = 100;
  StopCriterion stop = StopCriterion::ResidualNorm;
  InitPolicy init{};
  int seeds_per_cell = 10;
  bool track_error = false;
  RunOptions run_options{};  // stall-stop profile for precision probes
  int jobs = 1;

  void validate() const;
};

struct BenchRow {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double density = 0.0;
  double cond = 0.0;
  double rho = 0.0;
  int p = 0;
  int q = 0;
  int iterations = 0;
  long long mults = 0;
  double final_residual = 0.0;
  double final_error = 0.0;  // NaN when not tracked
  bool converged = false;
};

struct AggregateRow {
  std::size_t n = 0;
  double density = 0.0;
  double cond = 0.0;
  double rho = 0.0;
  int p = 0;
  int q = 0;
  long long mean_iterations = 0;  // arithmetic mean over converged runs, rounded
  long long mean_mults = 0;
  int converged_runs = 0;
  int total_runs = 0;
};

struct ExperimentResult {
  std::vector<BenchRow> rows;
  std::vector<AggregateRow> aggregates;
};

/// One row per (spec, p, q, seed); member seeds are spec.seed + index.
/// Divergent runs keep iterations = max_iter, converged = false, and are
/// excluded from the aggregate means. Rows are ordered by cell, then seed,
/// regardless of the number of jobs.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);
std::vector<BenchRow> read_bench_csv(const std::string& path);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);

/// CSV rows (p, q, r0, |r1|) from residual_map over the grid.
void emit_residual_map_grid(const std::string& path, const std::vector<int>& p_list,
                            const std::vector<int>& q_list,
                            const std::vector<double>& r_grid);

/// CSV rows (k, error_norm, residual_norm), one per recorded step.
void emit_error_history(const std::string& path, const IterationReport& run);
void emit_error_history(const std::string& path, const ScalarReport& run);

/// Per-q ensemble means over seeds_per_cell members of the spec; q_best by
/// minimal mean mults, ties by mean iterations, then smallest q.
QScanResult ensemble_q_search(const MatrixSpec& spec, int p, int q_lo, int q_hi,
                              const ExperimentConfig& base);

/// Fixed profile for achievable-precision probes (large condition numbers):
/// run far below the usual threshold, cap at 60 iterations, stop when the
/// residual norm visibly stalls, and track the true error.
ExperimentConfig precision_probe_config();

}  // namespace pqroot
