#include "pqroot/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace pqroot {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

long long round_mean(double sum, int count) {
  if (count == 0) return 0;
  return std::llround(sum / count);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (specs.empty() || p_list.empty() || q_list.empty())
    throw std::invalid_argument("ExperimentConfig: empty grid");
  if (seeds_per_cell < 1)
    throw std::invalid_argument("ExperimentConfig: seeds_per_cell must be >= 1");
  if (jobs < 1) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
  for (const auto& s : specs) s.validate();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  struct Task {
    const MatrixSpec* spec;
    int p, q;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& spec : config.specs)
    for (int p : config.p_list)
      for (int q : config.q_list)
        for (int s = 0; s < config.seeds_per_cell; ++s)
          tasks.push_back(Task{&spec, p, q, spec.seed + static_cast<std::uint64_t>(s)});

  std::vector<BenchRow> rows(tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= tasks.size()) break;
      const Task& task = tasks[t];
      MatrixSpec member = *task.spec;
      member.seed = task.seed;
      const SymMatrix a = generate_spd(member);
      const MatrixMeasure meas = measure(a);

      IterationParams params;
      params.p = task.p;
      params.q = task.q;
      params.epsilon = config.epsilon;
      params.max_iter = config.max_iter;
      params.stop = config.stop;
      params.init = config.init;
      RunOptions opts = config.run_options;
      opts.track_error = opts.track_error || config.track_error;
      const IterationReport rep = matrix_invroot(a, params, opts);

      BenchRow row;
      row.seed = task.seed;
      row.n = member.n;
      row.density = meas.density;
      row.cond = meas.cond;
      row.rho = meas.rho;
      row.p = task.p;
      row.q = task.q;
      row.iterations = rep.iterations;
      row.mults = rep.mults;
      row.final_residual = rep.residual_norms.back();
      row.final_error = rep.error_norms.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                : rep.error_norms.back();
      row.converged = rep.converged;
      rows[t] = row;
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.rows = std::move(rows);

  // aggregates per (spec, p, q) cell, converged runs only
  std::size_t idx = 0;
  for (const auto& spec : config.specs)
    for (int p : config.p_list)
      for (int q : config.q_list) {
        AggregateRow agg;
        agg.n = spec.n;
        agg.density = spec.density;
        agg.cond = spec.cond;
        agg.rho = spec.spectral_radius;
        agg.p = p;
        agg.q = q;
        double sum_it = 0.0, sum_mults = 0.0;
        for (int s = 0; s < config.seeds_per_cell; ++s, ++idx) {
          const BenchRow& row = result.rows[idx];
          agg.total_runs += 1;
          if (!row.converged) continue;
          agg.converged_runs += 1;
          sum_it += row.iterations;
          sum_mults += static_cast<double>(row.mults);
        }
        agg.mean_iterations = round_mean(sum_it, agg.converged_runs);
        agg.mean_mults = round_mean(sum_mults, agg.converged_runs);
        result.aggregates.push_back(agg);
      }
  return result;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_bench_csv: cannot write " + path);
  out << "seed,n,density,cond,rho,p,q,iterations,mults,final_residual,final_error,converged\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << r.n << ',' << fmt17(r.density) << ',' << fmt17(r.cond) << ','
        << fmt17(r.rho) << ',' << r.p << ',' << r.q << ',' << r.iterations << ','
        << r.mults << ',' << fmt17(r.final_residual) << ',' << fmt17(r.final_error)
        << ',' << (r.converged ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write_bench_csv: write failed");
}

std::vector<BenchRow> read_bench_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_bench_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_bench_csv: empty file");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    BenchRow r;
    auto next = [&]() {
      if (!std::getline(ls, tok, ',')) throw std::runtime_error("read_bench_csv: short row");
      return tok;
    };
    r.seed = std::stoull(next());
    r.n = std::stoull(next());
    r.density = std::stod(next());
    r.cond = std::stod(next());
    r.rho = std::stod(next());
    r.p = std::stoi(next());
    r.q = std::stoi(next());
    r.iterations = std::stoi(next());
    r.mults = std::stoll(next());
    r.final_residual = std::stod(next());
    r.final_error = std::stod(next());
    r.converged = std::stoi(next()) != 0;
    rows.push_back(r);
  }
  return rows;
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_aggregate_csv: cannot write " + path);
  out << "n,density,cond,rho,p,q,mean_iterations,mean_mults,converged_runs,total_runs\n";
  for (const auto& r : rows) {
    out << r.n << ',' << fmt17(r.density) << ',' << fmt17(r.cond) << ',' << fmt17(r.rho)
        << ',' << r.p << ',' << r.q << ',' << r.mean_iterations << ',' << r.mean_mults
        << ',' << r.converged_runs << ',' << r.total_runs << '\n';
  }
}

void emit_residual_map_grid(const std::string& path, const std::vector<int>& p_list,
                            const std::vector<int>& q_list,
                            const std::vector<double>& r_grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_residual_map_grid: cannot write " + path);
  out << "p,q,r0,abs_r1\n";
  for (int p : p_list)
    for (int q : q_list)
      for (double r : r_grid)
        out << p << ',' << q << ',' << fmt17(r) << ','
            << fmt17(std::abs(residual_map(p, q, r))) << '\n';
}

void emit_error_history(const std::string& path, const IterationReport& run) {
  if (run.error_norms.empty())
    throw std::invalid_argument("emit_error_history: run has no error tracking");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_error_history: cannot write " + path);
  out << "k,error_norm,residual_norm\n";
  for (std::size_t k = 0; k < run.residual_norms.size(); ++k)
    out << k << ',' << fmt17(run.error_norms[k]) << ',' << fmt17(run.residual_norms[k])
        << '\n';
}

void emit_error_history(const std::string& path, const ScalarReport& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_error_history: cannot write " + path);
  out << "k,error_norm,residual_norm\n";
  for (std::size_t k = 0; k < run.value_history.size(); ++k)
    out << k << ',' << fmt17(std::abs(run.error_history[k])) << ','
        << fmt17(std::abs(run.residual_history[k])) << '\n';
}

QScanResult ensemble_q_search(const MatrixSpec& spec, int p, int q_lo, int q_hi,
                              const ExperimentConfig& base) {
  if (q_lo < 2 || q_hi < q_lo) throw std::invalid_argument("ensemble_q_search: bad q range");
  ExperimentConfig config = base;
  config.specs = {spec};
  config.p_list = {p};
  config.q_list.clear();
  for (int q = q_lo; q <= q_hi; ++q) config.q_list.push_back(q);
  const ExperimentResult res = run_experiment(config);

  QScanResult out;
  bool any = false;
  long long best_mults = 0, best_iters = 0;
  for (const auto& agg : res.aggregates) {
    QScanRow row;
    row.q = agg.q;
    row.mean_iterations = static_cast<double>(agg.mean_iterations);
    row.mean_mults = static_cast<double>(agg.mean_mults);
    row.converged_runs = agg.converged_runs;
    out.rows.push_back(row);
    if (agg.converged_runs == 0) continue;
    const bool better = !any || agg.mean_mults < best_mults ||
                        (agg.mean_mults == best_mults && agg.mean_iterations < best_iters);
    if (better) {
      any = true;
      best_mults = agg.mean_mults;
      best_iters = agg.mean_iterations;
      out.q_best = agg.q;
    }
  }
  if (!any) throw std::runtime_error("ensemble_q_search: every q diverged");
  return out;
}

ExperimentConfig precision_probe_config() {
  ExperimentConfig config;
  config.epsilon = 1e-5;
  config.max_iter = 60;
  config.track_error = true;
  config.run_options.stall_stop = true;
  config.run_options.stall_rel_change = 1e-3;
  config.run_options.stall_window = 3;
  return config;
}

}  // namespace pqroot
