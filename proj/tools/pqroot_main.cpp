#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pqroot/bench.hpp"
#include "pqroot/matrix_market.hpp"

namespace {

using namespace pqroot;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::pair<int, int> parse_range(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) throw UsageError("expected range lo..hi, got " + s);
  return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 2))};
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split(s, ',')) out.push_back(std::stoi(t));
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(std::stod(t));
  if (out.empty()) throw UsageError("empty list");
  return out;
}

MatrixSpec parse_spec(const std::string& s) {
  const auto f = split(s, ',');
  if (f.size() != 5) throw UsageError("expected --spec n,density,cond,rho,seed");
  MatrixSpec spec;
  spec.n = std::stoull(f[0]);
  spec.density = std::stod(f[1]);
  spec.cond = std::stod(f[2]);
  spec.spectral_radius = std::stod(f[3]);
  spec.seed = std::stoull(f[4]);
  spec.validate();
  return spec;
}

InitPolicy parse_init(const std::string& s) {
  InitPolicy init;
  if (s == "identity") {
    init.kind = InitPolicy::Identity;
  } else if (s == "pan-reif") {
    init.kind = InitPolicy::PanReif;
  } else if (s.rfind("scaled-identity", 0) == 0 || s.rfind("scaled-a", 0) == 0) {
    init.kind = s.rfind("scaled-identity", 0) == 0 ? InitPolicy::ScaledIdentity
                                                   : InitPolicy::ScaledA;
    const auto pos = s.find(':');
    init.alpha = pos == std::string::npos ? 1.0 : std::stod(s.substr(pos + 1));
  } else {
    throw UsageError("unknown init policy " + s +
                     " (identity|scaled-identity:a|scaled-a:a|pan-reif)");
  }
  return init;
}

StopCriterion parse_criterion(const std::string& s) {
  if (s == "residual") return StopCriterion::ResidualNorm;
  if (s == "error") return StopCriterion::ErrorNorm;
  throw UsageError("unknown criterion " + s + " (error|residual)");
}

int cmd_invroot(const std::string& input, int p, int q, double eps,
                const std::string& init, int max_iter, const std::string& criterion,
                const std::string& output, const std::string& report) {
  const SymMatrix a = read_matrix_market(input);
  IterationParams params;
  params.p = p;
  params.q = q;
  params.epsilon = eps;
  params.max_iter = max_iter;
  params.stop = parse_criterion(criterion);
  params.init = parse_init(init);
  RunOptions opts;
  opts.track_error = !report.empty();
  const IterationReport rep = matrix_invroot(a, params, opts);
  if (!output.empty()) write_matrix_market(output, rep.final);
  if (!report.empty()) emit_error_history(report, rep);
  std::printf("converged=%d iterations=%d mults=%lld final_residual=%.17g\n",
              rep.converged ? 1 : 0, rep.iterations, rep.mults,
              rep.residual_norms.back());
  if (!rep.converged) {
    std::fprintf(stderr, "invroot: no convergence within %d iterations%s\n", max_iter,
                 rep.diverged ? " (diverged)" : "");
    return 1;
  }
  return 0;
}

int cmd_scalar(double lambda, int p, const std::string& q_range, double eps,
               const std::string& criterion, int max_iter, bool csv) {
  const auto [q_lo, q_hi] = parse_range(q_range);
  IterationParams params;
  params.p = p;
  params.epsilon = eps;
  params.max_iter = max_iter;
  params.stop = parse_criterion(criterion);
  if (csv)
    std::printf("q,iterations,mults,converged\n");
  else
    std::printf("%4s %6s %6s %10s\n", "q", "#it", "#mult", "converged");
  bool all_failed = true;
  for (int q = q_lo; q <= q_hi; ++q) {
    params.q = q;
    const ScalarReport rep = scalar_invroot(lambda, params, 1.0);
    // mult accounting follows the matrix ledger convention m(p,q,j)
    const long long mults = p + static_cast<long long>(p + q - 1) * rep.iterations;
    if (rep.converged) all_failed = false;
    if (csv)
      std::printf("%d,%d,%lld,%d\n", q, rep.iterations, mults, rep.converged ? 1 : 0);
    else
      std::printf("%4d %6d %6lld %10s\n", q, rep.iterations, mults,
                  rep.converged ? "yes" : (rep.diverged ? "diverged" : "no"));
  }
  return all_failed ? 1 : 0;
}

int cmd_qscan(const std::string& input, const std::string& spec_str, int p,
              const std::string& q_range, double eps, const std::string& init,
              int max_iter, int seeds, bool csv) {
  const auto [q_lo, q_hi] = parse_range(q_range);
  QScanResult res;
  if (!input.empty()) {
    const SymMatrix a = read_matrix_market(input);
    IterationParams params;
    params.epsilon = eps;
    params.max_iter = max_iter;
    params.init = parse_init(init);
    res = optimal_q_search(a, p, q_lo, q_hi, params);
  } else if (!spec_str.empty()) {
    ExperimentConfig base;
    base.epsilon = eps;
    base.max_iter = max_iter;
    base.init = parse_init(init);
    base.seeds_per_cell = seeds;
    res = ensemble_q_search(parse_spec(spec_str), p, q_lo, q_hi, base);
  } else {
    throw UsageError("qscan: need --input or --spec");
  }
  if (csv)
    std::printf("q,mean_iterations,mean_mults,converged_runs\n");
  else
    std::printf("%4s %8s %8s %10s\n", "q", "#it", "#mult", "converged");
  for (const auto& row : res.rows) {
    if (csv)
      std::printf("%d,%.17g,%.17g,%d\n", row.q, row.mean_iterations, row.mean_mults,
                  row.converged_runs);
    else
      std::printf("%4d %8.0f %8.0f %10d\n", row.q, row.mean_iterations, row.mean_mults,
                  row.converged_runs);
  }
  std::printf("q_best: %d\n", res.q_best);
  return 0;
}

int cmd_stability(const std::string& p_range, const std::string& q_range, double grid,
                  int q_cap, int p_cap, bool csv) {
  const auto [p_lo, p_hi] = parse_range(p_range);
  const auto [q_lo, q_hi] = parse_range(q_range);
  if (csv) {
    std::printf("p,q_max\n");
    for (int p = p_lo; p <= p_hi; ++p)
      std::printf("%d,%d\n", p, stability_scan_max_q(p, grid, q_cap));
    std::printf("q,p_max\n");
    for (int q = q_lo; q <= q_hi; ++q) {
      const auto r = stability_scan_max_p(q, grid, p_cap);
      std::printf("%d,%s\n", q, r ? std::to_string(*r).c_str() : ">cap");
    }
    return 0;
  }
  std::printf("p:    ");
  for (int p = p_lo; p <= p_hi; ++p) std::printf(" %d", p);
  std::printf("\nq_max:");
  for (int p = p_lo; p <= p_hi; ++p) std::printf(" %d", stability_scan_max_q(p, grid, q_cap));
  std::printf("\nq:    ");
  for (int q = q_lo; q <= q_hi; ++q) std::printf(" %d", q);
  std::printf("\np_max:");
  for (int q = q_lo; q <= q_hi; ++q) {
    const auto r = stability_scan_max_p(q, grid, p_cap);
    if (r)
      std::printf(" %d", *r);
    else
      std::printf(" >%d", p_cap);
  }
  std::printf("\n");
  return 0;
}

int cmd_residual_map(const std::string& p_list, const std::string& q_list, double grid,
                     const std::string& out) {
  std::vector<double> r_grid;
  for (double r = 0.0; r < 1.0; r += grid) r_grid.push_back(r);
  emit_residual_map_grid(out, parse_int_list(p_list), parse_int_list(q_list), r_grid);
  return 0;
}

int cmd_gen(const std::string& spec_str, const std::string& out) {
  const MatrixSpec spec = parse_spec(spec_str);
  const SymMatrix a = generate_spd(spec);
  write_matrix_market(out, a);
  const MatrixMeasure m = measure(a);
  std::printf("n=%zu density=%.17g cond=%.17g rho=%.17g seed=%llu\n", a.n(), m.density,
              m.cond, m.rho, static_cast<unsigned long long>(spec.seed));
  return 0;
}

// line-based key=value config; flags override file values
void apply_config_line(ExperimentConfig& config, MatrixSpec& tmpl,
                       std::vector<double>& densities, std::vector<double>& conds,
                       std::vector<double>& rhos, const std::string& key,
                       const std::string& value) {
  if (key == "n")
    tmpl.n = std::stoull(value);
  else if (key == "density")
    densities = parse_double_list(value);
  else if (key == "cond")
    conds = parse_double_list(value);
  else if (key == "rho")
    rhos = parse_double_list(value);
  else if (key == "seed0")
    tmpl.seed = std::stoull(value);
  else if (key == "p")
    config.p_list = parse_int_list(value);
  else if (key == "q")
    config.q_list = parse_int_list(value);
  else if (key == "eps")
    config.epsilon = std::stod(value);
  else if (key == "max_iter")
    config.max_iter = std::stoi(value);
  else if (key == "criterion")
    config.stop = parse_criterion(value);
  else if (key == "init")
    config.init = parse_init(value);
  else if (key == "seeds")
    config.seeds_per_cell = std::stoi(value);
  else if (key == "track_error")
    config.track_error = std::stoi(value) != 0;
  else
    throw UsageError("bench config: unknown key " + key);
}

int cmd_bench(const std::string& config_path, const std::string& out,
              const std::string& agg_out, int jobs) {
  ExperimentConfig config;
  MatrixSpec tmpl;
  std::vector<double> densities{0.003}, conds{500.0}, rhos{0.999};
  tmpl.n = 200;
  tmpl.seed = 1;

  std::ifstream in(config_path);
  if (!in) throw UsageError("bench: cannot open config " + config_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find('=');
    if (pos == std::string::npos) throw UsageError("bench config: expected key=value, got " + line);
    apply_config_line(config, tmpl, densities, conds, rhos, line.substr(0, pos),
                      line.substr(pos + 1));
  }
  if (config.p_list.empty()) config.p_list = {1};
  if (config.q_list.empty()) config.q_list = {2, 3, 4, 5, 6};
  for (double d : densities)
    for (double c : conds)
      for (double r : rhos) {
        MatrixSpec spec = tmpl;
        spec.density = d;
        spec.cond = c;
        spec.spectral_radius = r;
        config.specs.push_back(spec);
      }
  config.jobs = jobs;

  const ExperimentResult res = run_experiment(config);
  write_bench_csv(out, res.rows);
  if (!agg_out.empty()) write_aggregate_csv(agg_out, res.aggregates);
  std::printf("wrote %zu rows to %s\n", res.rows.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inverse p-th roots of symmetric positive definite matrices via the (p,q) iteration family"};
  app.require_subcommand(1);

  // invroot
  auto* invroot = app.add_subcommand("invroot", "compute A^(-1/p) for a Matrix Market input");
  std::string in_path, out_path, report_path, init_str = "identity", criterion = "residual";
  int p = 1, q = 2, max_iter = 100;
  double eps = 1e-4;
  invroot->add_option("--input", in_path, "input matrix (.mtx)")->required();
  invroot->add_option("--p", p, "root index p >= 1")->required();
  invroot->add_option("--q", q, "order of expansion q >= 2")->required();
  invroot->add_option("--eps", eps, "stop threshold");
  invroot->add_option("--init", init_str, "identity|scaled-identity:a|scaled-a:a|pan-reif");
  invroot->add_option("--max-iter", max_iter, "iteration cap");
  invroot->add_option("--criterion", criterion, "error|residual");
  invroot->add_option("--output", out_path, "write B to this .mtx");
  invroot->add_option("--report", report_path, "write per-step history CSV");

  // scalar
  auto* scalar = app.add_subcommand("scalar", "scalar runs over a q range");
  double lambda = 1.0, s_eps = 1e-8;
  std::string s_qrange = "2..8", s_criterion = "error";
  int s_p = 1, s_max_iter = 100;
  bool s_csv = false;
  scalar->add_option("--lambda", lambda, "eigenvalue lambda > 0")->required();
  scalar->add_option("--p", s_p, "root index p >= 1")->required();
  scalar->add_option("--q-range", s_qrange, "q range lo..hi");
  scalar->add_option("--eps", s_eps, "stop threshold");
  scalar->add_option("--criterion", s_criterion, "error|residual");
  scalar->add_option("--max-iter", s_max_iter, "iteration cap");
  scalar->add_flag("--csv", s_csv, "emit CSV instead of aligned table");

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment grid from a config file");
  std::string b_config, b_out = "rows.csv", b_agg;
  int b_jobs = 1;
  bench->add_option("--config", b_config, "key=value config file")->required();
  bench->add_option("--out", b_out, "per-run CSV output");
  bench->add_option("--agg", b_agg, "aggregate CSV output");
  bench->add_option("--jobs", b_jobs, "parallel runs (results order-stable)");

  // qscan
  auto* qscan = app.add_subcommand("qscan", "find the best q for a matrix or ensemble");
  std::string qs_input, qs_spec, qs_qrange = "2..6", qs_init = "identity";
  int qs_p = 1, qs_max_iter = 100, qs_seeds = 10;
  double qs_eps = 1e-4;
  bool qs_csv = false;
  qscan->add_option("--input", qs_input, "matrix file");
  qscan->add_option("--spec", qs_spec, "n,density,cond,rho,seed ensemble template");
  qscan->add_option("--p", qs_p, "root index")->required();
  qscan->add_option("--q-range", qs_qrange, "q range lo..hi");
  qscan->add_option("--eps", qs_eps, "stop threshold");
  qscan->add_option("--init", qs_init, "start matrix policy");
  qscan->add_option("--max-iter", qs_max_iter, "iteration cap");
  qscan->add_option("--seeds", qs_seeds, "ensemble members for --spec");
  qscan->add_flag("--csv", qs_csv, "emit CSV");

  // stability-table
  auto* stab = app.add_subcommand("stability-table", "max stable q per p and p per q");
  std::string st_prange = "2..10", st_qrange = "3..10";
  double st_grid = 1e-4;
  int st_qcap = 40, st_pcap = 20;
  bool st_csv = false;
  stab->add_option("--p-range", st_prange, "p range lo..hi");
  stab->add_option("--q-range", st_qrange, "q range lo..hi");
  stab->add_option("--grid", st_grid, "r0 grid step");
  stab->add_option("--q-cap", st_qcap, "scan cap for q");
  stab->add_option("--p-cap", st_pcap, "scan cap for p");
  stab->add_flag("--csv", st_csv, "emit CSV");

  // residual-map
  auto* rmap = app.add_subcommand("residual-map", "emit |r1|(r0) grid CSV");
  std::string rm_plist = "1,2,3", rm_qlist = "2,4,6", rm_out = "map.csv";
  double rm_grid = 1e-3;
  rmap->add_option("--p-list", rm_plist, "comma-separated p values");
  rmap->add_option("--q-list", rm_qlist, "comma-separated q values");
  rmap->add_option("--grid", rm_grid, "r0 grid step");
  rmap->add_option("--out", rm_out, "output CSV")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a seeded random SPD matrix");
  std::string g_spec, g_out;
  gen->add_option("--spec", g_spec, "n,density,cond,rho,seed")->required();
  gen->add_option("--out", g_out, "output .mtx")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(invroot))
      return cmd_invroot(in_path, p, q, eps, init_str, max_iter, criterion, out_path,
                         report_path);
    if (app.got_subcommand(scalar))
      return cmd_scalar(lambda, s_p, s_qrange, s_eps, s_criterion, s_max_iter, s_csv);
    if (app.got_subcommand(bench)) return cmd_bench(b_config, b_out, b_agg, b_jobs);
    if (app.got_subcommand(qscan))
      return cmd_qscan(qs_input, qs_spec, qs_p, qs_qrange, qs_eps, qs_init, qs_max_iter,
                       qs_seeds, qs_csv);
    if (app.got_subcommand(stab))
      return cmd_stability(st_prange, st_qrange, st_grid, st_qcap, st_pcap, st_csv);
    if (app.got_subcommand(rmap)) return cmd_residual_map(rm_plist, rm_qlist, rm_grid, rm_out);
    if (app.got_subcommand(gen)) return cmd_gen(g_spec, g_out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
