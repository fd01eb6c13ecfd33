// Benchmark front end for the DC sparse-recovery/outlier-detection library:
// seeded data generation, single solves, table reproduction batches, solver
// comparison, recovery scatter data and convergence certification.

#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include "dcopt/dcopt.hpp"

namespace {

using namespace dcopt;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool trace = false;
};

ExperimentConfig load_config(const GlobalArgs& args) {
  ExperimentConfig cfg = args.config_path.empty()
                             ? config_from_map(ConfigMap{})
                             : config_from_map(parse_config_file(args.config_path));
  if (args.seed) {
    cfg.master_seed = *args.seed;
    cfg.seeds.clear();
  }
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

void write_vector_csv(const std::string& path, const std::string& column, const Vector& v) {
  std::vector<CsvRow> rows;
  rows.reserve(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) rows.push_back({fmt_int(i), fmt_full(v[i])});
  write_csv(path, {"index", column}, rows);
}

int cmd_gen(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const ScaleDims dims = cfg.dims(cfg.scales.front());
  const std::uint64_t seed = cfg.seed_list().front();
  const InstanceData inst = generate_instance(cfg, dims, seed);
  ensure_out_dir(args.out_dir);

  std::vector<CsvRow> arows;
  arows.reserve(static_cast<std::size_t>(inst.A.rows()));
  for (Index i = 0; i < inst.A.rows(); ++i) {
    CsvRow row;
    row.reserve(static_cast<std::size_t>(inst.A.cols()));
    for (Index j = 0; j < inst.A.cols(); ++j) row.push_back(fmt_full(inst.A(i, j)));
    arows.push_back(std::move(row));
  }
  {
    std::ofstream out(args.out_dir + "/A.csv", std::ios::binary);
    if (!out) throw ConfigError("cannot write " + args.out_dir + "/A.csv");
    for (const auto& row : arows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ',';
        out << row[j];
      }
      out << '\n';
    }
  }
  write_vector_csv(args.out_dir + "/b.csv", "b", inst.b);
  write_vector_csv(args.out_dir + "/x_true.csv", "x_true", inst.x_true);
  {
    std::vector<CsvRow> rows;
    for (Index i : inst.outlier_rows) rows.push_back({fmt_int(i)});
    write_csv(args.out_dir + "/outliers.csv", {"row"}, rows);
  }
  write_csv(args.out_dir + "/meta.csv", {"m", "n", "s", "t", "seed"},
            {{fmt_int(dims.m), fmt_int(dims.n), fmt_int(dims.s), fmt_int(dims.t),
              std::to_string(seed)}});
  std::cout << "wrote instance (" << dims.rows() << "x" << dims.n << ") to " << args.out_dir
            << "\n";
  return 0;
}

struct SingleRun {
  SolverKind solver;
  SolveResult result;
  double rmsd;
};

std::vector<SingleRun> solve_single(const ExperimentConfig& cfg, bool with_trace,
                                    bool with_subgrad) {
  const ScaleDims dims = cfg.dims(cfg.scales.front());
  const std::uint64_t seed = cfg.seed_list().front();
  InstanceData inst = generate_instance(cfg, dims, seed);
  auto A = std::make_shared<const Matrix>(std::move(inst.A));
  const SpectralEstimate bound = spectral_bound(*A);
  LossSpec loss = make_loss(cfg, inst.b);
  const double modulus = loss.lipschitz_modulus() * bound.value;
  const Index p = round_half_up(cfg.p_fraction * dims.s);
  const Index r = cfg.budget_r(dims, cfg.r_factors.front());
  auto model = std::make_shared<const OutlierModel>(
      A, std::move(loss), make_regularizer(cfg, cfg.lambdas.front(), p), r, modulus, bound);
  const DcProblem problem = compile(model);
  const Vector x0 = Vector::Zero(dims.n);
  const double sqrt_n = std::sqrt(double(dims.n));

  std::vector<SingleRun> runs;
  if (cfg.solvers == SolverSelection::pdcae || cfg.solvers == SolverSelection::both) {
    PdcaeOptions opts = cfg.pdcae;
    opts.record_trace = with_trace;
    opts.track_subgradient_norm = with_subgrad;
    SolveResult res = pdcae_solve(problem, x0, opts);
    const double rmsd = (res.x_final - inst.x_true).norm() / sqrt_n;
    runs.push_back({SolverKind::pdcae, std::move(res), rmsd});
  }
  if (cfg.solvers == SolverSelection::npg || cfg.solvers == SolverSelection::both) {
    NpgOptions opts = cfg.npg;
    opts.record_trace = with_trace;
    SolveResult res = npg_solve(problem, x0, opts);
    const double rmsd = (res.x_final - inst.x_true).norm() / sqrt_n;
    runs.push_back({SolverKind::npg, std::move(res), rmsd});
  }
  return runs;
}

void print_run(const SingleRun& run) {
  std::cout << to_string(run.solver) << ": "
            << (run.result.status == SolveStatus::converged ? "converged" : "max-iter")
            << " iters=" << run.result.iterations << " fval=" << std::scientific
            << std::setprecision(6) << run.result.best_fval << " rmsd=" << run.rmsd
            << " cpu=" << std::defaultfloat << run.result.solve_seconds << "s\n";
}

int cmd_solve(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  ensure_out_dir(args.out_dir);
  const auto runs = solve_single(cfg, args.trace, false);
  for (const auto& run : runs) {
    print_run(run);
    write_vector_csv(args.out_dir + "/solution_" + to_string(run.solver) + ".csv", "x",
                     run.result.x_final);
    if (args.trace)
      write_trace_csv(args.out_dir + "/trace_" + to_string(run.solver) + ".csv",
                      run.result.trace);
  }
  return 0;
}

int cmd_bench(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  ensure_out_dir(args.out_dir);
  const auto summaries = run_table(cfg);
  const auto written = write_table_csvs(args.out_dir, cfg, summaries);
  for (const auto& s : summaries)
    std::cout << "lambda=" << s.cell.lambda << " i=" << s.cell.scale << " r=" << s.cell.r
              << " " << to_string(s.solver) << ": rmsd=" << std::scientific
              << std::setprecision(4) << s.rmsd_mean << " iter=" << std::defaultfloat
              << s.iter_mean << " fval=" << std::scientific << s.fval_mean
              << " cpu=" << std::defaultfloat << s.cpu_mean << "s"
              << (s.maxiter_count ? " [" + std::to_string(s.maxiter_count) + " max-iter]" : "")
              << "\n";
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_compare(const GlobalArgs& args) {
  ExperimentConfig cfg = load_config(args);
  cfg.solvers = SolverSelection::both;
  ensure_out_dir(args.out_dir);
  const auto summaries = run_table(cfg);
  std::cout << std::left << std::setw(8) << "solver" << std::right << std::setw(12)
            << "lambda" << std::setw(6) << "r" << std::setw(10) << "iters" << std::setw(14)
            << "fval" << std::setw(12) << "rmsd" << std::setw(10) << "cpu[s]" << "\n";
  for (const auto& s : summaries)
    std::cout << std::left << std::setw(8) << to_string(s.solver) << std::right
              << std::setw(12) << std::scientific << std::setprecision(2) << s.cell.lambda
              << std::setw(6) << std::defaultfloat << s.cell.r << std::setw(10)
              << s.iter_mean << std::setw(14) << std::scientific << std::setprecision(4)
              << s.fval_mean << std::setw(12) << s.rmsd_mean << std::setw(10)
              << std::defaultfloat << std::setprecision(3) << s.cpu_mean << "\n";
  std::vector<CsvRow> rows;
  for (const auto& s : summaries) rows.push_back(table_csv_row(s));
  write_csv(args.out_dir + "/compare.csv", table_csv_header(), rows);
  return 0;
}

int cmd_scatter(const GlobalArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  ensure_out_dir(args.out_dir);
  const auto rows = recovery_scatter(cfg, cfg.seed_list().front());
  std::vector<CsvRow> csv;
  csv.reserve(rows.size());
  for (const auto& r : rows)
    csv.push_back({fmt_int(r.index), fmt_full(r.x_true), fmt_full(r.x_solved)});
  write_csv(args.out_dir + "/scatter.csv", {"index", "x_true", "x_solved"}, csv);
  std::cout << "wrote " << args.out_dir << "/scatter.csv (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_certify(const GlobalArgs& args) {
  ExperimentConfig cfg = load_config(args);
  cfg.solvers = SolverSelection::pdcae;
  ensure_out_dir(args.out_dir);
  const auto runs = solve_single(cfg, true, true);
  const auto& run = runs.front();
  print_run(run);

  const CertifyReport report = certify_trace(run.result.trace);
  std::cout << report.summary() << "\n";

  const RateFitOutcome rate = fit_linear_rate(run.result.trace, 0.3);
  if (rate.fit)
    std::cout << "rate fit over k in [" << rate.fit->window_begin << ", "
              << rate.fit->window_end << "]: slope=" << std::scientific
              << std::setprecision(4) << rate.fit->slope << " (factor "
              << std::defaultfloat << rate.fit->linear_factor
              << " per iteration), R^2=" << rate.fit->r_squared << "\n";
  else
    std::cout << "rate fit unavailable: " << rate.note << "\n";

  if (args.trace) write_trace_csv(args.out_dir + "/trace.csv", run.result.trace);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DC optimization benchmark for sparse recovery with outlier detection"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global flags after the subcommand too

  GlobalArgs args;
  app.add_option("--config", args.config_path, "path to key = value config file");
  app.add_option("--seed", args.seed, "master seed override");
  app.add_option("--out", args.out_dir, "output directory (default .)");
  app.add_flag("--trace", args.trace, "emit per-iteration trace CSVs");

  auto* gen = app.add_subcommand("gen", "generate one seeded instance and write it out");
  auto* solve = app.add_subcommand("solve", "solve one seeded instance");
  auto* bench = app.add_subcommand("bench", "run the benchmark grid and write table CSVs");
  auto* compare = app.add_subcommand("compare", "run both solvers and print a comparison");
  auto* scatter = app.add_subcommand("scatter", "emit recovered-vs-true scatter data");
  auto* certify =
      app.add_subcommand("certify", "check potential decrease and fit the local rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(args);
    if (solve->parsed()) return cmd_solve(args);
    if (bench->parsed()) return cmd_bench(args);
    if (compare->parsed()) return cmd_compare(args);
    if (scatter->parsed()) return cmd_scatter(args);
    if (certify->parsed()) return cmd_certify(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
