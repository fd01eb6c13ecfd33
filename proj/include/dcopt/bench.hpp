#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dcopt/config.hpp"
#include "dcopt/csv.hpp"
#include "dcopt/dense.hpp"
#include "dcopt/outlier_model.hpp"
#include "dcopt/rng.hpp"
#include "dcopt/solvers.hpp"
#include "dcopt/types.hpp"

namespace dcopt {

// Problem sizes grow linearly with the scale index: (m, n, s, t) =
// (600 i, 3000 i, 150 i, 30 i). The sensing matrix gets t extra rows that
// carry the outliers.
struct ScaleDims {
  int m = 0, n = 0, s = 0, t = 0;
  int rows() const { return m + t; }
};

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

enum class SolverSelection { pdcae, npg, both };

struct ExperimentConfig {
  std::vector<int> scales{1};
  std::vector<double> lambdas{5e-3};
  std::vector<double> r_factors{1.0};
  double mu = 0.99;
  double p_fraction = 0.8;
  Index r_override = 0;  // > 0: fixed outlier budget instead of r_factor * t
  double sigma = 1e-2;
  double outlier_magnitude = 8.0;
  std::uint64_t master_seed = 12345;
  int num_seeds = 20;
  std::vector<std::uint64_t> seeds;  // explicit list; overrides master_seed sequence

  LossKind loss_kind = LossKind::squared;
  double epsilon = 0.5;       // quad-eps-insensitive tube radius
  double tau = 0.5;           // quantile level
  double loss_modulus = 1.0;  // override for experimentation

  RegularizerKind reg_kind = RegularizerKind::truncated_l1;
  double theta = 3.7;  // scad / mcp / capped-l1 parameter

  // explicit dimension overrides (all four must be set to take effect)
  ScaleDims custom_dims;
  bool use_custom_dims = false;

  SolverSelection solvers = SolverSelection::both;
  PdcaeOptions pdcae;
  NpgOptions npg;

  ScaleDims dims(int scale) const {
    if (use_custom_dims) return custom_dims;
    return ScaleDims{600 * scale, 3000 * scale, 150 * scale, 30 * scale};
  }

  Index budget_r(const ScaleDims& d, double r_factor) const {
    return r_override > 0 ? r_override : Index(round_half_up(r_factor * d.t));
  }

  std::vector<std::uint64_t> seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(num_seeds));
    for (int j = 0; j < num_seeds; ++j) out.push_back(master_seed + std::uint64_t(j));
    return out;
  }

  void validate() const {
    require(!scales.empty() && !lambdas.empty() && !r_factors.empty(),
            "config: scales, lambdas and r_factors must be nonempty");
    for (int i : scales) require(i >= 1, "config: scale must be >= 1");
    for (double l : lambdas) require(l > 0, "config: lambda must be positive");
    require(mu > 0 && mu <= 1, "config: mu must lie in (0, 1]");
    require(p_fraction > 0, "config: p_fraction must be positive");
    require(sigma >= 0, "config: sigma must be nonnegative");
    require(num_seeds >= 1 || !seeds.empty(), "config: need at least one seed");
    for (int i : scales) {
      const ScaleDims d = dims(i);
      require(d.m >= 1 && d.n >= 1 && d.s >= 0 && d.t >= 0,
              "config: dimensions must be positive");
      require(d.s <= d.n, "config: sparsity s exceeds n");
      require(d.t <= d.m, "config: outlier count t exceeds m");
      const int p = round_half_up(p_fraction * d.s);
      require(p >= 1 && p < d.n, "config: p = round(p_fraction * s) must satisfy 1 <= p < n");
      for (double rf : r_factors) {
        const Index r = budget_r(d, rf);
        require(r >= 1 && r <= d.rows(),
                "config: outlier budget r must satisfy 1 <= r <= m + t (got " +
                    std::to_string(r) + ")");
      }
    }
    pdcae.validate();
    npg.validate();
  }
};

struct InstanceData {
  Matrix A;            // (m + t) x n, unit-norm columns
  Vector b;            // A x_true - z + sigma * eps
  Vector x_true;       // s-sparse ground truth
  std::vector<Index> outlier_rows;  // the last t row indices
};

// Seeded data generation. Four independent substreams are derived from the
// instance seed, one per phase, so the draws of one phase can never shift
// another. Draw order: A entries row-major, support indices as the prefix of
// a partial Fisher-Yates shuffle, then the s ground-truth values, then the
// noise vector.
inline InstanceData generate_instance(const ExperimentConfig& cfg, const ScaleDims& dims,
                                      std::uint64_t seed) {
  require(dims.s <= dims.n, "generate_instance: s exceeds n");
  require(dims.t <= dims.m, "generate_instance: t exceeds m");
  const Index rows = dims.rows();
  const Index n = dims.n;

  SplitMix64 base(seed);
  const std::uint64_t seed_a = base.next_u64();
  const std::uint64_t seed_support = base.next_u64();
  const std::uint64_t seed_values = base.next_u64();
  const std::uint64_t seed_noise = base.next_u64();

  InstanceData inst;
  inst.A.resize(rows, n);
  SplitMix64 gen_a(seed_a);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < n; ++j) inst.A(i, j) = gen_a.next_gaussian();
  for (Index j = 0; j < n; ++j) {
    const double norm = inst.A.col(j).norm();
    require(norm > 0, "generate_instance: zero column");
    inst.A.col(j) /= norm;
  }

  SplitMix64 gen_support(seed_support);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < dims.s; ++i) {
    const Index j = i + static_cast<Index>(gen_support.next_bounded(std::uint64_t(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  SplitMix64 gen_values(seed_values);
  inst.x_true = Vector::Zero(n);
  for (Index i = 0; i < dims.s; ++i)
    inst.x_true[perm[static_cast<std::size_t>(i)]] = gen_values.next_gaussian();

  Vector z = Vector::Zero(rows);
  for (Index i = rows - dims.t; i < rows; ++i) {
    z[i] = cfg.outlier_magnitude;
    inst.outlier_rows.push_back(i);
  }

  SplitMix64 gen_noise(seed_noise);
  Vector eps(rows);
  for (Index i = 0; i < rows; ++i) eps[i] = gen_noise.next_gaussian();

  inst.b = inst.A * inst.x_true - z + cfg.sigma * eps;
  return inst;
}

inline LossSpec make_loss(const ExperimentConfig& cfg, Vector b) {
  LossSpec loss = [&]() {
    switch (cfg.loss_kind) {
      case LossKind::squared: return LossSpec::squared(std::move(b));
      case LossKind::squared_hinge: return LossSpec::squared_hinge(std::move(b));
      case LossKind::quad_eps_insensitive:
        return LossSpec::quad_eps_insensitive(std::move(b), cfg.epsilon);
      case LossKind::quantile_squared:
        return LossSpec::quantile_squared(std::move(b), cfg.tau);
    }
    throw ConfigError("bad loss kind");
  }();
  if (cfg.loss_modulus != 1.0) loss.set_modulus(cfg.loss_modulus);
  return loss;
}

inline RegularizerSpec make_regularizer(const ExperimentConfig& cfg, double lambda, Index p) {
  switch (cfg.reg_kind) {
    case RegularizerKind::scad: return RegularizerSpec::scad(lambda, cfg.theta);
    case RegularizerKind::mcp: return RegularizerSpec::mcp(lambda, cfg.theta);
    case RegularizerKind::l1_minus_l2: return RegularizerSpec::l1_minus_l2(lambda);
    case RegularizerKind::truncated_l1:
      return RegularizerSpec::truncated_l1(lambda, cfg.mu, p);
    case RegularizerKind::capped_l1: return RegularizerSpec::capped_l1(lambda, cfg.theta);
  }
  throw ConfigError("bad regularizer kind");
}

struct RunMetrics {
  int iterations = 0;
  double best_fval = 0;
  double solve_seconds = 0;
  double rmsd = 0;
  bool hit_max_iter = false;
};

struct TableCell {
  double lambda = 0;
  int scale = 1;
  double r_factor = 1.0;
  ScaleDims dims;
  Index p = 0;
  Index r = 0;
};

struct CellSummary {
  TableCell cell;
  SolverKind solver = SolverKind::pdcae;
  double rmsd_mean = 0, iter_mean = 0, fval_mean = 0, cpu_mean = 0;
  int maxiter_count = 0;
};

// Invoked once per finished solve, possibly from several worker threads at
// once; the callback must synchronize its own state.
using RunCallback =
    std::function<void(const TableCell&, SolverKind, int seed_index, const SolveResult&)>;

inline int worker_count() {
  if (const char* env = std::getenv("DCOPT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs the full benchmark grid. Work is split per instance: each worker
// generates one seeded instance, bounds the spectral norm once, then solves
// every (lambda, r_factor) cell with the selected solvers. Results land in
// preassigned slots, so the aggregate is independent of scheduling.
inline std::vector<CellSummary> run_table(const ExperimentConfig& cfg,
                                          const RunCallback& callback = {}) {
  cfg.validate();
  const std::vector<std::uint64_t> seeds = cfg.seed_list();
  const int nseeds = static_cast<int>(seeds.size());

  const bool run_pdcae =
      cfg.solvers == SolverSelection::pdcae || cfg.solvers == SolverSelection::both;
  const bool run_npg =
      cfg.solvers == SolverSelection::npg || cfg.solvers == SolverSelection::both;

  std::vector<CellSummary> summaries;
  for (double lambda : cfg.lambdas)
    for (int scale : cfg.scales)
      for (double rf : cfg.r_factors) {
        TableCell cell;
        cell.lambda = lambda;
        cell.scale = scale;
        cell.r_factor = rf;
        cell.dims = cfg.dims(scale);
        cell.p = round_half_up(cfg.p_fraction * cell.dims.s);
        cell.r = cfg.budget_r(cell.dims, rf);
        if (run_pdcae) summaries.push_back({cell, SolverKind::pdcae, 0, 0, 0, 0, 0});
        if (run_npg) summaries.push_back({cell, SolverKind::npg, 0, 0, 0, 0, 0});
      }

  // metrics[summary_index][seed_index]
  std::vector<std::vector<RunMetrics>> metrics(summaries.size(),
                                               std::vector<RunMetrics>(nseeds));

  for (int scale : cfg.scales) {
    const ScaleDims dims = cfg.dims(scale);
    std::atomic<int> next_seed{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
      try {
        for (;;) {
          const int sj = next_seed.fetch_add(1);
          if (sj >= nseeds) return;
          InstanceData inst = generate_instance(cfg, dims, seeds[sj]);
          auto A = std::make_shared<const Matrix>(std::move(inst.A));
          const SpectralEstimate bound = spectral_bound(*A);
          const double sqrt_n = std::sqrt(double(dims.n));
          const Vector x0 = Vector::Zero(dims.n);

          for (std::size_t ci = 0; ci < summaries.size(); ++ci) {
            const CellSummary& slot = summaries[ci];
            if (slot.cell.scale != scale) continue;
            LossSpec loss = make_loss(cfg, inst.b);
            const double modulus = loss.lipschitz_modulus() * bound.value;
            auto model = std::make_shared<const OutlierModel>(
                A, std::move(loss), make_regularizer(cfg, slot.cell.lambda, slot.cell.p),
                slot.cell.r, modulus, bound);
            const DcProblem problem = compile(model);

            SolveResult result = slot.solver == SolverKind::pdcae
                                     ? pdcae_solve(problem, x0, cfg.pdcae)
                                     : npg_solve(problem, x0, cfg.npg);
            RunMetrics rm;
            rm.iterations = result.iterations;
            rm.best_fval = result.best_fval;
            rm.solve_seconds = result.solve_seconds;
            rm.rmsd = (result.x_final - inst.x_true).norm() / sqrt_n;
            rm.hit_max_iter = result.status == SolveStatus::max_iter;
            metrics[ci][sj] = rm;
            if (callback) callback(slot.cell, slot.solver, sj, result);
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    };

    const int nworkers = std::min(worker_count(), nseeds);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (std::size_t ci = 0; ci < summaries.size(); ++ci) {
    CellSummary& s = summaries[ci];
    for (int sj = 0; sj < nseeds; ++sj) {
      const RunMetrics& rm = metrics[ci][sj];
      s.rmsd_mean += rm.rmsd;
      s.iter_mean += rm.iterations;
      s.fval_mean += rm.best_fval;
      s.cpu_mean += rm.solve_seconds;
      s.maxiter_count += rm.hit_max_iter ? 1 : 0;
    }
    s.rmsd_mean /= nseeds;
    s.iter_mean /= nseeds;
    s.fval_mean /= nseeds;
    s.cpu_mean /= nseeds;
  }
  return summaries;
}

inline CsvRow table_csv_header() {
  return {"lambda", "m",         "n",         "s",         "t",        "r",
          "solver", "rmsd_mean", "iter_mean", "fval_mean", "cpu_mean", "maxiter_count"};
}

inline CsvRow table_csv_row(const CellSummary& s) {
  return {fmt_full(s.cell.lambda),
          fmt_int(s.cell.dims.m),
          fmt_int(s.cell.dims.n),
          fmt_int(s.cell.dims.s),
          fmt_int(s.cell.dims.t),
          fmt_int(s.cell.r),
          to_string(s.solver),
          fmt_full(s.rmsd_mean),
          fmt_full(s.iter_mean),
          fmt_full(s.fval_mean),
          fmt_full(s.cpu_mean),
          fmt_int(s.maxiter_count)};
}

// One CSV per r_factor, numbered in config order: with r_factors = 1.0, 1.1
// this produces table1.csv and table2.csv.
inline std::vector<std::string> write_table_csvs(const std::string& out_dir,
                                                 const ExperimentConfig& cfg,
                                                 const std::vector<CellSummary>& summaries) {
  std::vector<std::string> written;
  for (std::size_t gi = 0; gi < cfg.r_factors.size(); ++gi) {
    std::vector<CsvRow> rows;
    for (const CellSummary& s : summaries)
      if (s.cell.r_factor == cfg.r_factors[gi]) rows.push_back(table_csv_row(s));
    const std::string path = out_dir + "/table" + std::to_string(gi + 1) + ".csv";
    write_csv(path, table_csv_header(), rows);
    written.push_back(path);
  }
  return written;
}

// Builds a configuration from flat key = value text. Unknown keys are
// rejected so typos surface as errors instead of silent defaults.
inline ExperimentConfig config_from_map(const ConfigMap& map) {
  static const std::set<std::string> known = {
      "scale_i", "scales", "lambda", "lambdas", "r_factor", "r_factors", "r", "mu",
      "p_fraction", "sigma", "outlier_magnitude", "master_seed", "num_seeds", "seeds",
      "loss", "epsilon", "tau", "loss_modulus", "regularizer", "theta",
      "m", "n", "s", "t", "solver",
      "pdcae_restart_period", "pdcae_tol", "pdcae_max_iter", "pdcae_beta_cap",
      "npg_tau_growth", "npg_c", "npg_memory", "npg_L0", "npg_L_min", "npg_L_max",
      "npg_tol", "npg_max_iter"};
  for (const auto& [key, value] : map)
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);

  ExperimentConfig cfg;
  if (map.count("scales"))
    cfg.scales = get_int_list(map, "scales");
  else
    cfg.scales = {static_cast<int>(get_int(map, "scale_i", 1))};
  if (map.count("lambdas"))
    cfg.lambdas = get_double_list(map, "lambdas");
  else
    cfg.lambdas = {get_double(map, "lambda", 5e-3)};
  if (map.count("r_factors"))
    cfg.r_factors = get_double_list(map, "r_factors");
  else
    cfg.r_factors = {get_double(map, "r_factor", 1.0)};

  cfg.mu = get_double(map, "mu", cfg.mu);
  cfg.p_fraction = get_double(map, "p_fraction", cfg.p_fraction);
  cfg.r_override = static_cast<Index>(get_int(map, "r", 0));
  cfg.sigma = get_double(map, "sigma", cfg.sigma);
  cfg.outlier_magnitude = get_double(map, "outlier_magnitude", cfg.outlier_magnitude);
  cfg.master_seed = get_u64(map, "master_seed", cfg.master_seed);
  cfg.num_seeds = static_cast<int>(get_int(map, "num_seeds", cfg.num_seeds));
  cfg.seeds = get_u64_list(map, "seeds");

  cfg.loss_kind = parse_loss_kind(get_string(map, "loss", "squared"));
  cfg.epsilon = get_double(map, "epsilon", cfg.epsilon);
  cfg.tau = get_double(map, "tau", cfg.tau);
  cfg.loss_modulus = get_double(map, "loss_modulus", cfg.loss_modulus);
  cfg.reg_kind = parse_regularizer_kind(get_string(map, "regularizer", "truncated-l1"));
  cfg.theta = get_double(map, "theta", cfg.theta);

  if (map.count("m") || map.count("n") || map.count("s") || map.count("t")) {
    if (!(map.count("m") && map.count("n") && map.count("s") && map.count("t")))
      throw ConfigError("config: custom dimensions need all of m, n, s, t");
    cfg.custom_dims = ScaleDims{static_cast<int>(get_int(map, "m", 0)),
                                static_cast<int>(get_int(map, "n", 0)),
                                static_cast<int>(get_int(map, "s", 0)),
                                static_cast<int>(get_int(map, "t", 0))};
    cfg.use_custom_dims = true;
  }

  const std::string solver = get_string(map, "solver", "both");
  if (solver == "pdcae")
    cfg.solvers = SolverSelection::pdcae;
  else if (solver == "npg")
    cfg.solvers = SolverSelection::npg;
  else if (solver == "both")
    cfg.solvers = SolverSelection::both;
  else
    throw ConfigError("config key 'solver': expected pdcae, npg or both, got " + solver);

  cfg.pdcae.restart_period =
      static_cast<int>(get_int(map, "pdcae_restart_period", cfg.pdcae.restart_period));
  cfg.pdcae.tol = get_double(map, "pdcae_tol", cfg.pdcae.tol);
  cfg.pdcae.max_iter = static_cast<int>(get_int(map, "pdcae_max_iter", cfg.pdcae.max_iter));
  cfg.pdcae.beta_cap = get_double(map, "pdcae_beta_cap", cfg.pdcae.beta_cap);
  cfg.npg.tau_growth = get_double(map, "npg_tau_growth", cfg.npg.tau_growth);
  cfg.npg.accept_c = get_double(map, "npg_c", cfg.npg.accept_c);
  cfg.npg.memory = static_cast<int>(get_int(map, "npg_memory", cfg.npg.memory));
  cfg.npg.L0 = get_double(map, "npg_L0", cfg.npg.L0);
  cfg.npg.L_min = get_double(map, "npg_L_min", cfg.npg.L_min);
  cfg.npg.L_max = get_double(map, "npg_L_max", cfg.npg.L_max);
  cfg.npg.tol = get_double(map, "npg_tol", cfg.npg.tol);
  cfg.npg.max_iter = static_cast<int>(get_int(map, "npg_max_iter", cfg.npg.max_iter));

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

struct ScatterRow {
  Index index = 0;
  double x_true = 0;
  double x_solved = 0;
};

// Per-coordinate recovery pairs restricted to the union of the true and the
// recovered supports, plus 100 seeded zero coordinates to show the baseline;
// keeps the file small at n in the thousands.
inline std::vector<ScatterRow> recovery_scatter(const ExperimentConfig& cfg,
                                                std::uint64_t seed) {
  cfg.validate();
  const ScaleDims dims = cfg.dims(cfg.scales.front());
  InstanceData inst = generate_instance(cfg, dims, seed);
  auto A = std::make_shared<const Matrix>(std::move(inst.A));
  const SpectralEstimate bound = spectral_bound(*A);
  LossSpec loss = make_loss(cfg, inst.b);
  const double modulus = loss.lipschitz_modulus() * bound.value;
  const Index p = round_half_up(cfg.p_fraction * dims.s);
  const Index r = cfg.budget_r(dims, cfg.r_factors.front());
  auto model = std::make_shared<const OutlierModel>(
      A, std::move(loss), make_regularizer(cfg, cfg.lambdas.front(), p), r, modulus, bound);
  const SolveResult result = pdcae_solve(compile(model), Vector::Zero(dims.n), cfg.pdcae);

  std::set<Index> chosen;
  for (Index i = 0; i < dims.n; ++i)
    if (inst.x_true[i] != 0.0 || result.x_final[i] != 0.0) chosen.insert(i);

  std::vector<Index> zeros;
  for (Index i = 0; i < dims.n; ++i)
    if (!chosen.count(i)) zeros.push_back(i);
  SplitMix64 picker(seed ^ 0x5ca77e12u);
  const std::size_t want = std::min<std::size_t>(100, zeros.size());
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(picker.next_bounded(std::uint64_t(zeros.size() - i)));
    std::swap(zeros[i], zeros[j]);
    chosen.insert(zeros[i]);
  }

  std::vector<ScatterRow> rows;
  rows.reserve(chosen.size());
  for (Index i : chosen) rows.push_back({i, inst.x_true[i], result.x_final[i]});
  return rows;
}

}  // namespace dcopt
