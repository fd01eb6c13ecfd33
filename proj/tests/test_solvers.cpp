#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "dcopt/diagnostics.hpp"
#include "dcopt/outlier_model.hpp"
#include "dcopt/rng.hpp"
#include "dcopt/solvers.hpp"

using namespace dcopt;

namespace {

Matrix random_matrix(Index rows, Index cols, SplitMix64& gen) {
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) A(i, j) = gen.next_gaussian();
  return A;
}

Vector random_vector(Index n, SplitMix64& gen, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * gen.next_gaussian();
  return v;
}

std::shared_ptr<const OutlierModel> small_instance(std::uint64_t seed, Index m = 12,
                                                   Index n = 8, Index r = 2) {
  SplitMix64 gen(seed);
  Matrix A = random_matrix(m, n, gen);
  for (Index j = 0; j < n; ++j) A.col(j) /= A.col(j).norm();
  const Vector b = random_vector(m, gen);
  return std::make_shared<const OutlierModel>(
      std::move(A), LossSpec::squared(b),
      RegularizerSpec::truncated_l1(0.05, 0.99, std::max<Index>(1, n / 3)), r);
}

// Quadratic toy f = 0.5||x - c||^2 with empty P1 and P2.
DcProblem quadratic_problem(const Vector& c) {
  DcProblem p;
  p.lipschitz_L = 1.0;
  p.smooth_value = [c](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
  p.smooth_gradient = [c](const Vector& x) -> Vector { return x - c; };
  p.p1.value = [](const Vector&) { return 0.0; };
  p.p1.prox = [](const Vector& v, double) { return v; };
  p.p2.value = [](const Vector&) { return 0.0; };
  p.p2.subgradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  return p;
}

// Textbook proximal DC loop, written against the problem parts only; the
// reference for the extrapolation-free reduction.
std::vector<Vector> reference_proximal_dca(const DcProblem& p, const Vector& x0, int iters) {
  std::vector<Vector> xs{x0};
  Vector x = x0;
  for (int k = 0; k < iters; ++k) {
    const Vector xi = p.p2.subgradient(x);
    const Vector grad = p.smooth_gradient(x);
    x = p.p1.prox(x - (grad - xi) / p.lipschitz_L, 1.0 / p.lipschitz_L);
    xs.push_back(x);
  }
  return xs;
}

}  // namespace

TEST(BetaSchedule, FirstTwoStepsAreZero) {
  ThetaPair state;
  const BetaStep s0 = beta_schedule(0, state, 200, 1.0 - 1e-12);
  EXPECT_DOUBLE_EQ(s0.beta, 0.0);
  const BetaStep s1 = beta_schedule(1, s0.next, 200, 1.0 - 1e-12);
  EXPECT_DOUBLE_EQ(s1.beta, 0.0);
  // after the k = 1 update the pair is (theta_1, theta_2)
  EXPECT_NEAR(s1.next.prev, 2.0 / (1.0 + std::sqrt(5.0)), 1e-12);
}

TEST(BetaSchedule, ThirdStepMatchesRecurrence) {
  // independent evaluation of the theta recurrence
  double theta_prev = 1.0, theta = 1.0;
  auto advance = [&]() {
    const double next = 2.0 / (1.0 + std::sqrt(1.0 + 4.0 / (theta * theta)));
    theta_prev = theta;
    theta = next;
  };
  advance();  // theta_1
  advance();  // theta_2
  const double expected_beta2 = theta * (1.0 / theta_prev - 1.0);
  EXPECT_NEAR(expected_beta2, 0.2818, 1e-4);

  ThetaPair state;
  state = beta_schedule(0, state, 200, 1.0 - 1e-12).next;
  state = beta_schedule(1, state, 200, 1.0 - 1e-12).next;
  const BetaStep s2 = beta_schedule(2, state, 200, 1.0 - 1e-12);
  EXPECT_NEAR(s2.beta, expected_beta2, 1e-12);
}

TEST(BetaSchedule, PeriodicRestartZerosMomentum) {
  ThetaPair state;
  double beta_before_restart = 0;
  for (int k = 0; k < 201; ++k) {
    const BetaStep s = beta_schedule(k, state, 200, 1.0 - 1e-12);
    state = s.next;
    if (k == 199) beta_before_restart = s.beta;
    if (k == 200) EXPECT_DOUBLE_EQ(s.beta, 0.0);
  }
  EXPECT_GT(beta_before_restart, 0.9);
}

TEST(BetaSchedule, PeriodOneDisablesMomentum) {
  ThetaPair state;
  for (int k = 0; k < 50; ++k) {
    const BetaStep s = beta_schedule(k, state, 1, 1.0 - 1e-12);
    EXPECT_DOUBLE_EQ(s.beta, 0.0);
    state = s.next;
  }
}

TEST(BetaSchedule, CapClips) {
  ThetaPair state;
  for (int k = 0; k < 30; ++k) {
    const BetaStep s = beta_schedule(k, state, 1000, 0.1);
    EXPECT_LE(s.beta, 0.1);
    state = s.next;
  }
}

TEST(BetaSchedule, RejectsBadTheta) {
  EXPECT_THROW(beta_schedule(0, ThetaPair{0.0, 1.0}, 200, 0.5), std::invalid_argument);
  EXPECT_THROW(beta_schedule(0, ThetaPair{1.0, 1.5}, 200, 0.5), std::invalid_argument);
}

TEST(Pdcae, OneExactGradientStepOnQuadratic) {
  Vector c(3);
  c << 1.0, -2.0, 0.5;
  const DcProblem p = quadratic_problem(c);
  PdcaeOptions opts;
  opts.restart_period = 1;  // beta == 0 throughout
  opts.record_iterates = true;
  opts.max_iter = 10;
  const SolveResult res = pdcae_solve(p, Vector::Zero(3), opts);
  ASSERT_GE(res.trace.iterates.size(), 2u);
  EXPECT_EQ(res.trace.iterates[1], c);  // x0 - (x0 - c)/1 = c exactly
  EXPECT_EQ(res.status, SolveStatus::converged);
  EXPECT_LT((res.x_final - c).norm(), 1e-10);
}

TEST(Pdcae, ReductionMatchesReferenceProximalDca) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto model = small_instance(seed);
    const DcProblem problem = compile(model);
    PdcaeOptions opts;
    opts.restart_period = 1;
    opts.record_iterates = true;
    opts.max_iter = 400;
    const SolveResult res = pdcae_solve(problem, Vector::Zero(model->cols()), opts);
    const auto reference =
        reference_proximal_dca(problem, Vector::Zero(model->cols()), res.iterations);
    ASSERT_EQ(res.trace.iterates.size(), reference.size());
    for (std::size_t k = 0; k < reference.size(); ++k)
      EXPECT_LT((res.trace.iterates[k] - reference[k]).norm(), 1e-12) << "k=" << k;
  }
}

// The structured fast path and the generic Algorithm-1 path run different
// float schedules but the same mathematics.
TEST(Pdcae, OutlierAndGenericPathsAgree) {
  auto model = small_instance(42);
  const DcProblem structured = compile(model);
  DcProblem generic = structured;
  generic.outlier = nullptr;
  PdcaeOptions opts;
  opts.record_iterates = true;
  opts.max_iter = 300;
  const SolveResult a = pdcae_solve(structured, Vector::Zero(model->cols()), opts);
  const SolveResult b = pdcae_solve(generic, Vector::Zero(model->cols()), opts);
  const std::size_t shared = std::min(a.trace.iterates.size(), b.trace.iterates.size());
  for (std::size_t k = 0; k < shared; ++k)
    ASSERT_LT((a.trace.iterates[k] - b.trace.iterates[k]).norm(), 1e-10) << "k=" << k;
}

TEST(Pdcae, FrozenNpgProducesIdenticalIterates) {
  auto model = small_instance(7);
  const DcProblem problem = compile(model);
  PdcaeOptions popts;
  popts.restart_period = 1;
  popts.record_iterates = true;
  popts.max_iter = 150;
  NpgOptions nopts;
  nopts.frozen_modulus = true;
  nopts.record_iterates = true;
  nopts.max_iter = 150;
  const SolveResult a = pdcae_solve(problem, Vector::Zero(model->cols()), popts);
  const SolveResult b = npg_solve(problem, Vector::Zero(model->cols()), nopts);
  const std::size_t shared = std::min(a.trace.iterates.size(), b.trace.iterates.size());
  ASSERT_GT(shared, 10u);
  for (std::size_t k = 0; k < shared; ++k)
    ASSERT_TRUE((a.trace.iterates[k].array() == b.trace.iterates[k].array()).all())
        << "k=" << k;
}

TEST(Pdcae, ConvergedRunInvariants) {
  auto model = small_instance(11);
  const DcProblem problem = compile(model);
  PdcaeOptions opts;
  opts.record_trace = true;
  const SolveResult res = pdcae_solve(problem, Vector::Zero(model->cols()), opts);
  ASSERT_EQ(res.status, SolveStatus::converged);

  // vanishing steps at termination
  EXPECT_LT(res.trace.records.back().step_norm, 10.0 * opts.tol);

  // summability proxy: the last 10% of steps contribute under 1% of the total
  double total = 0;
  for (const auto& r : res.trace.records) total += r.step_norm;
  double tail = 0;
  const std::size_t from = res.trace.records.size() * 9 / 10;
  for (std::size_t i = from; i < res.trace.records.size(); ++i)
    tail += res.trace.records[i].step_norm;
  EXPECT_LT(tail, 0.01 * total);

  // bounded iterates and monotone potential with rounding allowance
  for (const auto& r : res.trace.records) {
    ASSERT_TRUE(std::isfinite(r.fval));
    ASSERT_TRUE(std::isfinite(r.E));
    if (std::isfinite(r.decrease_slack))
      EXPECT_GE(r.decrease_slack, -1e-8 * std::max(1.0, std::abs(r.E)));
  }
}

TEST(Pdcae, TraceResidualMatchesRecomputation) {
  auto model = small_instance(13);
  const DcProblem problem = compile(model);
  PdcaeOptions opts;
  opts.record_trace = true;
  opts.record_iterates = true;
  opts.max_iter = 120;
  const Vector x0 = Vector::Zero(model->cols());
  const SolveResult res = pdcae_solve(problem, x0, opts);
  const auto& xs = res.trace.iterates;

  for (const TraceRecord& rec : res.trace.records) {
    const std::size_t k = static_cast<std::size_t>(rec.k);
    if (k >= xs.size()) break;
    // rebuild u^{k-1} from recorded momentum coefficients
    Vector u_prev;
    if (k == 1) {
      u_prev = xs[0];
    } else {
      const double beta_prev = res.trace.records[k - 2].beta;
      ASSERT_TRUE(std::isfinite(beta_prev));
      u_prev = xs[k - 1] + beta_prev * (xs[k - 1] - xs[k - 2]);
    }
    const double recomputed = pdcae_stationarity_residual(problem, xs[k], xs[k - 1], u_prev);
    EXPECT_NEAR(rec.residual, recomputed, 1e-12 * std::max(1.0, recomputed));

    // certified bound on the norm of the assembled subgradient element
    const Vector block1 = problem.smooth_gradient(xs[k]) - problem.smooth_gradient(u_prev) -
                          problem.lipschitz_L * (xs[k] - u_prev);
    const double element_norm =
        std::sqrt(block1.squaredNorm() + (xs[k] - xs[k - 1]).squaredNorm());
    EXPECT_GE(rec.residual, element_norm - 1e-12);
  }
}

TEST(StationarityResidual, ZeroAtFixedPoint) {
  auto model = small_instance(15);
  const DcProblem problem = compile(model);
  SplitMix64 gen(1);
  const Vector x = random_vector(model->cols(), gen);
  EXPECT_DOUBLE_EQ(pdcae_stationarity_residual(problem, x, x, x), 0.0);
  EXPECT_DOUBLE_EQ(npg_stationarity_residual(problem, x, x, 1.0), 0.0);
}

TEST(Npg, MonotoneSpecialCase) {
  Vector c(4);
  c << 2.0, -1.0, 0.5, 3.0;
  const DcProblem p = quadratic_problem(c);
  NpgOptions opts;
  opts.memory = 1;
  opts.record_trace = true;
  opts.max_iter = 200;
  const SolveResult res = npg_solve(p, Vector::Zero(4), opts);
  EXPECT_EQ(res.status, SolveStatus::converged);
  for (std::size_t i = 1; i < res.trace.records.size(); ++i) {
    const auto& cur = res.trace.records[i];
    const auto& prev = res.trace.records[i - 1];
    EXPECT_LE(cur.fval, prev.fval);
    if (cur.step_norm > 0) EXPECT_LT(cur.fval, prev.fval);
  }
}

TEST(Npg, SolvesSmallInstance) {
  auto model = small_instance(17);
  const DcProblem problem = compile(model);
  NpgOptions opts;
  const SolveResult res = npg_solve(problem, Vector::Zero(model->cols()), opts);
  EXPECT_EQ(res.status, SolveStatus::converged);
  EXPECT_TRUE(std::isfinite(res.best_fval));
}

TEST(Npg, AbortsWhenLinesearchModulusOverflows) {
  auto model = small_instance(19);
  const DcProblem problem = compile(model);
  NpgOptions opts;
  opts.L0 = 1e-8;
  opts.L_min = 1e-8;
  opts.L_max = 2e-8;  // no acceptable modulus below this
  EXPECT_THROW(npg_solve(problem, Vector::Zero(model->cols()), opts), SolverError);
}

TEST(Solvers, MaxIterStatus) {
  auto model = small_instance(21);
  const DcProblem problem = compile(model);
  PdcaeOptions popts;
  popts.max_iter = 3;
  const SolveResult a = pdcae_solve(problem, Vector::Zero(model->cols()), popts);
  EXPECT_EQ(a.status, SolveStatus::max_iter);
  EXPECT_EQ(a.iterations, 3);
  NpgOptions nopts;
  nopts.max_iter = 3;
  const SolveResult b = npg_solve(problem, Vector::Zero(model->cols()), nopts);
  EXPECT_EQ(b.status, SolveStatus::max_iter);
  EXPECT_EQ(b.iterations, 3);
}

TEST(Solvers, BestFvalIsMinimumOverTrace) {
  auto model = small_instance(23);
  const DcProblem problem = compile(model);
  PdcaeOptions opts;
  opts.record_trace = true;
  const SolveResult res = pdcae_solve(problem, Vector::Zero(model->cols()), opts);
  for (const auto& r : res.trace.records) EXPECT_LE(res.best_fval, r.fval + 1e-15);
  EXPECT_LE(res.trace.records.size(), static_cast<std::size_t>(res.iterations) + 1);
}

TEST(Solvers, NonFiniteProblemAborts) {
  DcProblem p = quadratic_problem(Vector::Ones(2));
  p.smooth_gradient = [](const Vector& x) -> Vector {
    return Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
  };
  PdcaeOptions opts;
  opts.max_iter = 5;
  EXPECT_THROW(pdcae_solve(p, Vector::Zero(2), opts), SolverError);
}

TEST(Solvers, OptionValidation) {
  auto model = small_instance(29, 6, 4, 1);
  const DcProblem problem = compile(model);
  const Vector x0 = Vector::Zero(model->cols());
  PdcaeOptions p;
  p.beta_cap = 1.0;
  EXPECT_THROW(pdcae_solve(problem, x0, p), std::invalid_argument);
  p = PdcaeOptions{};
  p.tol = 0.0;
  EXPECT_THROW(pdcae_solve(problem, x0, p), std::invalid_argument);
  NpgOptions n;
  n.memory = 0;
  EXPECT_THROW(npg_solve(problem, x0, n), std::invalid_argument);
  n = NpgOptions{};
  n.L0 = 1e9;
  EXPECT_THROW(npg_solve(problem, x0, n), std::invalid_argument);
}
