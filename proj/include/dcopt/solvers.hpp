#pragma once

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "dcopt/dc_problem.hpp"
#include "dcopt/outlier_model.hpp"
#include "dcopt/types.hpp"

namespace dcopt {

enum class SolveStatus { converged, max_iter };
enum class SolverKind { pdcae, npg };

inline const char* to_string(SolverKind k) {
  return k == SolverKind::pdcae ? "pdcae" : "npg";
}

struct PdcaeOptions {
  int restart_period = 200;      // momentum reset every this many iterations
  double tol = 1e-4;
  int max_iter = 10000;
  double beta_cap = 1.0 - 1e-12; // keeps sup_k beta_k < 1 against float drift
  bool record_trace = false;
  bool track_subgradient_norm = false;  // per-iteration potential-subgradient norm
  bool record_iterates = false;         // keep every x^k (small problems only)

  void validate() const {
    require(restart_period >= 1, "pdcae: restart_period must be >= 1");
    require(tol > 0, "pdcae: tol must be positive");
    require(max_iter >= 1, "pdcae: max_iter must be >= 1");
    require(beta_cap >= 0 && beta_cap < 1, "pdcae: beta_cap must lie in [0, 1)");
  }
};

struct NpgOptions {
  double tau_growth = 2.0;  // linesearch modulus growth factor
  double accept_c = 1e-4;   // sufficient-decrease constant
  int memory = 4;           // nonmonotone window M
  double L0 = 1.0;
  double L_min = 1e-8;
  double L_max = 1e8;
  double tol = 1e-4;
  int max_iter = 10000;
  bool frozen_modulus = false;  // diagnostic mode: L_k = problem modulus, no linesearch
  bool record_trace = false;
  bool record_iterates = false;

  void validate() const {
    require(tau_growth > 1, "npg: tau_growth must exceed 1");
    require(accept_c > 0, "npg: accept_c must be positive");
    require(memory >= 1, "npg: memory must be >= 1");
    require(L_min <= L0 && L0 <= L_max, "npg: need L_min <= L0 <= L_max");
    require(tol > 0, "npg: tol must be positive");
    require(max_iter >= 1, "npg: max_iter must be >= 1");
  }
};

// One row per iterate x^k (k >= 1). E is the augmented potential evaluated at
// (x^k, xi^k, x^{k-1}); decrease_slack compares consecutive E values against
// the guaranteed drop and is meaningful for the extrapolated solver only.
// Fields that are undefined for a record hold NaN.
struct TraceRecord {
  int k = 0;
  double fval = 0;
  double E = std::numeric_limits<double>::quiet_NaN();
  double Ehat = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double step_norm = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double decrease_slack = std::numeric_limits<double>::quiet_NaN();
  double subgrad_norm = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0;
};

struct IterateTrace {
  SolverKind solver = SolverKind::pdcae;
  double modulus = 0;  // the L used by the potentials
  std::vector<TraceRecord> records;
  std::vector<Vector> iterates;  // filled only when record_iterates is set
};

struct SolveResult {
  Vector x_final;  // iterate attaining best_fval
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;
  double best_fval = std::numeric_limits<double>::infinity();
  double solve_seconds = 0;
  IterateTrace trace;
};

// --- extrapolation schedule ------------------------------------------------

struct ThetaPair {
  double prev = 1.0;
  double cur = 1.0;
};

struct BetaStep {
  double beta = 0.0;
  ThetaPair next;
};

// beta_k = theta_k (1/theta_{k-1} - 1), theta_{k+1} = 2/(1 + sqrt(1 + 4/theta_k^2)),
// with the pair reset to (1, 1) whenever k is a positive multiple of
// restart_period. beta is clipped into [0, beta_cap].
inline BetaStep beta_schedule(int k, ThetaPair state, int restart_period, double beta_cap) {
  require(state.prev > 0 && state.prev <= 1 && state.cur > 0 && state.cur <= 1,
          "beta_schedule: theta values must lie in (0, 1]");
  if (restart_period >= 1 && k > 0 && k % restart_period == 0) state = ThetaPair{};
  double beta = state.cur * (1.0 / state.prev - 1.0);
  beta = std::min(std::max(beta, 0.0), beta_cap);
  const double theta_next = 2.0 / (1.0 + std::sqrt(1.0 + 4.0 / (state.cur * state.cur)));
  return BetaStep{beta, ThetaPair{state.cur, theta_next}};
}

// --- termination residuals --------------------------------------------------

// Certified upper bound on dist(0, dXi) at (x^k, xi^k) for the extrapolated
// solver: the first block of the subgradient element is bounded by
// ||grad f(x^k) - grad f(u^{k-1})|| + L||x^k - u^{k-1}||, and for the
// structured problem the gradient difference is bounded via the residual map
// as sqrt(L * L_Psi) ||A(x^k - u^{k-1})||.
inline double pdcae_stationarity_residual(const DcProblem& problem, const Vector& x_k,
                                          const Vector& x_prev, const Vector& u_prev) {
  const double L = problem.lipschitz_L;
  double first;
  if (problem.outlier) {
    const OutlierModel& model = *problem.outlier;
    const double lpsi = model.loss().lipschitz_modulus();
    first = std::sqrt(L * lpsi) * (model.A() * (x_k - u_prev)).norm() +
            L * (x_k - u_prev).norm();
  } else {
    first = (problem.smooth_gradient(x_k) - problem.smooth_gradient(u_prev)).norm() +
            L * (x_k - u_prev).norm();
  }
  return std::sqrt(first * first + (x_k - x_prev).squaredNorm());
}

// Same bound for the linesearch solver, whose subgradient element is built
// from the previous accepted modulus Lbar_{k-1}.
inline double npg_stationarity_residual(const DcProblem& problem, const Vector& x_k,
                                        const Vector& x_prev, double lbar_prev) {
  const double L = problem.lipschitz_L;
  const double step = (x_k - x_prev).norm();
  double first;
  if (problem.outlier) {
    const OutlierModel& model = *problem.outlier;
    const double lpsi = model.loss().lipschitz_modulus();
    first = std::sqrt(L * lpsi) * (model.A() * (x_k - x_prev)).norm() + lbar_prev * step;
  } else {
    first = (problem.smooth_gradient(x_k) - problem.smooth_gradient(x_prev)).norm() +
            lbar_prev * step;
  }
  return std::sqrt(first * first + step * step);
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void check_finite_iterate(const Vector& x, double fval, int k) {
  if (!x.allFinite() || !std::isfinite(fval))
    throw SolverError("non-finite iterate at iteration " + std::to_string(k));
}

// Structured iteration: keeps A x^k, A x^{k-1}, A u^{k-1} cached so each
// step costs one multiplication by A and one by A^T. The z-step, the
// objective, the potential values and the termination residual are all read
// off the cached residual maps.
inline SolveResult pdcae_solve_outlier(const DcProblem& problem, const Vector& x0,
                                       const PdcaeOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const OutlierModel& model = *problem.outlier;
  const Matrix& A = model.A();
  const RegularizerSpec& reg = model.regularizer();
  const double L = problem.lipschitz_L;
  const double lpsi = model.loss().lipschitz_modulus();
  const Index n = model.cols();
  const Index m = model.rows();

  SolveResult result;
  result.trace.solver = SolverKind::pdcae;
  result.trace.modulus = L;

  Vector x = x0, x_prev = x0;
  Vector ax = A * x0, ax_prev = ax;
  Vector u_prev(n), au_prev(m);
  Vector grad_psi(m), mwork(m), v(n), u(n), x_next(n), ax_next(m);
  OutlierModel::TrimWorkspace ws;

  ThetaPair theta;
  // potential bookkeeping carried from the previous iteration:
  Vector g_prev(m), eta_prev(n);
  double young_prev = 0;
  double prev_E = std::numeric_limits<double>::quiet_NaN();
  double prev_beta = 0, prev_step = 0;

  for (int k = 0;; ++k) {
    const double trimmed = model.trimmed_loss(ax, ws, &grad_psi);
    const double p1v = reg.p1_value(x);
    const double j2v = reg.p2_value(x);
    const double fval = trimmed + p1v - j2v;
    check_finite_iterate(x, fval, k);
    if (fval < result.best_fval) {
      result.best_fval = fval;
      result.x_final = x;
    }
    if (opts.record_iterates) result.trace.iterates.push_back(x);

    const double step_norm = (x - x_prev).norm();
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (k >= 1) {
      const double first =
          std::sqrt(L * lpsi) * (ax - au_prev).norm() + L * (x - u_prev).norm();
      residual = std::sqrt(first * first + step_norm * step_norm);
    }

    if (opts.record_trace && k >= 1) {
      TraceRecord rec;
      rec.k = k;
      rec.fval = fval;
      rec.step_norm = step_norm;
      rec.residual = residual;
      const double f_k = 0.5 * lpsi * ax.squaredNorm();
      const double dot_x_xi = ax.dot(g_prev) + x.dot(eta_prev);
      rec.E = ((f_k + p1v) + (young_prev - dot_x_xi)) + 0.5 * L * step_norm * step_norm;
      rec.Ehat = fval + 0.5 * L * step_norm * step_norm;
      if (k >= 2)
        rec.decrease_slack =
            prev_E - rec.E - 0.5 * L * (1.0 - prev_beta * prev_beta) * prev_step * prev_step;
      if (opts.track_subgradient_norm) {
        const Vector b1 =
            lpsi * (A.transpose() * (ax - au_prev)) - L * (x_prev - u_prev);
        rec.subgrad_norm = std::sqrt(b1.squaredNorm() + step_norm * step_norm +
                                     L * L * step_norm * step_norm);
      }
      rec.seconds = seconds_since(t0);
      prev_E = rec.E;
      result.trace.records.push_back(rec);
    }
    prev_step = step_norm;

    if (k >= 1 && residual < opts.tol * std::max(1.0, x.norm())) {
      result.status = SolveStatus::converged;
      result.iterations = k;
      break;
    }
    if (k >= opts.max_iter) {
      result.status = SolveStatus::max_iter;
      result.iterations = k;
      break;
    }

    // xi^{k+1} = q_subgradient(x^k) + eta^{k+1}, taken before extrapolating.
    const Vector eta = reg.p2_subgradient(x);

    const BetaStep bs = beta_schedule(k, theta, opts.restart_period, opts.beta_cap);
    theta = bs.next;
    const double beta = bs.beta;
    if (opts.record_trace && !result.trace.records.empty() &&
        result.trace.records.back().k == k)
      result.trace.records.back().beta = beta;
    prev_beta = beta;

    u = x + beta * (x - x_prev);
    Vector au = ax + beta * (ax - ax_prev);

    // v^k = A^T [grad Psi(A x^k - z^{k+1}) + L_Psi (A u^k - A x^k)] - eta^{k+1}
    mwork = grad_psi + (lpsi * beta) * (ax - ax_prev);
    v.noalias() = A.transpose() * mwork;
    v -= eta;

    x_next = reg.prox_p1(u - v / L, 1.0 / L);
    ax_next.noalias() = A * x_next;

    if (opts.record_trace) {
      // pieces of xi^{k+1} = A^T g + eta needed for the next E evaluation
      g_prev = lpsi * ax - grad_psi;
      const double p2_at_x = (0.5 * lpsi * ax.squaredNorm() - trimmed) + j2v;
      young_prev = (ax.dot(g_prev) + x.dot(eta)) - p2_at_x;
      eta_prev = eta;
    }

    x_prev.swap(x);
    x.swap(x_next);
    ax_prev.swap(ax);
    ax.swap(ax_next);
    u_prev.swap(u);
    au_prev.swap(au);
  }

  result.solve_seconds = seconds_since(t0);
  return result;
}

// Reference iteration for a generic DC problem (Algorithm-1 form).
inline SolveResult pdcae_solve_generic(const DcProblem& problem, const Vector& x0,
                                       const PdcaeOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const double L = problem.lipschitz_L;

  SolveResult result;
  result.trace.solver = SolverKind::pdcae;
  result.trace.modulus = L;

  Vector x = x0, x_prev = x0;
  Vector u_prev, grad_u_prev;
  ThetaPair theta;
  Vector xi_prev;
  double young_prev = 0;
  double prev_E = std::numeric_limits<double>::quiet_NaN();
  double prev_beta = 0, prev_step = 0;

  for (int k = 0;; ++k) {
    const double f_x = problem.smooth_value(x);
    const double p1v = problem.p1.value(x);
    const double p2v = problem.p2.value(x);
    const double fval = (f_x + p1v) - p2v;
    check_finite_iterate(x, fval, k);
    if (fval < result.best_fval) {
      result.best_fval = fval;
      result.x_final = x;
    }
    if (opts.record_iterates) result.trace.iterates.push_back(x);

    const double step_norm = (x - x_prev).norm();
    double residual = std::numeric_limits<double>::quiet_NaN();
    Vector grad_x;
    if (k >= 1) {
      grad_x = problem.smooth_gradient(x);
      const double first = (grad_x - grad_u_prev).norm() + L * (x - u_prev).norm();
      residual = std::sqrt(first * first + step_norm * step_norm);
    }

    if (opts.record_trace && k >= 1) {
      TraceRecord rec;
      rec.k = k;
      rec.fval = fval;
      rec.step_norm = step_norm;
      rec.residual = residual;
      rec.E = ((f_x + p1v) + (young_prev - x.dot(xi_prev))) +
              0.5 * L * step_norm * step_norm;
      rec.Ehat = fval + 0.5 * L * step_norm * step_norm;
      if (k >= 2)
        rec.decrease_slack =
            prev_E - rec.E - 0.5 * L * (1.0 - prev_beta * prev_beta) * prev_step * prev_step;
      if (opts.track_subgradient_norm) {
        const Vector b1 = grad_x - grad_u_prev - L * (x_prev - u_prev);
        rec.subgrad_norm = std::sqrt(b1.squaredNorm() + step_norm * step_norm +
                                     L * L * step_norm * step_norm);
      }
      rec.seconds = seconds_since(t0);
      prev_E = rec.E;
      result.trace.records.push_back(rec);
    }
    prev_step = step_norm;

    if (k >= 1 && residual < opts.tol * std::max(1.0, x.norm())) {
      result.status = SolveStatus::converged;
      result.iterations = k;
      break;
    }
    if (k >= opts.max_iter) {
      result.status = SolveStatus::max_iter;
      result.iterations = k;
      break;
    }

    const Vector xi = problem.p2.subgradient(x);

    const BetaStep bs = beta_schedule(k, theta, opts.restart_period, opts.beta_cap);
    theta = bs.next;
    const double beta = bs.beta;
    if (opts.record_trace && !result.trace.records.empty() &&
        result.trace.records.back().k == k)
      result.trace.records.back().beta = beta;
    prev_beta = beta;

    Vector u = x + beta * (x - x_prev);
    Vector grad_u = problem.smooth_gradient(u);
    Vector x_next = problem.p1.prox(u - (grad_u - xi) / L, 1.0 / L);

    if (opts.record_trace) {
      young_prev = x.dot(xi) - p2v;
      xi_prev = xi;
    }

    x_prev.swap(x);
    x.swap(x_next);
    u_prev.swap(u);
    grad_u_prev.swap(grad_u);
  }

  result.solve_seconds = seconds_since(t0);
  return result;
}

inline SolveResult npg_solve_outlier(const DcProblem& problem, const Vector& x0,
                                     const NpgOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const OutlierModel& model = *problem.outlier;
  const Matrix& A = model.A();
  const RegularizerSpec& reg = model.regularizer();
  const double L = problem.lipschitz_L;
  const double lpsi = model.loss().lipschitz_modulus();
  const Index m = model.rows();
  const Vector rep = model.loss().argmin_representative();

  SolveResult result;
  result.trace.solver = SolverKind::npg;
  result.trace.modulus = L;

  Vector x = x0, x_prev = x0;
  Vector ax = A * x0, ax_prev = ax;
  Vector grad_psi(m), w(m), w_prev(m);
  OutlierModel::TrimWorkspace ws, ws_trial;

  std::deque<double> fhist;
  double lbar_prev = opts.L0;
  Vector g_pot_prev(m), eta_prev;
  double young_prev = 0;

  Eigen::Matrix<double, Eigen::Dynamic, 2> B(m, 2);
  Eigen::Matrix<double, Eigen::Dynamic, 2> G(model.cols(), 2);

  for (int k = 0;; ++k) {
    const double trimmed = model.trimmed_loss(ax, ws, &grad_psi);
    const double p1v = reg.p1_value(x);
    const double j2v = reg.p2_value(x);
    const double fval = trimmed + p1v - j2v;
    check_finite_iterate(x, fval, k);
    if (fval < result.best_fval) {
      result.best_fval = fval;
      result.x_final = x;
    }
    if (opts.record_iterates) result.trace.iterates.push_back(x);
    fhist.push_back(fval);
    if (static_cast<int>(fhist.size()) > opts.memory) fhist.pop_front();

    const double step_norm = (x - x_prev).norm();
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (k >= 1) {
      const double first =
          std::sqrt(L * lpsi) * (ax - ax_prev).norm() + lbar_prev * step_norm;
      residual = std::sqrt(first * first + step_norm * step_norm);
    }

    if (opts.record_trace && k >= 1) {
      TraceRecord rec;
      rec.k = k;
      rec.fval = fval;
      rec.step_norm = step_norm;
      rec.residual = residual;
      const double f_k = 0.5 * lpsi * ax.squaredNorm();
      const double dot_x_zeta = ax.dot(g_pot_prev) + x.dot(eta_prev);
      rec.E = ((f_k + p1v) + (young_prev - dot_x_zeta)) + 0.5 * L * step_norm * step_norm;
      rec.Ehat = fval + 0.5 * L * step_norm * step_norm;
      rec.seconds = seconds_since(t0);
      result.trace.records.push_back(rec);
    }

    if (k >= 1 && residual < opts.tol * std::max(1.0, x.norm())) {
      result.status = SolveStatus::converged;
      result.iterations = k;
      break;
    }
    if (k >= opts.max_iter) {
      result.status = SolveStatus::max_iter;
      result.iterations = k;
      break;
    }

    const Vector eta = reg.p2_subgradient(x);

    // w = A x^k - z^{k+1}: the selected rows collapse to the loss minimizer.
    Vector g_maj(model.cols());
    Vector y_bb;
    if (!opts.frozen_modulus) {
      w = ax;
      for (Index i = 0; i < m; ++i)
        if (ws.on_support[static_cast<std::size_t>(i)]) w[i] = rep[i];
      if (k >= 1) {
        // one pass over A yields both A^T grad Psi and the BB difference
        // y^k = A^T (A x^k - z^{k+1}) - A^T (A x^{k-1} - z^k)
        B.col(0) = grad_psi;
        B.col(1) = w - w_prev;
        G.noalias() = A.transpose() * B;
        g_maj = G.col(0);
        y_bb = G.col(1);
      } else {
        g_maj.noalias() = A.transpose() * grad_psi;
      }
    } else {
      g_maj.noalias() = A.transpose() * grad_psi;
    }
    const Vector dir = g_maj - eta;  // = grad f(x^k) - zeta^k

    double L_k;
    if (opts.frozen_modulus) {
      L_k = L;
    } else if (k == 0) {
      L_k = std::min(std::max(opts.L0, opts.L_min), opts.L_max);
    } else {
      const Vector s = x - x_prev;
      const double sy = s.dot(y_bb);
      if (sy >= 1e-12)
        L_k = std::min(std::max(sy / s.squaredNorm(), opts.L_min), opts.L_max);
      else
        L_k = std::min(std::max(lbar_prev / 2.0, opts.L_min), opts.L_max);
    }

    double fref = fhist.front();
    for (double fav : fhist) fref = std::max(fref, fav);

    // zeta^k = A^T g_pot + eta and the value P2(x^k), for the majorant below
    const Vector g_pot = lpsi * ax - grad_psi;
    const double p2_at_x = (0.5 * lpsi * ax.squaredNorm() - trimmed) + j2v;

    Vector cand, ax_cand;
    for (;;) {
      cand = reg.prox_p1(x - dir / L_k, 1.0 / L_k);
      ax_cand.noalias() = A * cand;
      if (opts.frozen_modulus) break;
      // candidate scored through the iteration-k majorant
      // f(x+) + P1(x+) - P2(x^k) - <zeta^k, x+ - x^k>  (>= F(x+))
      const double lin = g_pot.dot(ax_cand - ax) + eta.dot(cand - x);
      const double maj_cand =
          0.5 * lpsi * ax_cand.squaredNorm() + reg.p1_value(cand) - p2_at_x - lin;
      const double decrease = 0.5 * opts.accept_c * (cand - x).squaredNorm();
      if (maj_cand <= fref - decrease) break;
      L_k *= opts.tau_growth;
      if (L_k > opts.L_max)
        throw SolverError("npg: linesearch modulus exceeded L_max at iteration " +
                          std::to_string(k));
    }
    lbar_prev = L_k;

    if (opts.record_trace) {
      g_pot_prev = g_pot;
      young_prev = (ax.dot(g_pot) + x.dot(eta)) - p2_at_x;
      eta_prev = eta;
    }

    x_prev.swap(x);
    x.swap(cand);
    ax_prev.swap(ax);
    ax.swap(ax_cand);
    w_prev.swap(w);
  }

  result.solve_seconds = seconds_since(t0);
  return result;
}

inline SolveResult npg_solve_generic(const DcProblem& problem, const Vector& x0,
                                     const NpgOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const double L = problem.lipschitz_L;

  SolveResult result;
  result.trace.solver = SolverKind::npg;
  result.trace.modulus = L;

  Vector x = x0, x_prev = x0;
  Vector grad_x = problem.smooth_gradient(x);
  Vector grad_prev = grad_x;

  std::deque<double> fhist;
  double lbar_prev = opts.L0;
  Vector zeta_prev;
  double young_prev = 0;

  for (int k = 0;; ++k) {
    const double f_x = problem.smooth_value(x);
    const double p1v = problem.p1.value(x);
    const double p2v = problem.p2.value(x);
    const double fval = (f_x + p1v) - p2v;
    check_finite_iterate(x, fval, k);
    if (fval < result.best_fval) {
      result.best_fval = fval;
      result.x_final = x;
    }
    if (opts.record_iterates) result.trace.iterates.push_back(x);
    fhist.push_back(fval);
    if (static_cast<int>(fhist.size()) > opts.memory) fhist.pop_front();

    const double step_norm = (x - x_prev).norm();
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (k >= 1) {
      const double first = (grad_x - grad_prev).norm() + lbar_prev * step_norm;
      residual = std::sqrt(first * first + step_norm * step_norm);
    }

    if (opts.record_trace && k >= 1) {
      TraceRecord rec;
      rec.k = k;
      rec.fval = fval;
      rec.step_norm = step_norm;
      rec.residual = residual;
      rec.E = ((f_x + p1v) + (young_prev - x.dot(zeta_prev))) +
              0.5 * L * step_norm * step_norm;
      rec.Ehat = fval + 0.5 * L * step_norm * step_norm;
      rec.seconds = seconds_since(t0);
      result.trace.records.push_back(rec);
    }

    if (k >= 1 && residual < opts.tol * std::max(1.0, x.norm())) {
      result.status = SolveStatus::converged;
      result.iterations = k;
      break;
    }
    if (k >= opts.max_iter) {
      result.status = SolveStatus::max_iter;
      result.iterations = k;
      break;
    }

    const Vector zeta = problem.p2.subgradient(x);
    const Vector dir = grad_x - zeta;

    double L_k;
    if (opts.frozen_modulus) {
      L_k = L;
    } else if (k == 0) {
      L_k = std::min(std::max(opts.L0, opts.L_min), opts.L_max);
    } else {
      const Vector s = x - x_prev;
      const Vector y = grad_x - grad_prev;
      const double sy = s.dot(y);
      if (sy >= 1e-12)
        L_k = std::min(std::max(sy / s.squaredNorm(), opts.L_min), opts.L_max);
      else
        L_k = std::min(std::max(lbar_prev / 2.0, opts.L_min), opts.L_max);
    }

    double fref = fhist.front();
    for (double fav : fhist) fref = std::max(fref, fav);

    Vector cand;
    for (;;) {
      cand = problem.p1.prox(x - dir / L_k, 1.0 / L_k);
      if (opts.frozen_modulus) break;
      // candidate scored through the iteration-k majorant (P2 linearized)
      const double maj_cand = (problem.smooth_value(cand) + problem.p1.value(cand)) -
                              (p2v + zeta.dot(cand - x));
      const double decrease = 0.5 * opts.accept_c * (cand - x).squaredNorm();
      if (maj_cand <= fref - decrease) break;
      L_k *= opts.tau_growth;
      if (L_k > opts.L_max)
        throw SolverError("npg: linesearch modulus exceeded L_max at iteration " +
                          std::to_string(k));
    }
    lbar_prev = L_k;

    if (opts.record_trace) {
      young_prev = x.dot(zeta) - p2v;
      zeta_prev = zeta;
    }

    x_prev.swap(x);
    x.swap(cand);
    grad_prev.swap(grad_x);
    grad_x = problem.smooth_gradient(x);
  }

  result.solve_seconds = seconds_since(t0);
  return result;
}

}  // namespace detail

// Proximal DC iteration with extrapolation: take xi^{k+1} in dP2(x^k), set
// u^k = x^k + beta_k (x^k - x^{k-1}) and step
// x^{k+1} = prox_{P1/L}(u^k - (grad f(u^k) - xi^{k+1})/L), with x^{-1} = x^0.
// Terminates once the stationarity residual drops below tol * max(1, ||x^k||).
inline SolveResult pdcae_solve(const DcProblem& problem, const Vector& x0,
                               const PdcaeOptions& opts) {
  opts.validate();
  require(problem.lipschitz_L > 0, "pdcae: problem modulus must be positive");
  require(x0.allFinite(), "pdcae: x0 has non-finite entries");
  if (problem.outlier) {
    require(x0.size() == problem.outlier->cols(), "pdcae: x0 dimension mismatch");
    return detail::pdcae_solve_outlier(problem, x0, opts);
  }
  return detail::pdcae_solve_generic(problem, x0, opts);
}

// Proximal DC baseline with Barzilai-Borwein initialization and a
// nonmonotone sufficient-decrease linesearch on the iteration majorant
// (P2 replaced by its linearization at x^k): accept x+ once
// f(x+) + P1(x+) - P2(x^k) - <zeta^k, x+ - x^k>
//   <= max of the last M objective values - (c/2)||x+ - x^k||^2,
// growing the trial modulus by tau_growth otherwise.
inline SolveResult npg_solve(const DcProblem& problem, const Vector& x0,
                             const NpgOptions& opts) {
  opts.validate();
  require(problem.lipschitz_L > 0, "npg: problem modulus must be positive");
  require(x0.allFinite(), "npg: x0 has non-finite entries");
  if (problem.outlier) {
    require(x0.size() == problem.outlier->cols(), "npg: x0 dimension mismatch");
    return detail::npg_solve_outlier(problem, x0, opts);
  }
  return detail::npg_solve_generic(problem, x0, opts);
}

}  // namespace dcopt
