#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcopt/csv.hpp"
#include "dcopt/dc_problem.hpp"
#include "dcopt/solvers.hpp"
#include "dcopt/types.hpp"

namespace dcopt {

// Augmented potential E(x, y, w) = f(x) + P1(x) - <x, y> + P2*(y) + (L/2)||x - w||^2.
// The conjugate is never evaluated directly: xi must be a subgradient of P2
// at x_anchor, so Young's inequality holds with equality and
// P2*(xi) = <x_anchor, xi> - P2(x_anchor). The inner products are computed
// separately and differenced, so with x == x_anchor == w the extra terms are
// exactly zero and the value collapses to evaluate_objective(problem, x).
inline double potential_E(const DcProblem& problem, const Vector& x, const Vector& xi,
                          const Vector& w, const Vector& x_anchor) {
  const double conj_minus_dot = x_anchor.dot(xi) - x.dot(xi);
  const double quad = 0.5 * problem.lipschitz_L * (x - w).squaredNorm();
  return ((((problem.smooth_value(x) + problem.p1.value(x)) + conj_minus_dot) -
           problem.p2.value(x_anchor)) +
          quad);
}

// hat-E(x, w) = F(x) + (L/2)||x - w||^2.
inline double potential_Ehat(const DcProblem& problem, const Vector& x, const Vector& w) {
  return evaluate_objective(problem, x) +
         0.5 * problem.lipschitz_L * (x - w).squaredNorm();
}

struct CertifyReport {
  int checked_records = 0;
  // records whose E failed to drop by the guaranteed (L/2)(1 - beta^2)||step||^2
  std::vector<int> decrease_violations;
  double worst_decrease_deficit = 0;  // most negative slack relative to allowance
  // records violating E >= Ehat >= F at 1e-10 relative slack
  std::vector<int> chain_violations;
  // smallest D with ||dE element|| <= D (||x^k - x^{k-1}|| + ||x^{k-1} - x^{k-2}||),
  // fitted over records carrying subgradient norms
  double fitted_D = std::numeric_limits<double>::quiet_NaN();
  double final_subgrad_norm = std::numeric_limits<double>::quiet_NaN();
  bool has_subgrad_norms = false;

  std::string summary() const {
    std::ostringstream os;
    os << "records checked: " << checked_records
       << "\npotential decrease violations: " << decrease_violations.size()
       << "\nmajorization chain violations: " << chain_violations.size();
    if (has_subgrad_norms)
      os << "\nfitted subgradient bound D: " << fitted_D
         << "\nfinal subgradient norm: " << final_subgrad_norm;
    return os.str();
  }
};

// Checks the recorded potential values of an extrapolated-solver trace:
// (a) E never increases by more than rounding allowance, accounting for the
//     guaranteed (L/2)(1 - beta^2)||step||^2 drop,
// (b) E >= Ehat >= F along the whole trace,
// (c) when subgradient norms were tracked, the smallest constant D bounding
//     them by the sum of the last two step norms.
inline CertifyReport certify_trace(const IterateTrace& trace) {
  CertifyReport report;
  const auto& recs = trace.records;
  double prev_step = 0;
  bool have_prev_step = false;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const TraceRecord& r = recs[i];
    ++report.checked_records;

    if (std::isfinite(r.decrease_slack)) {
      const double allow = 1e-8 * std::max(1.0, std::abs(r.E));
      if (r.decrease_slack < -allow) {
        report.decrease_violations.push_back(r.k);
        report.worst_decrease_deficit =
            std::min(report.worst_decrease_deficit, r.decrease_slack + allow);
      }
    }
    if (std::isfinite(r.E)) {
      const double allow = 1e-10 * std::max(1.0, std::abs(r.E));
      if (r.E < r.Ehat - allow || r.Ehat < r.fval - allow)
        report.chain_violations.push_back(r.k);
    }
    if (std::isfinite(r.subgrad_norm)) {
      report.has_subgrad_norms = true;
      report.final_subgrad_norm = r.subgrad_norm;
      if (have_prev_step) {
        const double denom = r.step_norm + prev_step;
        if (denom > 0) {
          const double d = r.subgrad_norm / denom;
          if (!std::isfinite(report.fitted_D) || d > report.fitted_D) report.fitted_D = d;
        }
      }
    }
    prev_step = r.step_norm;
    have_prev_step = true;
  }
  return report;
}

struct RateFit {
  int window_begin = 0;
  int window_end = 0;  // inclusive record k range used for the fit
  int points = 0;
  double slope = 0;          // per-iteration change of log(E_k - zeta)
  double r_squared = 0;
  double linear_factor = 1;  // exp(slope)
};

struct RateFitOutcome {
  std::optional<RateFit> fit;
  std::string note;
};

// Least-squares line through (k, log(E_k - zeta)) over the trailing
// tail_fraction of the trace, with zeta estimated by the final recorded E.
// Gaps below 1e-14 * max(1, |zeta|) are rounding noise and are dropped.
inline RateFitOutcome fit_linear_rate(const IterateTrace& trace, double tail_fraction = 0.3,
                                      int min_points = 50) {
  RateFitOutcome out;
  const auto& recs = trace.records;
  std::vector<std::pair<double, double>> pts;  // (k, log gap)
  if (recs.empty() || !std::isfinite(recs.back().E)) {
    out.note = "insufficient data: no potential records";
    return out;
  }
  const double zeta = recs.back().E;
  const std::size_t begin =
      recs.size() - std::min(recs.size(),
                             static_cast<std::size_t>(std::ceil(tail_fraction * recs.size())));
  for (std::size_t i = begin; i < recs.size(); ++i) {
    const double gap = recs[i].E - zeta;
    if (!std::isfinite(gap) || gap <= 1e-14 * std::max(1.0, std::abs(zeta))) continue;
    pts.emplace_back(double(recs[i].k), std::log(gap));
  }
  if (static_cast<int>(recs.size() - begin) < min_points) {
    out.note = "insufficient data: tail window holds " + std::to_string(recs.size() - begin) +
               " records, need " + std::to_string(min_points);
    return out;
  }
  if (static_cast<int>(pts.size()) < min_points) {
    out.note = "insufficient decrease: only " + std::to_string(pts.size()) +
               " gaps above rounding noise";
    return out;
  }

  double mean_k = 0, mean_y = 0;
  for (const auto& [k, y] : pts) {
    mean_k += k;
    mean_y += y;
  }
  mean_k /= double(pts.size());
  mean_y /= double(pts.size());
  double skk = 0, sky = 0, syy = 0;
  for (const auto& [k, y] : pts) {
    skk += (k - mean_k) * (k - mean_k);
    sky += (k - mean_k) * (y - mean_y);
    syy += (y - mean_y) * (y - mean_y);
  }
  if (skk == 0 || syy == 0) {
    out.note = "insufficient decrease: degenerate fit window";
    return out;
  }
  RateFit fit;
  fit.window_begin = recs[begin].k;
  fit.window_end = recs.back().k;
  fit.points = static_cast<int>(pts.size());
  fit.slope = sky / skk;
  fit.r_squared = (sky * sky) / (skk * syy);
  fit.linear_factor = std::exp(fit.slope);
  out.fit = fit;
  return out;
}

inline CsvRow trace_csv_header() {
  return {"k",        "fval",     "E",              "Ehat",         "beta",
          "step_norm", "residual", "decrease_slack", "subgrad_norm", "seconds"};
}

inline CsvRow trace_csv_row(const TraceRecord& r) {
  return {fmt_int(r.k),           fmt_full(r.fval),           fmt_full(r.E),
          fmt_full(r.Ehat),       fmt_full(r.beta),           fmt_full(r.step_norm),
          fmt_full(r.residual),   fmt_full(r.decrease_slack), fmt_full(r.subgrad_norm),
          fmt_full(r.seconds)};
}

inline void write_trace_csv(const std::string& path, const IterateTrace& trace) {
  std::vector<CsvRow> rows;
  rows.reserve(trace.records.size());
  for (const TraceRecord& r : trace.records) rows.push_back(trace_csv_row(r));
  write_csv(path, trace_csv_header(), rows);
}

}  // namespace dcopt
