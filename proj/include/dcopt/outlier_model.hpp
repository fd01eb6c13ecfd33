#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "dcopt/dc_problem.hpp"
#include "dcopt/dense.hpp"
#include "dcopt/losses.hpp"
#include "dcopt/regularizers.hpp"
#include "dcopt/types.hpp"

namespace dcopt {

// Simultaneous sparse recovery and outlier detection:
//
//   min_{x, z}  Psi(A x - z) + J1(x) - J2(x)   s.t.  ||z||_0 <= r,
//
// compiled into the composite form  (L_Psi/2)||A x||^2 + P1(x) - P2(x) with
// P1 = J1 and P2 = Q + J2, where Q(x) = (L_Psi/2)||A x||^2 - inf_z Psi(A x - z).
// Minimizing over z reduces to keeping the r rows with the largest
// per-coordinate loss; those rows are absorbed by z and drop out.
class OutlierModel {
 public:
  // Scratch buffers for the per-iteration trimming step, reusable across
  // calls so the solver hot loop does not allocate.
  struct TrimWorkspace {
    std::vector<Index> order;
    std::vector<char> on_support;
    Vector scores;
  };

  OutlierModel(std::shared_ptr<const Matrix> A, LossSpec loss, RegularizerSpec reg,
               Index r, double modulus)
      : A_(std::move(A)), loss_(std::move(loss)), reg_(std::move(reg)), r_(r), L_(modulus) {
    validate();
    require(L_ >= loss_.lipschitz_modulus() * spectral_bound(*A_).value,
            "outlier model: modulus below L_Psi * lambda_max(A^T A)");
  }

  // Same, with a spectral bound the caller already computed for this matrix.
  OutlierModel(std::shared_ptr<const Matrix> A, LossSpec loss, RegularizerSpec reg,
               Index r, double modulus, const SpectralEstimate& bound)
      : A_(std::move(A)), loss_(std::move(loss)), reg_(std::move(reg)), r_(r), L_(modulus) {
    validate();
    require(L_ >= loss_.lipschitz_modulus() * bound.value,
            "outlier model: modulus below L_Psi * lambda_max(A^T A)");
  }

  // Convenience: modulus taken as L_Psi * (power-iteration bound on
  // lambda_max(A^T A)).
  OutlierModel(std::shared_ptr<const Matrix> A, LossSpec loss, RegularizerSpec reg, Index r)
      : A_(std::move(A)), loss_(std::move(loss)), reg_(std::move(reg)), r_(r), L_(0.0) {
    validate();
    L_ = loss_.lipschitz_modulus() * spectral_bound(*A_).value;
  }

  OutlierModel(Matrix A, LossSpec loss, RegularizerSpec reg, Index r)
      : OutlierModel(std::make_shared<const Matrix>(std::move(A)), std::move(loss),
                     std::move(reg), r) {}

  const Matrix& A() const { return *A_; }
  const LossSpec& loss() const { return loss_; }
  const RegularizerSpec& regularizer() const { return reg_; }
  Index r() const { return r_; }
  Index rows() const { return A_->rows(); }
  Index cols() const { return A_->cols(); }
  double modulus() const { return L_; }

  // Rows absorbed by z at the point with residual map ax = A x: the r
  // largest values of psi_i([A x]_i), ties resolved toward the lower index.
  void select_support(const Vector& ax, TrimWorkspace& ws) const {
    const Index m = rows();
    ws.scores.resize(m);
    for (Index i = 0; i < m; ++i) ws.scores[i] = loss_.value_at(i, ax[i]);
    ws.order.resize(static_cast<std::size_t>(m));
    std::iota(ws.order.begin(), ws.order.end(), Index{0});
    auto larger = [&ws](Index a, Index b) {
      if (ws.scores[a] != ws.scores[b]) return ws.scores[a] > ws.scores[b];
      return a < b;
    };
    std::nth_element(ws.order.begin(), ws.order.begin() + (r_ - 1), ws.order.end(), larger);
    ws.on_support.assign(static_cast<std::size_t>(m), 0);
    for (Index j = 0; j < r_; ++j) ws.on_support[static_cast<std::size_t>(ws.order[j])] = 1;
  }

  // Loss after the z-step, Psi(A x - z^+) = sum of the m - r smallest scores,
  // and optionally its gradient grad = grad Psi(A x - z^+) (zero on the
  // selected rows, psi_i'([A x]_i) elsewhere).
  double trimmed_loss(const Vector& ax, TrimWorkspace& ws, Vector* grad = nullptr) const {
    select_support(ax, ws);
    const Index m = rows();
    if (grad) grad->resize(m);
    double total = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (ws.on_support[static_cast<std::size_t>(i)]) {
        if (grad) (*grad)[i] = 0.0;
      } else {
        total += ws.scores[i];
        if (grad) (*grad)[i] = loss_.derivative_at(i, ax[i]);
      }
    }
    return total;
  }

  // z^+ in Argmin_{||z||_0 <= r} Psi(A x - z): on the selected rows z absorbs
  // the residual down to a loss minimizer, elsewhere z = 0.
  Vector z_step_from_ax(const Vector& ax) const {
    TrimWorkspace ws;
    select_support(ax, ws);
    const Vector rep = loss_.argmin_representative();
    Vector z = Vector::Zero(rows());
    for (Index i = 0; i < rows(); ++i)
      if (ws.on_support[static_cast<std::size_t>(i)]) z[i] = ax[i] - rep[i];
    return z;
  }

  Vector z_step(const Vector& x) const {
    check_x(x);
    return z_step_from_ax(*A_ * x);
  }

  // Q(x) = (L_Psi/2)||A x||^2 - inf_{z in Omega} Psi(A x - z).
  double q_value(const Vector& x) const {
    check_x(x);
    TrimWorkspace ws;
    const Vector ax = *A_ * x;
    const double lpsi = loss_.lipschitz_modulus();
    return 0.5 * lpsi * ax.squaredNorm() - trimmed_loss(ax, ws);
  }

  // L_Psi A^T A x - A^T grad Psi(A x - z^+), an element of the convex
  // subdifferential of Q at x.
  Vector q_subgradient(const Vector& x) const {
    check_x(x);
    TrimWorkspace ws;
    const Vector ax = *A_ * x;
    Vector grad_psi(rows());
    trimmed_loss(ax, ws, &grad_psi);
    const double lpsi = loss_.lipschitz_modulus();
    return A_->transpose() * (lpsi * ax - grad_psi);
  }

  // F(x) = f + P1 - P2 collapses to the trimmed objective
  // Psi(A x - z^+) + J1(x) - J2(x); this form avoids the cancellation of the
  // two (L_Psi/2)||A x||^2 terms.
  double objective_from_ax(const Vector& x, const Vector& ax, TrimWorkspace& ws) const {
    return trimmed_loss(ax, ws) + reg_.p1_value(x) - reg_.p2_value(x);
  }

  double objective(const Vector& x) const {
    check_x(x);
    TrimWorkspace ws;
    return objective_from_ax(x, *A_ * x, ws);
  }

 private:
  void validate() {
    require(A_ != nullptr && A_->rows() >= 1 && A_->cols() >= 1,
            "outlier model: matrix must be nonempty");
    require(A_->allFinite(), "outlier model: matrix has non-finite entries");
    require(loss_.dim() == A_->rows(), "outlier model: loss targets/rows mismatch (got " +
                                           std::to_string(loss_.dim()) + " targets, " +
                                           std::to_string(A_->rows()) + " rows)");
    require(r_ >= 1 && r_ <= A_->rows(),
            "outlier model: r must satisfy 1 <= r <= m (got " + std::to_string(r_) + ")");
    if (reg_.kind() == RegularizerKind::truncated_l1)
      require(reg_.p() < A_->cols(), "truncated-l1 requires p < n (got p = " +
                                         std::to_string(reg_.p()) + ", n = " +
                                         std::to_string(A_->cols()) + ")");
  }

  void check_x(const Vector& x) const {
    require(x.size() == A_->cols(), "outlier model: x has dimension " +
                                        std::to_string(x.size()) + ", expected " +
                                        std::to_string(A_->cols()));
  }

  std::shared_ptr<const Matrix> A_;
  LossSpec loss_;
  RegularizerSpec reg_;
  Index r_;
  double L_;
};

// The DC form consumed by the solvers: f(x) = (L_Psi/2)||A x||^2 with
// gradient modulus L, P1 = J1, P2 = Q + J2 (the subdifferential of the sum
// splits since Q is finite-valued convex).
inline DcProblem compile(std::shared_ptr<const OutlierModel> model) {
  require(model != nullptr, "compile: null model");
  DcProblem problem;
  problem.lipschitz_L = model->modulus();
  problem.smooth_value = [model](const Vector& x) {
    const double lpsi = model->loss().lipschitz_modulus();
    return 0.5 * lpsi * (model->A() * x).squaredNorm();
  };
  problem.smooth_gradient = [model](const Vector& x) -> Vector {
    const double lpsi = model->loss().lipschitz_modulus();
    return lpsi * (model->A().transpose() * (model->A() * x));
  };
  problem.p1.value = [model](const Vector& x) { return model->regularizer().p1_value(x); };
  problem.p1.prox = [model](const Vector& v, double step) {
    return model->regularizer().prox_p1(v, step);
  };
  problem.p2.value = [model](const Vector& x) {
    return model->q_value(x) + model->regularizer().p2_value(x);
  };
  problem.p2.subgradient = [model](const Vector& x) -> Vector {
    return model->q_subgradient(x) + model->regularizer().p2_subgradient(x);
  };
  problem.outlier = std::move(model);
  return problem;
}

}  // namespace dcopt
