#pragma once

#include <cmath>

#include "dcopt/types.hpp"

namespace dcopt {

struct SpectralEstimate {
  double value = 0.0;  // upper estimate of lambda_max(A^T A)
  int iterations = 0;
  bool converged = false;
};

// Power iteration on A^T A without forming the Gram matrix. Starts from the
// normalized all-ones vector and stops when the Rayleigh quotient settles to
// rel_tol; the final estimate is inflated by (1 + 1e-10) so callers can use
// it as a modulus bound.
inline SpectralEstimate spectral_bound(const Matrix& A, double rel_tol = 1e-10,
                                       int max_iter = 5000) {
  require(A.rows() >= 1 && A.cols() >= 1, "spectral_bound: matrix must be nonempty");
  require(A.allFinite(), "spectral_bound: matrix has non-finite entries");

  const Index n = A.cols();
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
  Vector av(A.rows()), w(n);

  SpectralEstimate est;
  double rho_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    av.noalias() = A * v;
    w.noalias() = A.transpose() * av;
    const double rho = v.dot(w);  // = ||A v||^2 for unit v
    est.value = rho;
    est.iterations = it;
    const double wnorm = w.norm();
    if (wnorm == 0.0) {  // A v = 0: v is in the null space of the Gram matrix
      est.converged = true;
      break;
    }
    if (it > 1 && std::abs(rho - rho_prev) <= rel_tol * std::max(1.0, std::abs(rho))) {
      est.converged = true;
      break;
    }
    rho_prev = rho;
    v = w / wnorm;
  }
  est.value *= 1.0 + 1e-10;
  return est;
}

}  // namespace dcopt
