#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "dcopt/types.hpp"

namespace dcopt {

class OutlierModel;

// Proper closed convex term with a computable proximal mapping.
// prox(v, step) returns argmin_x { value(x) + 1/(2*step) * ||x - v||^2 }.
struct ProxTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&, double)> prox;
};

// Continuous convex term queried through one deterministic subgradient.
struct SubgradientTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
};

// The composite objective F = f + P1 - P2: smooth convex f with gradient
// modulus lipschitz_L, prox-capable convex P1, continuous convex P2.
// Immutable after construction; all parts must be pure.
struct DcProblem {
  std::function<double(const Vector&)> smooth_value;
  std::function<Vector(const Vector&)> smooth_gradient;
  double lipschitz_L = 0.0;
  ProxTerm p1;
  SubgradientTerm p2;

  // Set when the problem was compiled from an outlier-detection instance;
  // solvers use it to run the structured iteration with cached residuals.
  std::shared_ptr<const OutlierModel> outlier;
};

// F(x) = f(x) + P1(x) - P2(x), evaluated in that fixed order so repeated
// runs are bit-stable.
inline double evaluate_objective(const DcProblem& problem, const Vector& x) {
  require(x.allFinite(), "evaluate_objective: x has non-finite entries");
  const double result =
      (problem.smooth_value(x) + problem.p1.value(x)) - problem.p2.value(x);
  if (!std::isfinite(result))
    throw std::domain_error("evaluate_objective: non-finite objective value");
  return result;
}

}  // namespace dcopt
