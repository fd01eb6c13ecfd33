#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "dcopt/dc_problem.hpp"
#include "dcopt/outlier_model.hpp"
#include "dcopt/rng.hpp"

using namespace dcopt;

namespace {

Vector random_vector(Index n, SplitMix64& gen, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * gen.next_gaussian();
  return v;
}

DcProblem half_sqnorm_plus_l1() {
  DcProblem p;
  p.lipschitz_L = 1.0;
  p.smooth_value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  p.smooth_gradient = [](const Vector& x) -> Vector { return x; };
  p.p1.value = [](const Vector& x) { return x.lpNorm<1>(); };
  p.p1.prox = [](const Vector& v, double step) -> Vector {
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i)
      out[i] = v[i] > step ? v[i] - step : (v[i] < -step ? v[i] + step : 0.0);
    return out;
  };
  p.p2.value = [](const Vector&) { return 0.0; };
  p.p2.subgradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  return p;
}

std::shared_ptr<const OutlierModel> sample_model(std::uint64_t seed) {
  SplitMix64 gen(seed);
  Matrix A(10, 6);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 6; ++j) A(i, j) = gen.next_gaussian();
  const Vector b = random_vector(10, gen);
  return std::make_shared<const OutlierModel>(std::move(A), LossSpec::squared(b),
                                              RegularizerSpec::truncated_l1(0.1, 0.99, 2), 2);
}

}  // namespace

TEST(EvaluateObjective, DirectSum) {
  const DcProblem p = half_sqnorm_plus_l1();
  Vector x(2);
  x << 1.0, -2.0;
  EXPECT_DOUBLE_EQ(evaluate_objective(p, x), 0.5 * 5.0 + 3.0);
  EXPECT_DOUBLE_EQ(evaluate_objective(p, Vector::Zero(2)), 0.0);
}

TEST(EvaluateObjective, RejectsNonFinite) {
  const DcProblem p = half_sqnorm_plus_l1();
  Vector x(1);
  x << std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(evaluate_objective(p, x), std::invalid_argument);

  DcProblem bad = half_sqnorm_plus_l1();
  bad.smooth_value = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(evaluate_objective(bad, Vector::Zero(1)), std::domain_error);
}

// Sampled form of the modulus contract: the compiled smooth part has an
// L-Lipschitz gradient and is convex.
TEST(DcProblem, SampledLipschitzAndConvexity) {
  auto model = sample_model(3);
  const DcProblem p = compile(model);
  SplitMix64 gen(7);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector x = random_vector(6, gen, 2.0);
    const Vector y = random_vector(6, gen, 2.0);
    const Vector gx = p.smooth_gradient(x);
    const Vector gy = p.smooth_gradient(y);
    EXPECT_LE((gx - gy).norm(), p.lipschitz_L * (x - y).norm() + 1e-10);
    EXPECT_GE(p.smooth_value(y) - p.smooth_value(x) - gx.dot(y - x), -1e-10);
  }
}

TEST(DcProblem, ObjectiveMatchesPartsInFixedOrder) {
  auto model = sample_model(5);
  const DcProblem p = compile(model);
  SplitMix64 gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = random_vector(6, gen);
    const double expected = (p.smooth_value(x) + p.p1.value(x)) - p.p2.value(x);
    EXPECT_EQ(evaluate_objective(p, x), expected);
  }
}
