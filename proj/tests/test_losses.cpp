#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dcopt/losses.hpp"
#include "dcopt/rng.hpp"

using namespace dcopt;

namespace {

std::vector<LossSpec> all_kinds(Index m, SplitMix64& gen) {
  Vector b(m), signs(m);
  for (Index i = 0; i < m; ++i) {
    b[i] = 2.0 * gen.next_gaussian();
    signs[i] = gen.next_uniform() < 0.5 ? -1.0 : 1.0;
  }
  return {LossSpec::squared(b), LossSpec::squared_hinge(signs),
          LossSpec::quad_eps_insensitive(b, 0.4), LossSpec::quantile_squared(b, 0.3)};
}

}  // namespace

TEST(LossValue, SquaredAtTargetIsZero) {
  Vector b(2);
  b << 1.0, 2.0;
  const auto loss = LossSpec::squared(b);
  EXPECT_DOUBLE_EQ(loss.value(b), 0.0);
}

TEST(LossValue, InsideInsensitiveTubeIsZero) {
  Vector b(1), s(1);
  b << 0.0;
  s << 0.5;
  const auto loss = LossSpec::quad_eps_insensitive(b, 1.0);
  EXPECT_DOUBLE_EQ(loss.value(s), 0.0);
}

TEST(LossValue, QuantileOneSided) {
  Vector b(1), s(1);
  b << 0.0;
  s << 2.0;
  const auto loss = LossSpec::quantile_squared(b, 0.3);
  EXPECT_DOUBLE_EQ(loss.value(s), 0.3 / 2.0 * 4.0);
}

TEST(LossGradient, SquaredIsResidual) {
  Vector b(1), s(1);
  b << 1.0;
  s << 3.0;
  EXPECT_DOUBLE_EQ(LossSpec::squared(b).gradient(s)[0], 2.0);
}

TEST(LossGradient, InactiveHingeIsZero) {
  Vector b(1), s(1);
  b << 1.0;
  s << 2.0;
  EXPECT_DOUBLE_EQ(LossSpec::squared_hinge(b).gradient(s)[0], 0.0);
}

// Oracle: central finite differences of the loss value.
TEST(LossGradient, MatchesFiniteDifferences) {
  SplitMix64 gen(3);
  for (auto& loss : all_kinds(5, gen)) {
    for (int trial = 0; trial < 200; ++trial) {
      Vector s(loss.dim());
      for (Index i = 0; i < s.size(); ++i) s[i] = 3.0 * gen.next_gaussian();
      const Vector g = loss.gradient(s);
      const double h = 1e-6;
      for (Index i = 0; i < s.size(); ++i) {
        Vector sp = s, sm = s;
        sp[i] += h;
        sm[i] -= h;
        EXPECT_NEAR(g[i], (loss.value(sp) - loss.value(sm)) / (2.0 * h), 1e-6)
            << to_string(loss.kind());
      }
    }
  }
}

TEST(ArgminRepresentative, AttainsZeroLoss) {
  Vector b(2);
  b << 1.0, -4.0;
  EXPECT_EQ(LossSpec::squared(b).argmin_representative(), b);

  Vector sign(1);
  sign << -1.0;
  const auto hinge = LossSpec::squared_hinge(sign);
  EXPECT_DOUBLE_EQ(hinge.argmin_representative()[0], -1.0);
  EXPECT_DOUBLE_EQ(hinge.value(hinge.argmin_representative()), 0.0);

  Vector c(1);
  c << 2.0;
  const auto tube = LossSpec::quad_eps_insensitive(c, 0.5);
  EXPECT_DOUBLE_EQ(tube.value(tube.argmin_representative()), 0.0);

  SplitMix64 gen(11);
  for (auto& loss : all_kinds(6, gen)) {
    EXPECT_DOUBLE_EQ(loss.value(loss.argmin_representative()), 0.0)
        << to_string(loss.kind());
  }
}

TEST(LipschitzModulus, IsOneForAllKinds) {
  SplitMix64 gen(13);
  for (auto& loss : all_kinds(4, gen)) EXPECT_DOUBLE_EQ(loss.lipschitz_modulus(), 1.0);
}

// Sampled derivative-difference quotients never exceed the declared modulus.
TEST(LipschitzModulus, BoundsDerivativeDifferences) {
  SplitMix64 gen(17);
  for (auto& loss : all_kinds(3, gen)) {
    for (int trial = 0; trial < 100000; ++trial) {
      const Index i = static_cast<Index>(gen.next_bounded(std::uint64_t(loss.dim())));
      const double a = 4.0 * gen.next_gaussian();
      const double c = 4.0 * gen.next_gaussian();
      const double lhs = std::abs(loss.derivative_at(i, a) - loss.derivative_at(i, c));
      EXPECT_LE(lhs, loss.lipschitz_modulus() * std::abs(a - c) + 1e-12)
          << to_string(loss.kind());
    }
  }
}

TEST(Convexity, MidpointInequality) {
  SplitMix64 gen(19);
  for (auto& loss : all_kinds(3, gen)) {
    for (int trial = 0; trial < 10000; ++trial) {
      const Index i = static_cast<Index>(gen.next_bounded(std::uint64_t(loss.dim())));
      const double a = 4.0 * gen.next_gaussian();
      const double c = 4.0 * gen.next_gaussian();
      const double mid = loss.value_at(i, 0.5 * (a + c));
      EXPECT_LE(mid, 0.5 * (loss.value_at(i, a) + loss.value_at(i, c)) + 1e-12);
    }
  }
}

TEST(Nonnegativity, SampledValues) {
  SplitMix64 gen(23);
  for (auto& loss : all_kinds(4, gen)) {
    for (int trial = 0; trial < 1000; ++trial) {
      Vector s(loss.dim());
      for (Index i = 0; i < s.size(); ++i) s[i] = 5.0 * gen.next_gaussian();
      EXPECT_GE(loss.value(s), 0.0);
    }
  }
}

TEST(Construction, Validation) {
  Vector b(2);
  b << 1.0, 0.5;
  EXPECT_THROW(LossSpec::squared_hinge(b), std::invalid_argument);
  EXPECT_THROW(LossSpec::quad_eps_insensitive(b, 0.0), std::invalid_argument);
  EXPECT_THROW(LossSpec::quantile_squared(b, 1.0), std::invalid_argument);
  EXPECT_THROW(LossSpec::quantile_squared(b, 0.0), std::invalid_argument);

  auto loss = LossSpec::squared(b);
  EXPECT_THROW(loss.value(Vector::Zero(3)), std::invalid_argument);
  EXPECT_THROW(loss.set_modulus(0.0), std::invalid_argument);
  loss.set_modulus(0.5);
  EXPECT_DOUBLE_EQ(loss.lipschitz_modulus(), 0.5);
}

TEST(ParseKind, RoundTripsAndRejectsUnknown) {
  EXPECT_EQ(parse_loss_kind("squared"), LossKind::squared);
  EXPECT_EQ(parse_loss_kind("quantile-squared"), LossKind::quantile_squared);
  EXPECT_THROW(parse_loss_kind("absolute"), ConfigError);
}
