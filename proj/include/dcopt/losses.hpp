#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "dcopt/types.hpp"

namespace dcopt {

// Separable losses Psi(s) = sum_i psi_i(s_i). Every psi_i is convex,
// nonnegative, attains 0, and has a 1-Lipschitz derivative.
enum class LossKind { squared, squared_hinge, quad_eps_insensitive, quantile_squared };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::squared: return "squared";
    case LossKind::squared_hinge: return "squared-hinge";
    case LossKind::quad_eps_insensitive: return "quad-eps-insensitive";
    case LossKind::quantile_squared: return "quantile-squared";
  }
  return "?";
}

class LossSpec {
 public:
  static LossSpec squared(Vector b) {
    return LossSpec(LossKind::squared, std::move(b), 0.0, 0.0);
  }
  static LossSpec squared_hinge(Vector b) {
    for (Index i = 0; i < b.size(); ++i)
      require(b[i] == 1.0 || b[i] == -1.0,
              "squared-hinge requires targets in {-1, +1} (entry " + std::to_string(i) + ")");
    return LossSpec(LossKind::squared_hinge, std::move(b), 0.0, 0.0);
  }
  static LossSpec quad_eps_insensitive(Vector b, double epsilon) {
    require(epsilon > 0, "quad-eps-insensitive requires epsilon > 0 (got " +
                             std::to_string(epsilon) + ")");
    return LossSpec(LossKind::quad_eps_insensitive, std::move(b), epsilon, 0.0);
  }
  static LossSpec quantile_squared(Vector b, double tau) {
    require(tau > 0 && tau < 1,
            "quantile-squared requires tau in (0, 1) (got " + std::to_string(tau) + ")");
    return LossSpec(LossKind::quantile_squared, std::move(b), 0.0, tau);
  }

  LossKind kind() const { return kind_; }
  Index dim() const { return b_.size(); }
  const Vector& targets() const { return b_; }
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }

  // Every family has a 1-Lipschitz derivative (the quantile case even admits
  // max(tau, 1-tau), but 1 keeps the DC decomposition uniform across losses).
  double lipschitz_modulus() const { return modulus_; }
  void set_modulus(double m) {
    require(m > 0, "loss modulus must be positive");
    modulus_ = m;
  }

  double value_at(Index i, double s) const {
    switch (kind_) {
      case LossKind::squared: {
        const double d = s - b_[i];
        return 0.5 * d * d;
      }
      case LossKind::squared_hinge: {
        const double h = std::max(1.0 - b_[i] * s, 0.0);
        return 0.5 * h * h;
      }
      case LossKind::quad_eps_insensitive: {
        const double h = std::max(std::abs(s - b_[i]) - epsilon_, 0.0);
        return 0.5 * h * h;
      }
      case LossKind::quantile_squared: {
        const double up = std::max(s - b_[i], 0.0);
        const double dn = std::max(b_[i] - s, 0.0);
        return 0.5 * tau_ * up * up + 0.5 * (1.0 - tau_) * dn * dn;
      }
    }
    return 0.0;
  }

  double derivative_at(Index i, double s) const {
    switch (kind_) {
      case LossKind::squared:
        return s - b_[i];
      case LossKind::squared_hinge:
        return -b_[i] * std::max(1.0 - b_[i] * s, 0.0);
      case LossKind::quad_eps_insensitive: {
        const double d = s - b_[i];
        const double h = std::max(std::abs(d) - epsilon_, 0.0);
        return d >= 0 ? h : -h;
      }
      case LossKind::quantile_squared:
        return tau_ * std::max(s - b_[i], 0.0) - (1.0 - tau_) * std::max(b_[i] - s, 0.0);
    }
    return 0.0;
  }

  double value(const Vector& s) const {
    check_dim(s);
    double total = 0.0;
    for (Index i = 0; i < s.size(); ++i) total += value_at(i, s[i]);
    return total;
  }

  Vector gradient(const Vector& s) const {
    check_dim(s);
    Vector g(s.size());
    for (Index i = 0; i < s.size(); ++i) g[i] = derivative_at(i, s[i]);
    return g;
  }

  // A point where Psi vanishes: the target itself works for all four
  // families (b_i * b_i = 1 >= 1 keeps the hinge inactive).
  Vector argmin_representative() const { return b_; }

 private:
  LossSpec(LossKind kind, Vector b, double epsilon, double tau)
      : kind_(kind), b_(std::move(b)), epsilon_(epsilon), tau_(tau) {}

  void check_dim(const Vector& s) const {
    require(s.size() == b_.size(), "loss: dimension mismatch (got " +
                                       std::to_string(s.size()) + ", expected " +
                                       std::to_string(b_.size()) + ")");
  }

  LossKind kind_;
  Vector b_;
  double epsilon_;
  double tau_;
  double modulus_ = 1.0;
};

inline LossKind parse_loss_kind(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "squared-hinge" || name == "squared_hinge") return LossKind::squared_hinge;
  if (name == "quad-eps-insensitive" || name == "quad_eps_insensitive")
    return LossKind::quad_eps_insensitive;
  if (name == "quantile-squared" || name == "quantile_squared")
    return LossKind::quantile_squared;
  throw ConfigError("unknown loss kind: " + name);
}

}  // namespace dcopt
