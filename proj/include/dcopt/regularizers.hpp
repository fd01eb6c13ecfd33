#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dcopt/types.hpp"

namespace dcopt {

// Five sparsity-inducing penalties written as a DC pair: P(x) = P1(x) - P2(x)
// with P1 = lambda * ||x||_1 in every case and a kind-specific convex P2.
enum class RegularizerKind { scad, mcp, l1_minus_l2, truncated_l1, capped_l1 };

inline const char* to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::scad: return "scad";
    case RegularizerKind::mcp: return "mcp";
    case RegularizerKind::l1_minus_l2: return "l1-l2";
    case RegularizerKind::truncated_l1: return "truncated-l1";
    case RegularizerKind::capped_l1: return "capped-l1";
  }
  return "?";
}

// Indices of the p largest entries of x in magnitude; ties prefer the lower
// index so the selection (and any subgradient built from it) is a function.
inline std::vector<Index> top_p_indices(const Vector& x, Index p) {
  std::vector<Index> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto larger = [&x](Index a, Index b) {
    const double ma = std::abs(x[a]), mb = std::abs(x[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + p, idx.end(), larger);
  idx.resize(static_cast<std::size_t>(p));
  return idx;
}

class RegularizerSpec {
 public:
  static RegularizerSpec scad(double lambda, double theta) {
    require(lambda > 0, "scad requires lambda > 0 (got " + std::to_string(lambda) + ")");
    require(theta > 2, "scad requires theta > 2 (got " + std::to_string(theta) + ")");
    return RegularizerSpec(RegularizerKind::scad, lambda, theta, 0.0, 0);
  }
  static RegularizerSpec mcp(double lambda, double theta) {
    require(lambda > 0, "mcp requires lambda > 0 (got " + std::to_string(lambda) + ")");
    require(theta > 1, "mcp requires theta > 1 (got " + std::to_string(theta) + ")");
    return RegularizerSpec(RegularizerKind::mcp, lambda, theta, 0.0, 0);
  }
  static RegularizerSpec l1_minus_l2(double lambda) {
    require(lambda > 0, "l1-l2 requires lambda > 0 (got " + std::to_string(lambda) + ")");
    return RegularizerSpec(RegularizerKind::l1_minus_l2, lambda, 0.0, 0.0, 0);
  }
  static RegularizerSpec truncated_l1(double lambda, double mu, Index p) {
    require(lambda > 0, "truncated-l1 requires lambda > 0 (got " + std::to_string(lambda) + ")");
    require(mu > 0 && mu <= 1, "truncated-l1 requires mu in (0, 1] (got " + std::to_string(mu) + ")");
    require(p >= 1, "truncated-l1 requires p >= 1 (got " + std::to_string(p) + ")");
    return RegularizerSpec(RegularizerKind::truncated_l1, lambda, 0.0, mu, p);
  }
  static RegularizerSpec capped_l1(double lambda, double theta) {
    require(lambda > 0, "capped-l1 requires lambda > 0 (got " + std::to_string(lambda) + ")");
    require(theta > 0, "capped-l1 requires theta > 0 (got " + std::to_string(theta) + ")");
    return RegularizerSpec(RegularizerKind::capped_l1, lambda, theta, 0.0, 0);
  }

  RegularizerKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double theta() const { return theta_; }
  double mu() const { return mu_; }
  Index p() const { return p_; }

  double p1_value(const Vector& x) const { return lambda_ * x.lpNorm<1>(); }

  // Exact minimizer of lambda*||x||_1 + 1/(2*step)*||x - v||^2:
  // componentwise soft-thresholding at level lambda*step.
  Vector prox_p1(const Vector& v, double step) const {
    require(step > 0, "prox_p1 requires step > 0");
    const double level = lambda_ * step;
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
      const double vi = v[i];
      if (vi > level)
        out[i] = vi - level;
      else if (vi < -level)
        out[i] = vi + level;
      else
        out[i] = 0.0;
    }
    return out;
  }

  double p2_value(const Vector& x) const {
    switch (kind_) {
      case RegularizerKind::scad: {
        double total = 0.0;
        for (Index i = 0; i < x.size(); ++i) total += scad_p2_scalar(std::abs(x[i]));
        return total;
      }
      case RegularizerKind::mcp: {
        double total = 0.0;
        for (Index i = 0; i < x.size(); ++i) total += mcp_p2_scalar(std::abs(x[i]));
        return total;
      }
      case RegularizerKind::l1_minus_l2:
        return lambda_ * x.norm();
      case RegularizerKind::truncated_l1: {
        check_p(x.size());
        const auto top = top_p_indices(x, p_);
        double total = 0.0;
        for (Index i : top) total += std::abs(x[i]);
        return lambda_ * mu_ * total;
      }
      case RegularizerKind::capped_l1: {
        double total = 0.0;
        for (Index i = 0; i < x.size(); ++i) total += std::max(std::abs(x[i]) - theta_, 0.0);
        return lambda_ * total;
      }
    }
    return 0.0;
  }

  // One deterministic element of the convex subdifferential of P2.
  // Selection rules at the nonsmooth points: l1-l2 returns 0 at x = 0,
  // capped-l1 returns 0 at |x_i| = theta, truncated-l1 contributes 0 for a
  // selected coordinate with x_i = 0. SCAD and MCP are differentiable, so
  // the gradient is returned.
  Vector p2_subgradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    switch (kind_) {
      case RegularizerKind::scad:
        for (Index i = 0; i < x.size(); ++i) {
          const double a = std::abs(x[i]);
          if (a <= lambda_) continue;
          const double slope = a <= theta_ * lambda_ ? (a - lambda_) / (theta_ - 1.0) : lambda_;
          g[i] = sign(x[i]) * slope;
        }
        break;
      case RegularizerKind::mcp:
        for (Index i = 0; i < x.size(); ++i) {
          const double a = std::abs(x[i]);
          g[i] = a <= theta_ * lambda_ ? x[i] / theta_ : lambda_ * sign(x[i]);
        }
        break;
      case RegularizerKind::l1_minus_l2: {
        const double norm = x.norm();
        if (norm > 0) g = (lambda_ / norm) * x;
        break;
      }
      case RegularizerKind::truncated_l1: {
        check_p(x.size());
        for (Index i : top_p_indices(x, p_)) g[i] = lambda_ * mu_ * sign(x[i]);
        break;
      }
      case RegularizerKind::capped_l1:
        for (Index i = 0; i < x.size(); ++i)
          if (std::abs(x[i]) > theta_) g[i] = lambda_ * sign(x[i]);
        break;
    }
    return g;
  }

  double penalty(const Vector& x) const { return p1_value(x) - p2_value(x); }

 private:
  RegularizerSpec(RegularizerKind kind, double lambda, double theta, double mu, Index p)
      : kind_(kind), lambda_(lambda), theta_(theta), mu_(mu), p_(p) {}

  static double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

  void check_p(Index n) const {
    require(p_ < n, "truncated-l1 requires p < n (got p = " + std::to_string(p_) +
                        ", n = " + std::to_string(n) + ")");
  }

  double scad_p2_scalar(double a) const {
    if (a <= lambda_) return 0.0;
    if (a <= theta_ * lambda_) return (a - lambda_) * (a - lambda_) / (2.0 * (theta_ - 1.0));
    return lambda_ * a - (theta_ + 1.0) * lambda_ * lambda_ / 2.0;
  }

  double mcp_p2_scalar(double a) const {
    if (a <= theta_ * lambda_) return a * a / (2.0 * theta_);
    return lambda_ * a - theta_ * lambda_ * lambda_ / 2.0;
  }

  RegularizerKind kind_;
  double lambda_;
  double theta_;
  double mu_;
  Index p_;
};

inline RegularizerKind parse_regularizer_kind(const std::string& name) {
  if (name == "scad") return RegularizerKind::scad;
  if (name == "mcp") return RegularizerKind::mcp;
  if (name == "l1-l2" || name == "l1_minus_l2") return RegularizerKind::l1_minus_l2;
  if (name == "truncated-l1" || name == "truncated_l1") return RegularizerKind::truncated_l1;
  if (name == "capped-l1" || name == "capped_l1") return RegularizerKind::capped_l1;
  throw ConfigError("unknown regularizer kind: " + name);
}

}  // namespace dcopt
