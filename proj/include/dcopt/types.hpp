#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dcopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Raised on malformed configuration or invalid construction parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a solver has to give up (non-finite iterate, linesearch
// modulus overflow).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace dcopt
