#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace socl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Caller violated a documented precondition (dimension mismatch, bad index, ...).
struct ContractError : std::invalid_argument {
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced a non-finite value or otherwise left the space of
/// representable results.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver failed in a structured way (loss of positive
/// definiteness, non-convergence treated as fatal by the caller, ...).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace socl
