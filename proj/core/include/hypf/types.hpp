#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <limits>
#include <stdexcept>
#include <string>

namespace hypf {

/// Upper bound on the phase-field component count h. Keeps per-node
/// vectors on the stack.
inline constexpr int kMaxComponents = 8;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Point in the order-parameter space R^h.
using PhaseVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxComponents, 1>;

/// h x 2 matrix: gradient of an R^h-valued field in the plane.
using PhaseGrad = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, kMaxComponents, 2>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// 2-D cofactor: cof [[a, b], [c, d]] = [[d, -c], [-b, a]], so that
/// cof(F) F^T = det(F) I.
inline Mat2 cofactor(const Mat2& f) {
  Mat2 c;
  c << f(1, 1), -f(1, 0), -f(0, 1), f(0, 0);
  return c;
}

/// Non-finite input, or evaluation outside the domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid construction parameters (violated type invariants).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hypf
