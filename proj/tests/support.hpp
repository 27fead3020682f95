#pragma once

#include <cmath>
#include <random>

#include "hypf/fields.hpp"
#include "hypf/phases.hpp"

namespace hypf::test {

inline const double kSqrt2 = std::sqrt(2.0);
inline const double kDoubleWellDistance = 4.0 * kSqrt2 / 3.0;

inline PhaseVec scalar(double v) { return PhaseVec::Constant(1, v); }

inline PhaseVec vec(std::initializer_list<double> v) {
  PhaseVec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Mat2 mat(double a, double b, double c, double d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

inline Mat2 rotation(double theta) {
  return mat(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta));
}

// Smooth, orientation-preserving perturbation of the identity with a smooth
// phase field in [lo, hi] (h = 1).
struct SmoothState {
  DeformationField def;
  PhaseField z;
};

inline SmoothState smooth_state(const Grid& grid, std::mt19937_64& rng, double lo = 0.05, double hi = 0.95) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a1 = 0.03 * u(rng), a2 = 0.03 * u(rng), k1 = 1.0 + std::abs(u(rng)), k2 = 1.0 + std::abs(u(rng));
  const double lx = grid.lx(), ly = grid.ly();
  auto map = [=](const Vec2& x) {
    const double b = std::sin(M_PI * x.x() / lx) * std::sin(M_PI * x.y() / ly);
    return Vec2(x.x() + a1 * b * std::cos(k1 * x.y()), x.y() + a2 * b * std::sin(k2 * x.x()));
  };
  const double c1 = u(rng), c2 = u(rng), c3 = u(rng);
  auto phase = [=](const Vec2& x) {
    const double s = 0.5 + 0.5 * std::sin(3.0 * c1 * x.x() + 2.0 * c2 * x.y() + c3);
    return scalar(lo + (hi - lo) * s);
  };
  return {DeformationField::from_map(grid, map), PhaseField::from_function(grid, 1, phase)};
}

}  // namespace hypf::test
