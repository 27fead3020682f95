#include "scenarios.hpp"

namespace hypf::cli {

PhasePartition vertical_stripe(const Grid& grid, double split) {
  return PhasePartition::from_function(grid, 2, [split](const Vec2& c) { return c.x() < split ? 0 : 1; });
}

PhasePartition horizontal_stripe(const Grid& grid, double split) {
  return PhasePartition::from_function(grid, 2, [split](const Vec2& c) { return c.y() < split ? 0 : 1; });
}

PhasePartition quadrant_checkerboard(const Grid& grid) {
  const double cx = 0.5 * grid.lx();
  const double cy = 0.5 * grid.ly();
  return PhasePartition::from_function(
      grid, 2, [cx, cy](const Vec2& c) { return (c.x() < cx) == (c.y() < cy) ? 0 : 1; });
}

PhasePartition centered_square(const Grid& grid, double side) {
  const double cx = 0.5 * grid.lx();
  const double cy = 0.5 * grid.ly();
  return PhasePartition::from_function(grid, 2, [=](const Vec2& c) {
    return std::abs(c.x() - cx) < 0.5 * side && std::abs(c.y() - cy) < 0.5 * side ? 1 : 0;
  });
}

PhaseSystem classic_double_well() {
  return PhaseSystem(PotentialFamily::DoubleWell, {PhaseVec::Constant(1, -1.0), PhaseVec::Constant(1, 1.0)},
                     2.0);
}

PhaseSystem two_variant_double_well() {
  return PhaseSystem(PotentialFamily::DoubleWell, {PhaseVec::Constant(1, 1.0), PhaseVec::Constant(1, 0.0)},
                     1.5);
}

StoredEnergySpec phase_only_energy(int components) {
  StoredEnergySpec spec;
  spec.wells.assign(std::size_t(components) + 1, WellMaterial{0.0, Mat2::Identity()});
  return spec;
}

DeformationField identity_deformation(const Grid& grid) {
  return DeformationField::from_map(grid, [](const Vec2& x) { return x; });
}

DeformationField affine_deformation(const Grid& grid, const Mat2& a) {
  return DeformationField::from_map(grid, [a](const Vec2& x) -> Vec2 { return a * x; });
}

}  // namespace hypf::cli
