#pragma once

#include "hypf/fields.hpp"
#include "hypf/interfacial.hpp"
#include "hypf/phases.hpp"
#include "hypf/stored_energy.hpp"

namespace hypf::cli {

/// Label 0 left of x1 = split, 1 right of it.
PhasePartition vertical_stripe(const Grid& grid, double split);
/// Label 0 below x2 = split, 1 above it.
PhasePartition horizontal_stripe(const Grid& grid, double split);
/// Two-phase 2x2 checkerboard of quadrants; interfaces cross at the center.
PhasePartition quadrant_checkerboard(const Grid& grid);
/// Label 1 inside the centered square of the given side, 0 outside.
PhasePartition centered_square(const Grid& grid, double side);

/// Classic (1 - z^2)^2 with wells -1 and 1, R = 2.
PhaseSystem classic_double_well();
/// z^2 (1 - z)^2 with wells 1 and 0, so that z is the volume fraction of
/// the first elastic variant in the mixture.
PhaseSystem two_variant_double_well();

/// mu = 0 and U = I for every phase: the bulk term vanishes at F = I and
/// the energy reduces to the interfacial part for the identity map.
StoredEnergySpec phase_only_energy(int components);

DeformationField identity_deformation(const Grid& grid);
DeformationField affine_deformation(const Grid& grid, const Mat2& a);

}  // namespace hypf::cli
