#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "hypf/fields.hpp"
#include "hypf/geodesic.hpp"
#include "hypf/interfacial.hpp"
#include "hypf/phases.hpp"
#include "hypf/stored_energy.hpp"

namespace hypf {

/// Distortion above which a cell is counted in the "anisotropic_cells"
/// diagnostic. Flagged, never corrected.
inline constexpr double kAnisotropyFlag = 1e3;

struct EnergyReport {
  double bulk = 0.0;
  double interface = 0.0;
  double total = 0.0;
  /// Empty for a sharp-interface evaluation.
  std::optional<double> epsilon;
  /// Deformed interface lengths per phase pair (full symmetric matrix).
  Eigen::MatrixXd pair_areas;
  std::map<std::string, double> diagnostics;
  /// +inf sentinel: some cell has det <= 0.
  bool infinite = false;
  std::optional<std::size_t> inverted_cell;

  bool sharp() const { return !epsilon.has_value(); }
};

/// First cell with det grad y <= 0, if any.
std::optional<std::size_t> first_inverted_cell(const DeformationField& def);
double min_cell_det(const DeformationField& def);

/// sum W(grad y, z_cell) * area with z_cell the corner average; +inf when a
/// cell is inverted.
double bulk_energy(const DeformationField& def, const PhaseField& z, const StoredEnergy& w);
/// Bulk energy with z_cell = p_label.
double bulk_energy(const DeformationField& def, const PhasePartition& part, const PhaseSystem& sys,
                   const StoredEnergy& w);

/// sum [(eps/2) |grad z (grad y)^{-1}|^2 + Phi(z_cell)/eps] det * area; +inf
/// when a cell is inverted.
double interface_energy_diffuse(const DeformationField& def, const PhaseField& z, double eps,
                                const PhaseSystem& sys);

/// 1/2 sum_{a != b} d_ab * deformed_perimeter(a, b).
double interface_energy_sharp(const DeformationField& def, const PhasePartition& part,
                              const DistanceMatrix& d);

struct LiminfDiagnostic {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = interface_energy_diffuse; rhs = sum max_a |grad phi_a(z)^T grad z
/// (grad y)^{-1}| det * area with the tabulated grad phi_a clipped to the
/// eikonal bound sqrt(2 Phi(z_cell)).
LiminfDiagnostic liminf_diagnostic(const DeformationField& def, const PhaseField& z, double eps,
                                   const PhaseSystem& sys, const WellDistanceTable& table);

/// Component i = sum z_i(cell) det * area.
PhaseVec mass_vector(const DeformationField& def, const PhaseField& z);
/// Mass of the sharp field z = p_label.
PhaseVec mass_vector(const DeformationField& def, const PhasePartition& part,
                     const PhaseSystem& sys);

/// Cellwise nearest well of the corner-averaged z in the d_Phi metric.
PhasePartition sharp_projection(const PhaseField& z, const WellDistanceTable& table);

/// Full diffuse report. With a table, adds the liminf pair and the pair
/// areas of the sharp projection.
EnergyReport diffuse_energy_report(const DeformationField& def, const PhaseField& z, double eps,
                                   const PhaseSystem& sys, const StoredEnergy& w,
                                   const WellDistanceTable* table = nullptr);

EnergyReport sharp_energy_report(const DeformationField& def, const PhasePartition& part,
                                 const PhaseSystem& sys, const StoredEnergy& w,
                                 const DistanceMatrix& d);

}  // namespace hypf
