#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hypf/fields.hpp"

namespace hypf {

inline constexpr std::uint32_t kFieldFormatVersion = 1;

/// Nodal data in the binary container: header (magic "HYPF", version, nx,
/// ny, lx, ly, component count, deformation component count) followed by
/// row-major little-endian f64 values, node-major.
struct NodalRecord {
  Grid grid{1, 1, 1.0, 1.0};
  int components = 0;
  /// 2 when the first two components are the deformation y, else 0.
  int deformation_components = 0;
  std::vector<double> data;
};

void write_field(std::ostream& out, const NodalRecord& rec);
NodalRecord read_field(std::istream& in);
void write_field(const std::filesystem::path& path, const NodalRecord& rec);
NodalRecord read_field(const std::filesystem::path& path);

/// (y, z) packed as components [y1, y2, z_1..z_h].
NodalRecord pack_state(const DeformationField& def, const PhaseField& z);
NodalRecord pack_phase(const PhaseField& z);
/// Deformation from the record, Dirichlet on the whole boundary.
DeformationField unpack_deformation(const NodalRecord& rec);
PhaseField unpack_phase(const NodalRecord& rec);

/// CSV with `precision` significant digits.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, int precision = 9);

}  // namespace hypf
