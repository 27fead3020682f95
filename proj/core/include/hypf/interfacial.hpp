#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hypf/fields.hpp"

namespace hypf {

/// Discrete R^2-valued measure: one atom per grid node (its dual cell).
struct VectorMeasure {
  Grid grid;
  std::vector<Vec2> atoms;
};

/// Per-cell phase labels in [0, phase_count).
struct PhasePartition {
  Grid grid;
  int phase_count = 1;
  std::vector<int> labels;

  void validate() const;
  static PhasePartition from_function(const Grid& grid, int phase_count,
                                      const std::function<int(const Vec2&)>& label_at_center);
};

struct Rect {
  double x0, x1, y0, y1;
  bool contains(const Vec2& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
};

/// Discrete -div(g cof grad y): atom_i = sum_cells g cof(F) grad N_i * area,
/// so that sum g cof(F) : grad psi * area = sum psi_i . atom_i holds exactly
/// for every nodal psi in the bilinear space.
VectorMeasure interfacial_measure(const DeformationField& def, std::span<const double> g);

/// sum |atom| over all nodes, or over nodes inside `region`.
double total_variation(const VectorMeasure& mu, std::optional<Rect> region = std::nullopt);

/// sum |atom| over interior nodes (the support of test fields vanishing on
/// the boundary).
double interior_total_variation(const VectorMeasure& mu);

/// Deformed interface lengths: entry (a, b) sums |cof F nu| * edge length
/// over reference cell edges separating label a from label b. Symmetric,
/// zero diagonal.
Eigen::MatrixXd deformed_perimeter(const DeformationField& def, const PhasePartition& part);

struct PushforwardCheck {
  double tv_measure = 0.0;
  double direct_area = 0.0;
  double gap = 0.0;
};

/// Compares the interior total variation of p_{y,g} for a cell indicator g
/// with the length of the image under y of the indicator's boundary
/// polyline (interior edges only).
PushforwardCheck pushforward_equality_check(const DeformationField& def,
                                            std::span<const double> indicator);

}  // namespace hypf
