#include "hypf/interfacial.hpp"

#include <cmath>

namespace hypf {

void PhasePartition::validate() const {
  if (labels.size() != grid.cell_count()) {
    throw InvalidArgument("partition needs one label per cell");
  }
  for (int l : labels) {
    if (l < 0 || l >= phase_count) throw InvalidArgument("partition label out of range");
  }
}

PhasePartition PhasePartition::from_function(const Grid& grid, int phase_count,
                                             const std::function<int(const Vec2&)>& label_at_center) {
  PhasePartition part{grid, phase_count, std::vector<int>(grid.cell_count())};
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    part.labels[c] = label_at_center(grid.cell_center(c));
  }
  part.validate();
  return part;
}

VectorMeasure interfacial_measure(const DeformationField& def, std::span<const double> g) {
  const auto& grid = def.grid();
  if (g.size() != grid.cell_count()) throw InvalidArgument("g must have one value per cell");
  VectorMeasure mu{grid, std::vector<Vec2>(grid.node_count(), Vec2::Zero())};
  const auto& basis = grid.center_basis_gradients();
  const double area = grid.cell_area();
  // Serial accumulation in cell order keeps the result bit-reproducible.
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (g[c] == 0.0) continue;
    const Mat2 cof = cofactor(cell_deformation_gradient(def, c));
    const auto nodes = grid.cell_nodes(c);
    for (int k = 0; k < 4; ++k) {
      mu.atoms[nodes[k]] += g[c] * area * (cof * basis[k]);
    }
  }
  return mu;
}

double total_variation(const VectorMeasure& mu, std::optional<Rect> region) {
  double tv = 0.0;
  for (std::size_t n = 0; n < mu.atoms.size(); ++n) {
    if (region && !region->contains(mu.grid.node_position(n))) continue;
    tv += mu.atoms[n].norm();
  }
  return tv;
}

double interior_total_variation(const VectorMeasure& mu) {
  double tv = 0.0;
  for (std::size_t n = 0; n < mu.atoms.size(); ++n) {
    if (!mu.grid.on_boundary(n)) tv += mu.atoms[n].norm();
  }
  return tv;
}

namespace {

// Nanson factor |cof F nu| * length for the reference edge from node a to
// node b. Only the tangential column of F enters cof F nu, and along an edge
// the bilinear map is affine, so that column is (y_b - y_a) / length.
double edge_image_length(const DeformationField& def, std::size_t a, std::size_t b) {
  const Vec2 ref = def.grid().node_position(b) - def.grid().node_position(a);
  const double len = ref.norm();
  const Vec2 tangent = ref / len;
  const Vec2 normal(tangent.y(), -tangent.x());
  // Any F with F tangent = (y_b - y_a)/len; pick the normal column zero.
  const Mat2 f = ((def[b] - def[a]) / len) * tangent.transpose();
  // cof F nu for rank-one F of this form; cof is linear in 2-D.
  return (cofactor(f) * normal).norm() * len;
}

template <typename Visit>
void for_each_interior_edge(const Grid& grid, Visit&& visit) {
  // Vertical edges between cell (i, j) and (i + 1, j).
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i + 1 < grid.nx(); ++i) {
      visit(grid.cell(i, j), grid.cell(i + 1, j), grid.node(i + 1, j), grid.node(i + 1, j + 1));
    }
  }
  // Horizontal edges between cell (i, j) and (i, j + 1).
  for (int j = 0; j + 1 < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      visit(grid.cell(i, j), grid.cell(i, j + 1), grid.node(i, j + 1), grid.node(i + 1, j + 1));
    }
  }
}

}  // namespace

Eigen::MatrixXd deformed_perimeter(const DeformationField& def, const PhasePartition& part) {
  part.validate();
  if (!(part.grid == def.grid())) throw InvalidArgument("partition and deformation grids differ");
  Eigen::MatrixXd areas = Eigen::MatrixXd::Zero(part.phase_count, part.phase_count);
  for_each_interior_edge(def.grid(), [&](std::size_t c0, std::size_t c1, std::size_t a,
                                         std::size_t b) {
    const int l0 = part.labels[c0];
    const int l1 = part.labels[c1];
    if (l0 == l1) return;
    const double len = edge_image_length(def, a, b);
    areas(l0, l1) += len;
    areas(l1, l0) += len;
  });
  return areas;
}

PushforwardCheck pushforward_equality_check(const DeformationField& def,
                                            std::span<const double> indicator) {
  PushforwardCheck out;
  out.tv_measure = interior_total_variation(interfacial_measure(def, indicator));
  for_each_interior_edge(def.grid(), [&](std::size_t c0, std::size_t c1, std::size_t a,
                                         std::size_t b) {
    if ((indicator[c0] != 0.0) != (indicator[c1] != 0.0)) {
      out.direct_area += (def[b] - def[a]).norm();
    }
  });
  out.gap = std::abs(out.tv_measure - out.direct_area);
  return out;
}

}  // namespace hypf
