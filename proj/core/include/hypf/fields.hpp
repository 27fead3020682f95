#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hypf/types.hpp"

namespace hypf {

/// Uniform nx x ny cell grid on the reference rectangle (0, lx) x (0, ly).
/// Nodes are numbered row by row: node(i, j) = i + (nx + 1) j.
class Grid {
 public:
  Grid(int nx, int ny, double lx, double ly);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / nx_; }
  double hy() const { return ly_ / ny_; }
  double cell_area() const { return hx() * hy(); }

  std::size_t node_count() const { return std::size_t(nx_ + 1) * std::size_t(ny_ + 1); }
  std::size_t cell_count() const { return std::size_t(nx_) * std::size_t(ny_); }
  std::size_t node(int i, int j) const { return std::size_t(i) + std::size_t(nx_ + 1) * j; }
  std::size_t cell(int i, int j) const { return std::size_t(i) + std::size_t(nx_) * j; }
  int node_i(std::size_t n) const { return static_cast<int>(n % std::size_t(nx_ + 1)); }
  int node_j(std::size_t n) const { return static_cast<int>(n / std::size_t(nx_ + 1)); }
  int cell_i(std::size_t c) const { return static_cast<int>(c % std::size_t(nx_)); }
  int cell_j(std::size_t c) const { return static_cast<int>(c / std::size_t(nx_)); }

  Vec2 node_position(std::size_t n) const;
  Vec2 cell_center(std::size_t c) const;
  /// Corner nodes in the order (0,0), (1,0), (0,1), (1,1).
  std::array<std::size_t, 4> cell_nodes(std::size_t c) const;
  bool on_boundary(std::size_t n) const;
  /// Boundary nodes in counter-clockwise order, starting at the origin.
  std::vector<std::size_t> boundary_loop() const;

  /// Gradients of the four bilinear corner basis functions at the cell
  /// center, in cell_nodes() order.
  const std::array<Vec2, 4>& center_basis_gradients() const { return basis_; }

  bool operator==(const Grid& other) const;

 private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
  std::array<Vec2, 4> basis_;
};

/// Nodal deformation y with Dirichlet data y0 on flagged nodes. Flagged nodes
/// always hold their boundary value exactly.
class DeformationField {
 public:
  DeformationField(Grid grid, std::vector<Vec2> values, std::vector<std::uint8_t> dirichlet,
                   std::vector<Vec2> boundary_data);

  /// y = map(x) at every node, Dirichlet on the whole boundary.
  static DeformationField from_map(const Grid& grid, const std::function<Vec2(const Vec2&)>& map);
  /// Dirichlet data map(x) on the boundary; interior filled by transfinite
  /// bilinear (Coons) interpolation of the boundary values.
  static DeformationField interpolate_boundary(const Grid& grid,
                                               const std::function<Vec2(const Vec2&)>& map);

  const Grid& grid() const { return grid_; }
  const std::vector<Vec2>& values() const { return values_; }
  const Vec2& operator[](std::size_t n) const { return values_[n]; }
  bool is_dirichlet(std::size_t n) const { return dirichlet_[n] != 0; }
  const std::vector<std::uint8_t>& dirichlet_mask() const { return dirichlet_; }
  const std::vector<Vec2>& boundary_data() const { return boundary_; }

  /// Replaces all nodal values; flagged nodes are reset to their data.
  void assign(std::vector<Vec2> values);
  /// y <- y + step * direction on free nodes only.
  void advance(const std::vector<Vec2>& direction, double step);

 private:
  Grid grid_;
  std::vector<Vec2> values_;
  std::vector<std::uint8_t> dirichlet_;
  std::vector<Vec2> boundary_;
};

/// Nodal field z = zeta o y with values in R^h.
class PhaseField {
 public:
  PhaseField(Grid grid, int components);
  static PhaseField uniform(const Grid& grid, const PhaseVec& value);
  static PhaseField from_function(const Grid& grid, int components,
                                  const std::function<PhaseVec(const Vec2&)>& fn);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t node_count() const { return grid_.node_count(); }

  PhaseVec at(std::size_t n) const;
  void set(std::size_t n, const PhaseVec& v);
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Average of the four corner values of cell c.
  PhaseVec cell_average(std::size_t c) const;
  /// h x 2 bilinear gradient at the center of cell c.
  PhaseGrad cell_gradient(std::size_t c) const;

 private:
  Grid grid_;
  int components_;
  std::vector<double> data_;
};

/// Per-cell 2x2 matrices; each cell carries quadrature weight grid.cell_area().
struct TensorCellField {
  Grid grid;
  std::vector<Mat2> values;
};

/// Bilinear gradient of y at a cell center; F(k, l) = dy_k / dx_l.
Mat2 cell_deformation_gradient(const DeformationField& def, std::size_t c);

/// Cell-center gradients of y. Exact for affine y.
TensorCellField gradient(const DeformationField& def);

struct DetCof {
  std::vector<double> det;
  TensorCellField cof;
};
DetCof det_cof(const TensorCellField& g);

/// Determinants at or below this are treated as degenerate by distortion().
inline constexpr double kDegenerateDet = 1e-12;

struct Distortion {
  std::vector<double> k;
  double lq_norm = 0.0;
};

/// K_y = |grad y|_F^2 / det grad y where det > kDegenerateDet, else 1, and
/// (sum K^q * area)^(1/q). Frobenius norm throughout.
Distortion distortion(const DeformationField& def, double q);

struct CiarletNecasReport {
  /// int |det grad y| - area(image).
  double residual = 0.0;
  double det_integral = 0.0;
  double abs_det_integral = 0.0;
  double image_area = 0.0;
  double boundary_loop_area = 0.0;
  /// Warning: deformed boundary loop is not a simple polygon. image_area
  /// then falls back to the area of the union of deformed cells.
  bool boundary_self_intersects = false;
  std::size_t nonpositive_cells = 0;
};

/// Discrete check of int det grad y <= |y(Omega)| via the shoelace area of
/// the deformed boundary loop.
CiarletNecasReport ciarlet_necas_residual(const DeformationField& def);

/// Gradient of a vector test field psi: R^2 -> R^2, (k, l) = d psi_k / d x_l.
using TestFieldGradient = std::function<Mat2(const Vec2&)>;

/// sum_cells cof(grad y) : grad psi(center) * area. psi must vanish on the
/// two outermost cell layers (checked; throws InvalidArgument otherwise).
double piola_residual(const DeformationField& def, const TestFieldGradient& psi_gradient);

/// Compactly supported polynomial bump psi = (b, x1 b) with
/// b(x) = prod_d (4 s_d (1 - s_d))^order on the support rectangle.
struct PolynomialBump {
  double x0 = 0.25, x1 = 0.75, y0 = 0.25, y1 = 0.75;
  int order = 8;

  double value(const Vec2& x) const;
  Vec2 scalar_gradient(const Vec2& x) const;
  Mat2 gradient(const Vec2& x) const;
};

}  // namespace hypf
