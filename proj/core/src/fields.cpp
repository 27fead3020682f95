#include "hypf/fields.hpp"

#include <algorithm>
#include <cmath>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "hypf/reduce.hpp"

namespace hypf {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false>;  // counter-clockwise
using BgMulti = bg::model::multi_polygon<BgPolygon>;

Grid::Grid(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2 cells per direction");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw InvalidArgument("grid side lengths must be positive and finite");
  }
  const double gx = 0.5 / hx();
  const double gy = 0.5 / hy();
  basis_ = {Vec2(-gx, -gy), Vec2(gx, -gy), Vec2(-gx, gy), Vec2(gx, gy)};
}

Vec2 Grid::node_position(std::size_t n) const {
  return {hx() * node_i(n), hy() * node_j(n)};
}

Vec2 Grid::cell_center(std::size_t c) const {
  return {hx() * (cell_i(c) + 0.5), hy() * (cell_j(c) + 0.5)};
}

std::array<std::size_t, 4> Grid::cell_nodes(std::size_t c) const {
  const int i = cell_i(c);
  const int j = cell_j(c);
  return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
}

bool Grid::on_boundary(std::size_t n) const {
  const int i = node_i(n);
  const int j = node_j(n);
  return i == 0 || j == 0 || i == nx_ || j == ny_;
}

std::vector<std::size_t> Grid::boundary_loop() const {
  std::vector<std::size_t> loop;
  loop.reserve(2 * (nx_ + ny_));
  for (int i = 0; i < nx_; ++i) loop.push_back(node(i, 0));
  for (int j = 0; j < ny_; ++j) loop.push_back(node(nx_, j));
  for (int i = nx_; i > 0; --i) loop.push_back(node(i, ny_));
  for (int j = ny_; j > 0; --j) loop.push_back(node(0, j));
  return loop;
}

bool Grid::operator==(const Grid& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && lx_ == o.lx_ && ly_ == o.ly_;
}

DeformationField::DeformationField(Grid grid, std::vector<Vec2> values,
                                   std::vector<std::uint8_t> dirichlet,
                                   std::vector<Vec2> boundary_data)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      dirichlet_(std::move(dirichlet)),
      boundary_(std::move(boundary_data)) {
  const std::size_t n = grid_.node_count();
  if (values_.size() != n || dirichlet_.size() != n || boundary_.size() != n) {
    throw InvalidArgument("deformation field arrays must have one entry per node");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dirichlet_[i]) values_[i] = boundary_[i];
  }
}

DeformationField DeformationField::from_map(const Grid& grid,
                                            const std::function<Vec2(const Vec2&)>& map) {
  const std::size_t n = grid.node_count();
  std::vector<Vec2> values(n);
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = map(grid.node_position(i));
    mask[i] = grid.on_boundary(i) ? 1 : 0;
  }
  return DeformationField(grid, values, mask, values);
}

DeformationField DeformationField::interpolate_boundary(
    const Grid& grid, const std::function<Vec2(const Vec2&)>& map) {
  const std::size_t n = grid.node_count();
  std::vector<Vec2> values(n);
  std::vector<std::uint8_t> mask(n, 0);
  const int nx = grid.nx();
  const int ny = grid.ny();
  auto at = [&](int i, int j) { return map(grid.node_position(grid.node(i, j))); };
  const Vec2 c00 = at(0, 0), c10 = at(nx, 0), c01 = at(0, ny), c11 = at(nx, ny);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double u = double(i) / nx;
      const double v = double(j) / ny;
      const Vec2 coons = (1 - v) * at(i, 0) + v * at(i, ny) + (1 - u) * at(0, j) + u * at(nx, j) -
                         ((1 - u) * (1 - v) * c00 + u * (1 - v) * c10 + (1 - u) * v * c01 +
                          u * v * c11);
      const std::size_t node = grid.node(i, j);
      mask[node] = grid.on_boundary(node) ? 1 : 0;
      values[node] = mask[node] ? at(i, j) : coons;
    }
  }
  std::vector<Vec2> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = mask[i] ? values[i] : Vec2::Zero();
  return DeformationField(grid, values, mask, data);
}

void DeformationField::assign(std::vector<Vec2> values) {
  if (values.size() != values_.size()) {
    throw InvalidArgument("assign: node count mismatch");
  }
  values_ = std::move(values);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (dirichlet_[i]) values_[i] = boundary_[i];
  }
}

void DeformationField::advance(const std::vector<Vec2>& direction, double step) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!dirichlet_[i]) values_[i] += step * direction[i];
  }
}

PhaseField::PhaseField(Grid grid, int components)
    : grid_(std::move(grid)), components_(components) {
  if (components < 1 || components > kMaxComponents) {
    throw InvalidArgument("phase field component count out of range");
  }
  data_.assign(grid_.node_count() * std::size_t(components_), 0.0);
}

PhaseField PhaseField::uniform(const Grid& grid, const PhaseVec& value) {
  PhaseField z(grid, static_cast<int>(value.size()));
  for (std::size_t n = 0; n < z.node_count(); ++n) z.set(n, value);
  return z;
}

PhaseField PhaseField::from_function(const Grid& grid, int components,
                                     const std::function<PhaseVec(const Vec2&)>& fn) {
  PhaseField z(grid, components);
  for (std::size_t n = 0; n < z.node_count(); ++n) z.set(n, fn(grid.node_position(n)));
  return z;
}

PhaseVec PhaseField::at(std::size_t n) const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data() + n * components_, components_);
}

void PhaseField::set(std::size_t n, const PhaseVec& v) {
  if (v.size() != components_) throw InvalidArgument("phase value has wrong dimension");
  Eigen::Map<Eigen::VectorXd>(data_.data() + n * components_, components_) = v;
}

PhaseVec PhaseField::cell_average(std::size_t c) const {
  const auto nodes = grid_.cell_nodes(c);
  PhaseVec s = PhaseVec::Zero(components_);
  for (auto n : nodes) s += at(n);
  return 0.25 * s;
}

PhaseGrad PhaseField::cell_gradient(std::size_t c) const {
  const auto nodes = grid_.cell_nodes(c);
  const auto& basis = grid_.center_basis_gradients();
  PhaseGrad g = PhaseGrad::Zero(components_, 2);
  for (int k = 0; k < 4; ++k) g += at(nodes[k]) * basis[k].transpose();
  return g;
}

Mat2 cell_deformation_gradient(const DeformationField& def, std::size_t c) {
  const auto& grid = def.grid();
  const auto nodes = grid.cell_nodes(c);
  const auto& basis = grid.center_basis_gradients();
  Mat2 f = Mat2::Zero();
  for (int k = 0; k < 4; ++k) f += def[nodes[k]] * basis[k].transpose();
  return f;
}

TensorCellField gradient(const DeformationField& def) {
  TensorCellField out{def.grid(), std::vector<Mat2>(def.grid().cell_count())};
  parallel_for(out.values.size(),
               [&](std::size_t c) { out.values[c] = cell_deformation_gradient(def, c); });
  return out;
}

DetCof det_cof(const TensorCellField& g) {
  DetCof out{std::vector<double>(g.values.size()),
             TensorCellField{g.grid, std::vector<Mat2>(g.values.size())}};
  for (std::size_t c = 0; c < g.values.size(); ++c) {
    out.det[c] = g.values[c].determinant();
    out.cof.values[c] = cofactor(g.values[c]);
  }
  return out;
}

Distortion distortion(const DeformationField& def, double q) {
  if (!(q > 1.0)) throw InvalidArgument("distortion exponent q must exceed n - 1 = 1");
  const auto grads = gradient(def);
  Distortion out;
  out.k.resize(grads.values.size());
  for (std::size_t c = 0; c < grads.values.size(); ++c) {
    const Mat2& f = grads.values[c];
    const double det = f.determinant();
    out.k[c] = det > kDegenerateDet ? f.squaredNorm() / det : 1.0;
  }
  const double area = def.grid().cell_area();
  const double integral =
      deterministic_sum(out.k.size(), [&](std::size_t c) { return std::pow(out.k[c], q) * area; });
  out.lq_norm = std::pow(integral, 1.0 / q);
  return out;
}

namespace {

double union_of_cells_area(const DeformationField& def) {
  const auto& grid = def.grid();
  std::vector<BgMulti> layer;
  layer.reserve(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto n = grid.cell_nodes(c);
    BgPolygon poly;
    for (std::size_t k : {n[0], n[1], n[3], n[2], n[0]}) {
      bg::append(poly.outer(), BgPoint(def[k].x(), def[k].y()));
    }
    bg::correct(poly);
    BgMulti m;
    if (std::abs(bg::area(poly)) > 0.0) m.push_back(poly);
    layer.push_back(std::move(m));
  }
  // Pairwise tree merge keeps intermediate polygons small.
  while (layer.size() > 1) {
    std::vector<BgMulti> next;
    next.reserve((layer.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      BgMulti merged;
      bg::union_(layer[i], layer[i + 1], merged);
      next.push_back(std::move(merged));
    }
    if (layer.size() % 2 == 1) next.push_back(std::move(layer.back()));
    layer.swap(next);
  }
  return layer.empty() ? 0.0 : bg::area(layer.front());
}

}  // namespace

CiarletNecasReport ciarlet_necas_residual(const DeformationField& def) {
  const auto& grid = def.grid();
  CiarletNecasReport out;
  const double area = grid.cell_area();
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double det = cell_deformation_gradient(def, c).determinant();
    out.det_integral += det * area;
    out.abs_det_integral += std::abs(det) * area;
    if (det <= 0.0) ++out.nonpositive_cells;
  }
  const auto loop = grid.boundary_loop();
  double shoelace = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Vec2& a = def[loop[k]];
    const Vec2& b = def[loop[(k + 1) % loop.size()]];
    shoelace += a.x() * b.y() - b.x() * a.y();
  }
  out.boundary_loop_area = 0.5 * shoelace;

  BgPolygon ring;
  for (std::size_t k : loop) bg::append(ring.outer(), BgPoint(def[k].x(), def[k].y()));
  bg::append(ring.outer(), BgPoint(def[loop.front()].x(), def[loop.front()].y()));
  bg::correct(ring);
  out.boundary_self_intersects = !bg::is_valid(ring) || !bg::is_simple(ring);
  out.image_area =
      out.boundary_self_intersects ? union_of_cells_area(def) : std::abs(out.boundary_loop_area);
  out.residual = out.abs_det_integral - out.image_area;
  return out;
}

double piola_residual(const DeformationField& def, const TestFieldGradient& psi_gradient) {
  const auto& grid = def.grid();
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const int i = grid.cell_i(c);
    const int j = grid.cell_j(c);
    const bool margin = i < 2 || j < 2 || i >= grid.nx() - 2 || j >= grid.ny() - 2;
    if (margin && psi_gradient(grid.cell_center(c)).squaredNorm() != 0.0) {
      throw InvalidArgument("piola_residual: test field must vanish on a two-cell margin");
    }
  }
  const double area = grid.cell_area();
  return deterministic_sum(grid.cell_count(), [&](std::size_t c) {
    const Mat2 cof = cofactor(cell_deformation_gradient(def, c));
    return cof.cwiseProduct(psi_gradient(grid.cell_center(c))).sum() * area;
  });
}

double PolynomialBump::value(const Vec2& x) const {
  const double s = (x.x() - x0) / (x1 - x0);
  const double t = (x.y() - y0) / (y1 - y0);
  if (s <= 0.0 || s >= 1.0 || t <= 0.0 || t >= 1.0) return 0.0;
  return std::pow(4.0 * s * (1.0 - s), order) * std::pow(4.0 * t * (1.0 - t), order);
}

Vec2 PolynomialBump::scalar_gradient(const Vec2& x) const {
  const double s = (x.x() - x0) / (x1 - x0);
  const double t = (x.y() - y0) / (y1 - y0);
  if (s <= 0.0 || s >= 1.0 || t <= 0.0 || t >= 1.0) return Vec2::Zero();
  const double bs = std::pow(4.0 * s * (1.0 - s), order);
  const double bt = std::pow(4.0 * t * (1.0 - t), order);
  const double dbs = order * std::pow(4.0 * s * (1.0 - s), order - 1) * 4.0 * (1.0 - 2.0 * s) / (x1 - x0);
  const double dbt = order * std::pow(4.0 * t * (1.0 - t), order - 1) * 4.0 * (1.0 - 2.0 * t) / (y1 - y0);
  return {dbs * bt, bs * dbt};
}

Mat2 PolynomialBump::gradient(const Vec2& x) const {
  const Vec2 g = scalar_gradient(x);
  Mat2 out;
  out.row(0) = g.transpose();
  out.row(1) = x.x() * g.transpose();
  out(1, 0) += value(x);
  return out;
}

}  // namespace hypf
