#include "hypf/energy.hpp"

#include <algorithm>
#include <cmath>

#include "hypf/reduce.hpp"

namespace hypf {

namespace {

void check_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidArgument("fields live on different grids");
}

void check_components(const PhaseField& z, int h) {
  if (z.components() != h) throw InvalidArgument("phase field has the wrong component count");
}

struct InterfaceParts {
  double gradient = 0.0;
  double potential = 0.0;
};

}  // namespace

std::optional<std::size_t> first_inverted_cell(const DeformationField& def) {
  for (std::size_t c = 0; c < def.grid().cell_count(); ++c) {
    if (!(cell_deformation_gradient(def, c).determinant() > 0.0)) return c;
  }
  return std::nullopt;
}

double min_cell_det(const DeformationField& def) {
  double m = kInfinity;
  for (std::size_t c = 0; c < def.grid().cell_count(); ++c) {
    m = std::min(m, cell_deformation_gradient(def, c).determinant());
  }
  return m;
}

double bulk_energy(const DeformationField& def, const PhaseField& z, const StoredEnergy& w) {
  check_same_grid(def.grid(), z.grid());
  check_components(z, w.components());
  if (first_inverted_cell(def)) return kInfinity;
  const double area = def.grid().cell_area();
  return deterministic_sum(def.grid().cell_count(), [&](std::size_t c) {
    return w.eval(cell_deformation_gradient(def, c), z.cell_average(c)) * area;
  });
}

double bulk_energy(const DeformationField& def, const PhasePartition& part, const PhaseSystem& sys,
                   const StoredEnergy& w) {
  check_same_grid(def.grid(), part.grid);
  part.validate();
  if (sys.components() != w.components()) throw InvalidArgument("component count mismatch");
  if (first_inverted_cell(def)) return kInfinity;
  const double area = def.grid().cell_area();
  return deterministic_sum(def.grid().cell_count(), [&](std::size_t c) {
    return w.eval(cell_deformation_gradient(def, c), sys.well(part.labels[c])) * area;
  });
}

static InterfaceParts interface_parts(const DeformationField& def, const PhaseField& z, double eps,
                                      const PhaseSystem& sys) {
  const auto n = def.grid().cell_count();
  const double area = def.grid().cell_area();
  std::vector<double> grad_terms(n);
  std::vector<double> pot_terms(n);
  parallel_for(n, [&](std::size_t c) {
    const Mat2 f = cell_deformation_gradient(def, c);
    const double det = f.determinant();
    const PhaseGrad m = z.cell_gradient(c) * f.inverse();
    grad_terms[c] = 0.5 * eps * m.squaredNorm() * det * area;
    pot_terms[c] = sys.potential(z.cell_average(c)) / eps * det * area;
  });
  InterfaceParts parts;
  parts.gradient = deterministic_sum(n, [&](std::size_t c) { return grad_terms[c]; });
  parts.potential = deterministic_sum(n, [&](std::size_t c) { return pot_terms[c]; });
  return parts;
}

double interface_energy_diffuse(const DeformationField& def, const PhaseField& z, double eps,
                                const PhaseSystem& sys) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be positive");
  check_same_grid(def.grid(), z.grid());
  check_components(z, sys.components());
  if (first_inverted_cell(def)) return kInfinity;
  const auto parts = interface_parts(def, z, eps, sys);
  return parts.gradient + parts.potential;
}

double interface_energy_sharp(const DeformationField& def, const PhasePartition& part,
                              const DistanceMatrix& d) {
  if (d.size() < part.phase_count) throw InvalidArgument("distance matrix too small for partition");
  const Eigen::MatrixXd areas = deformed_perimeter(def, part);
  double e = 0.0;
  for (int a = 0; a < part.phase_count; ++a) {
    for (int b = 0; b < part.phase_count; ++b) {
      if (a != b) e += 0.5 * d(a, b) * areas(a, b);
    }
  }
  return e;
}

LiminfDiagnostic liminf_diagnostic(const DeformationField& def, const PhaseField& z, double eps,
                                   const PhaseSystem& sys, const WellDistanceTable& table) {
  LiminfDiagnostic out;
  out.lhs = interface_energy_diffuse(def, z, eps, sys);
  if (!std::isfinite(out.lhs)) {
    out.rhs = kInfinity;
    return out;
  }
  const double area = def.grid().cell_area();
  out.rhs = deterministic_sum(def.grid().cell_count(), [&](std::size_t c) {
    const Mat2 f = cell_deformation_gradient(def, c);
    const PhaseGrad m = z.cell_gradient(c) * f.inverse();
    const PhaseVec zc = z.cell_average(c);
    const double bound = sys.metric_density(zc);
    double best = 0.0;
    for (int a = 0; a < table.well_count(); ++a) {
      PhaseVec g = table.gradient(a, zc);
      const double gn = g.norm();
      if (gn > bound) g *= bound / gn;
      best = std::max(best, (g.transpose() * m).norm());
    }
    return best * f.determinant() * area;
  });
  return out;
}

PhaseVec mass_vector(const DeformationField& def, const PhaseField& z) {
  check_same_grid(def.grid(), z.grid());
  const int h = z.components();
  const double area = def.grid().cell_area();
  PhaseVec mass(h);
  for (int i = 0; i < h; ++i) {
    mass[i] = deterministic_sum(def.grid().cell_count(), [&](std::size_t c) {
      return z.cell_average(c)[i] * cell_deformation_gradient(def, c).determinant() * area;
    });
  }
  return mass;
}

PhaseVec mass_vector(const DeformationField& def, const PhasePartition& part,
                     const PhaseSystem& sys) {
  check_same_grid(def.grid(), part.grid);
  part.validate();
  const int h = sys.components();
  const double area = def.grid().cell_area();
  PhaseVec mass(h);
  for (int i = 0; i < h; ++i) {
    mass[i] = deterministic_sum(def.grid().cell_count(), [&](std::size_t c) {
      return sys.well(part.labels[c])[i] * cell_deformation_gradient(def, c).determinant() * area;
    });
  }
  return mass;
}

PhasePartition sharp_projection(const PhaseField& z, const WellDistanceTable& table) {
  const Grid& grid = z.grid();
  PhasePartition part{grid, table.well_count(), std::vector<int>(grid.cell_count())};
  parallel_for(grid.cell_count(),
               [&](std::size_t c) { part.labels[c] = table.nearest_well(z.cell_average(c)); });
  return part;
}

static EnergyReport infinite_report(std::size_t cell) {
  EnergyReport r;
  r.bulk = kInfinity;
  r.total = kInfinity;
  r.infinite = true;
  r.inverted_cell = cell;
  return r;
}

static void add_geometry_diagnostics(const DeformationField& def, EnergyReport& r) {
  r.diagnostics["min_det"] = min_cell_det(def);
  const auto dist = distortion(def, 2.0);
  r.diagnostics["distortion_l2"] = dist.lq_norm;
  r.diagnostics["anisotropic_cells"] = static_cast<double>(
      std::count_if(dist.k.begin(), dist.k.end(), [](double k) { return k > kAnisotropyFlag; }));
}

EnergyReport diffuse_energy_report(const DeformationField& def, const PhaseField& z, double eps,
                                   const PhaseSystem& sys, const StoredEnergy& w,
                                   const WellDistanceTable* table) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be positive");
  check_same_grid(def.grid(), z.grid());
  check_components(z, sys.components());
  if (auto bad = first_inverted_cell(def)) {
    auto r = infinite_report(*bad);
    r.epsilon = eps;
    return r;
  }
  EnergyReport r;
  r.epsilon = eps;
  r.bulk = bulk_energy(def, z, w);
  const auto parts = interface_parts(def, z, eps, sys);
  r.interface = parts.gradient + parts.potential;
  r.total = r.bulk + r.interface;
  r.diagnostics["interface_gradient"] = parts.gradient;
  r.diagnostics["interface_potential"] = parts.potential;
  r.diagnostics["equipartition_ratio"] =
      r.interface > 0.0 ? std::abs(parts.gradient - parts.potential) / r.interface : 0.0;
  const PhaseVec mass = mass_vector(def, z);
  for (int i = 0; i < mass.size(); ++i) r.diagnostics["mass_" + std::to_string(i)] = mass[i];
  add_geometry_diagnostics(def, r);
  if (table != nullptr) {
    const auto lim = liminf_diagnostic(def, z, eps, sys, *table);
    r.diagnostics["liminf_lhs"] = lim.lhs;
    r.diagnostics["liminf_rhs"] = lim.rhs;
    r.pair_areas = deformed_perimeter(def, sharp_projection(z, *table));
  }
  return r;
}

EnergyReport sharp_energy_report(const DeformationField& def, const PhasePartition& part,
                                 const PhaseSystem& sys, const StoredEnergy& w,
                                 const DistanceMatrix& d) {
  check_same_grid(def.grid(), part.grid);
  if (auto bad = first_inverted_cell(def)) return infinite_report(*bad);
  EnergyReport r;
  r.bulk = bulk_energy(def, part, sys, w);
  r.pair_areas = deformed_perimeter(def, part);
  r.interface = interface_energy_sharp(def, part, d);
  r.total = r.bulk + r.interface;
  const PhaseVec mass = mass_vector(def, part, sys);
  for (int i = 0; i < mass.size(); ++i) r.diagnostics["mass_" + std::to_string(i)] = mass[i];
  add_geometry_diagnostics(def, r);
  return r;
}

}  // namespace hypf
