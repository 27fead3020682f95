#include "hypf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hypf/reduce.hpp"

namespace hypf {

void MinimizeConfig::validate(int components) const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive(epsilon, "epsilon");
  positive(initial_step, "initial_step");
  positive(tol, "tol");
  if (max_outer_iters < 1 || inner_iters_y < 0 || inner_iters_z < 0 || stagnation_limit < 1) {
    throw InvalidArgument("iteration counts must be positive");
  }
  if (!(rule.backtracking > 0.0 && rule.backtracking < 1.0)) {
    throw InvalidArgument("backtracking factor must lie in (0, 1)");
  }
  if (!(rule.sufficient_decrease > 0.0 && rule.sufficient_decrease < 1.0)) {
    throw InvalidArgument("sufficient decrease constant must lie in (0, 1)");
  }
  if (!(rule.det_floor > 0.0 && rule.det_floor < 1.0)) {
    throw InvalidArgument("det_floor must lie in (0, 1)");
  }
  if (rule.max_backtracks < 1) throw InvalidArgument("max_backtracks must be positive");
  if (mass_penalty_weight < 0.0 || !std::isfinite(mass_penalty_weight)) {
    throw InvalidArgument("mass_penalty_weight must be non-negative");
  }
  if (mass_penalty_weight > 0.0 && static_cast<int>(target_mass.size()) != components) {
    throw InvalidArgument("target_mass needs one entry per phase component");
  }
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::Stagnation: return "stagnation";
  }
  return "unknown";
}

DiffuseObjective::DiffuseObjective(const PhaseSystem& sys, const StoredEnergy& w, double eps,
                                   double mass_weight, PhaseVec target_mass)
    : sys_(sys), w_(w), eps_(eps), mass_weight_(mass_weight), target_(std::move(target_mass)) {
  if (sys.components() != w.components()) throw InvalidArgument("component count mismatch");
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (mass_weight_ > 0.0 && target_.size() != sys.components()) {
    throw InvalidArgument("target mass has the wrong size");
  }
}

double DiffuseObjective::penalty(const DeformationField& def, const PhaseField& z) const {
  if (mass_weight_ == 0.0) return 0.0;
  return 0.5 * mass_weight_ * (mass_vector(def, z) - target_).squaredNorm();
}

double DiffuseObjective::value(const DeformationField& def, const PhaseField& z) const {
  const double bulk = bulk_energy(def, z, w_);
  if (!std::isfinite(bulk)) return kInfinity;
  return bulk + interface_energy_diffuse(def, z, eps_, sys_) + penalty(def, z);
}

namespace {

struct CellTerms {
  Mat2 dF;          // dE_c / dF
  PhaseVec dzc;     // dE_c / dz_cell
  PhaseGrad dG;     // dE_c / d grad z
};

}  // namespace

template <typename CellFn>
void DiffuseObjective::for_cells(const DeformationField& def, const PhaseField& z,
                                 CellFn&& fn) const {
  const Grid& grid = def.grid();
  if (!(grid == z.grid())) throw InvalidArgument("fields live on different grids");
  if (auto bad = first_inverted_cell(def)) {
    throw DomainError("gradient requested at an inverted cell " + std::to_string(*bad));
  }
  PhaseVec residual = PhaseVec::Zero(sys_.components());
  if (mass_weight_ > 0.0) residual = mass_weight_ * (mass_vector(def, z) - target_);
  const double area = grid.cell_area();
  const std::size_t n = grid.cell_count();
  std::vector<CellTerms> terms(n);
  parallel_for(n, [&](std::size_t c) {
    const Mat2 f = cell_deformation_gradient(def, c);
    const double det = f.determinant();
    const Mat2 b = f.inverse();
    const PhaseVec zc = z.cell_average(c);
    const PhaseGrad m = z.cell_gradient(c) * b;
    const double density = 0.5 * eps_ * m.squaredNorm() + sys_.potential(zc) / eps_;
    const double mass_coupling = mass_weight_ > 0.0 ? residual.dot(zc) : 0.0;
    CellTerms& t = terms[c];
    t.dF = area * (w_.dW_dF(f, zc) - eps_ * det * (m.transpose() * m) * b.transpose() +
                   (density + mass_coupling) * det * b.transpose());
    t.dzc = area * (w_.dW_dz(f, zc) + det * sys_.potential_gradient(zc) / eps_ + det * residual);
    t.dG = area * eps_ * det * m * b.transpose();
  });
  // Scatter in cell order so the result does not depend on the thread count.
  const auto& basis = grid.center_basis_gradients();
  for (std::size_t c = 0; c < n; ++c) {
    const auto nodes = grid.cell_nodes(c);
    for (int k = 0; k < 4; ++k) fn(nodes[k], terms[c], basis[k]);
  }
}

std::vector<Vec2> DiffuseObjective::gradient_y(const DeformationField& def,
                                               const PhaseField& z) const {
  std::vector<Vec2> g(def.grid().node_count(), Vec2::Zero());
  for_cells(def, z, [&](std::size_t node, const CellTerms& t, const Vec2& dn) {
    g[node] += t.dF * dn;
  });
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (def.is_dirichlet(n)) g[n].setZero();
  }
  return g;
}

std::vector<double> DiffuseObjective::gradient_z(const DeformationField& def,
                                                 const PhaseField& z) const {
  const int h = z.components();
  std::vector<double> g(z.data().size(), 0.0);
  for_cells(def, z, [&](std::size_t node, const CellTerms& t, const Vec2& dn) {
    const PhaseVec contrib = 0.25 * t.dzc + t.dG * dn;
    for (int i = 0; i < h; ++i) g[node * h + i] += contrib[i];
  });
  return g;
}

PhaseField project_phase(const PhaseField& z, double radius) {
  PhaseField out = z;
  const int h = z.components();
  auto& data = out.data();
  for (std::size_t n = 0; n < z.node_count(); ++n) {
    double norm2 = 0.0;
    for (int i = 0; i < h; ++i) norm2 += data[n * h + i] * data[n * h + i];
    const double norm = std::sqrt(norm2);
    if (norm > radius) {
      // Shrink until the rounded result is inside, so projection is idempotent.
      double s = radius / norm;
      for (;;) {
        double scaled2 = 0.0;
        for (int i = 0; i < h; ++i) scaled2 += (data[n * h + i] * s) * (data[n * h + i] * s);
        if (std::sqrt(scaled2) <= radius) break;
        s = std::nextafter(s, 0.0);
      }
      for (int i = 0; i < h; ++i) data[n * h + i] *= s;
    }
  }
  return out;
}

double safeguarded_step_y(const DiffuseObjective& obj, const DeformationField& def,
                          const PhaseField& z, const std::vector<Vec2>& direction, double step,
                          const LineSearchRule& rule, double energy, double slope,
                          double* accepted_energy) {
  const bool zero = std::all_of(direction.begin(), direction.end(),
                                [](const Vec2& d) { return d.isZero(0.0); });
  if (zero) {
    if (accepted_energy) *accepted_energy = energy;
    return step;
  }
  const double floor = rule.det_floor * min_cell_det(def);
  double t = step;
  for (int k = 0; k < rule.max_backtracks; ++k, t *= rule.backtracking) {
    DeformationField trial = def;
    trial.advance(direction, t);
    if (!(min_cell_det(trial) >= floor)) continue;
    const double e = obj.value(trial, z);
    if (e <= energy + rule.sufficient_decrease * t * slope && e <= energy) {
      if (accepted_energy) *accepted_energy = e;
      return t;
    }
  }
  return 0.0;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_phase_norm(const PhaseField& z) {
  double m = 0.0;
  for (std::size_t n = 0; n < z.node_count(); ++n) m = std::max(m, z.at(n).norm());
  return m;
}

}  // namespace

MinimizerState minimize_eps(const MinimizeConfig& cfg, const PhaseSystem& sys,
                            const StoredEnergy& w, const DeformationField& init_def,
                            const PhaseField& init_z, const IterateObserver& observer) {
  cfg.validate(sys.components());
  if (!(init_def.grid() == init_z.grid())) throw InvalidArgument("fields live on different grids");
  if (init_z.components() != sys.components()) throw InvalidArgument("phase component mismatch");
  if (auto bad = first_inverted_cell(init_def)) {
    throw InvalidArgument("infeasible initialization: cell " + std::to_string(*bad) +
                          " has det <= 0");
  }
  const double radius = sys.box_radius();
  if (max_phase_norm(init_z) > radius + 1e-12) {
    throw InvalidArgument("infeasible initialization: |z| exceeds the box radius");
  }
  PhaseVec target;
  if (cfg.mass_penalty_weight > 0.0) {
    target = Eigen::Map<const Eigen::VectorXd>(cfg.target_mass.data(),
                                               static_cast<Eigen::Index>(cfg.target_mass.size()));
  }
  const DiffuseObjective obj(sys, w, cfg.epsilon, cfg.mass_penalty_weight, target);

  MinimizerState state{init_def, init_z, {}, Termination::MaxIterations};
  double energy = obj.value(state.def, state.z);
  auto record = [&](int iter, double sy, double sz) {
    HistoryRow row;
    row.iter = iter;
    row.report = diffuse_energy_report(state.def, state.z, cfg.epsilon, sys, w);
    row.objective = energy;
    row.step_y = sy;
    row.step_z = sz;
    row.min_det = min_cell_det(state.def);
    if (cfg.mass_penalty_weight > 0.0) row.report.diagnostics["mass_penalty"] = energy - row.report.total;
    state.history.push_back(std::move(row));
    if (observer) observer(state.def, state.z);
  };
  record(0, 0.0, 0.0);

  double ty = cfg.initial_step;
  double tz = cfg.initial_step;
  int failures = 0;
  const auto& rule = cfg.rule;
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    const double start = energy;
    double sy = 0.0;
    double sz = 0.0;

    for (int k = 0; k < (cfg.freeze_y ? 0 : cfg.inner_iters_y); ++k) {
      std::vector<Vec2> dir = obj.gradient_y(state.def, state.z);
      double slope = 0.0;
      for (auto& d : dir) {
        slope -= d.squaredNorm();
        d = -d;
      }
      if (slope == 0.0) break;
      double accepted = energy;
      const double t =
          safeguarded_step_y(obj, state.def, state.z, dir, 2.0 * ty, rule, energy, slope, &accepted);
      if (t == 0.0) {
        ++failures;
        break;
      }
      failures = 0;
      ty = t;
      sy = t;
      state.def.advance(dir, t);
      energy = accepted;
    }

    for (int k = 0; k < cfg.inner_iters_z; ++k) {
      const std::vector<double> g = obj.gradient_z(state.def, state.z);
      if (dot(g, g) == 0.0) break;
      double t = 2.0 * tz;
      bool ok = false;
      for (int b = 0; b < rule.max_backtracks; ++b, t *= rule.backtracking) {
        PhaseField trial = state.z;
        auto& data = trial.data();
        for (std::size_t i = 0; i < data.size(); ++i) data[i] -= t * g[i];
        trial = project_phase(trial, radius);
        double slope = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
          slope += g[i] * (trial.data()[i] - state.z.data()[i]);
        }
        const double e = obj.value(state.def, trial);
        if (e <= energy + rule.sufficient_decrease * slope && e <= energy) {
          state.z = std::move(trial);
          energy = e;
          ok = true;
          break;
        }
      }
      if (!ok) {
        ++failures;
        break;
      }
      failures = 0;
      tz = t;
      sz = t;
    }

    record(iter, sy, sz);
    if (failures >= cfg.stagnation_limit) {
      state.reason = Termination::Stagnation;
      break;
    }
    const double rel = (start - energy) / std::max(std::abs(start), 1e-300);
    if (rel < cfg.tol) {
      state.reason = Termination::Converged;
      break;
    }
  }
  return state;
}

std::string_view to_string(InitPattern p) {
  return p == InitPattern::Stripes ? "stripes" : "random";
}

InitPattern init_pattern_from_string(std::string_view name) {
  if (name == "stripes") return InitPattern::Stripes;
  if (name == "random") return InitPattern::Random;
  throw InvalidArgument("unknown initialization pattern '" + std::string(name) + "'");
}

PhaseField initial_phase(const Grid& grid, const PhaseSystem& sys, InitPattern pattern,
                         std::uint64_t seed, double noise, int stripes) {
  if (stripes < 1) throw InvalidArgument("stripe count must be positive");
  if (noise < 0.0) throw InvalidArgument("noise amplitude must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::uniform_int_distribution<int> pick(0, sys.well_count() - 1);
  constexpr int kBlock = 4;
  const int bx = grid.nx() / kBlock + 1;
  const int by = grid.ny() / kBlock + 1;
  std::vector<int> blocks(std::size_t(bx) * by);
  for (auto& b : blocks) b = pick(rng);

  const int h = sys.components();
  PhaseField z(grid, h);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    int well = 0;
    if (pattern == InitPattern::Stripes) {
      const double s = grid.node_position(n).x() / grid.lx();
      well = std::min(static_cast<int>(s * stripes), stripes - 1) % sys.well_count();
    } else {
      well = blocks[std::size_t(grid.node_i(n) / kBlock) + std::size_t(bx) * (grid.node_j(n) / kBlock)];
    }
    PhaseVec v = sys.well(well);
    for (int i = 0; i < h; ++i) v[i] += jitter(rng);
    z.set(n, v);
  }
  return project_phase(z, sys.box_radius());
}

}  // namespace hypf
