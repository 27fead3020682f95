#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "hypf/energy.hpp"

namespace hypf {

struct LineSearchRule {
  double backtracking = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 60;
  /// Trial min-cell det must stay above this fraction of the current one.
  double det_floor = 0.1;
};

struct MinimizeConfig {
  double epsilon = 0.05;
  int max_outer_iters = 200;
  int inner_iters_y = 3;
  int inner_iters_z = 3;
  double initial_step = 1.0;
  LineSearchRule rule;
  /// Stop once the relative decrease of one outer iteration drops below tol.
  double tol = 1e-8;
  double mass_penalty_weight = 0.0;
  std::vector<double> target_mass;
  std::uint64_t seed = 0;
  int stagnation_limit = 20;
  /// Phase-only descent with y held fixed.
  bool freeze_y = false;

  void validate(int components) const;
};

enum class Termination { Converged, MaxIterations, Stagnation };
std::string_view to_string(Termination t);

struct HistoryRow {
  int iter = 0;
  EnergyReport report;
  /// report.total plus the mass penalty; the quantity that decreases.
  double objective = 0.0;
  double step_y = 0.0;
  double step_z = 0.0;
  double min_det = 0.0;
};

struct MinimizerState {
  DeformationField def;
  PhaseField z;
  std::vector<HistoryRow> history;
  Termination reason = Termination::MaxIterations;
};

/// Discrete F_eps (plus optional mass penalty (w/2)|mass - M|^2) and its
/// gradients with respect to free node positions and nodal phase values.
class DiffuseObjective {
 public:
  DiffuseObjective(const PhaseSystem& sys, const StoredEnergy& w, double eps,
                   double mass_weight = 0.0, PhaseVec target_mass = {});

  const PhaseSystem& system() const { return sys_; }
  const StoredEnergy& stored_energy() const { return w_; }
  double epsilon() const { return eps_; }

  /// +inf if any cell is inverted.
  double value(const DeformationField& def, const PhaseField& z) const;
  double penalty(const DeformationField& def, const PhaseField& z) const;

  /// d/dy, zero on Dirichlet nodes. Requires all det > 0.
  std::vector<Vec2> gradient_y(const DeformationField& def, const PhaseField& z) const;
  /// d/dz, node-major like PhaseField::data().
  std::vector<double> gradient_z(const DeformationField& def, const PhaseField& z) const;

 private:
  template <typename CellFn>
  void for_cells(const DeformationField& def, const PhaseField& z, CellFn&& fn) const;

  const PhaseSystem& sys_;
  const StoredEnergy& w_;
  double eps_;
  double mass_weight_;
  PhaseVec target_;
};

/// Nodewise radial projection onto |z| <= R. Idempotent.
PhaseField project_phase(const PhaseField& z, double radius);

/// Backtracks from `step` until the trial y + t d keeps min det above
/// det_floor * current min det and satisfies Armijo decrease relative to
/// `energy` with directional derivative `slope`. Returns the accepted t, or 0
/// on failure. A zero direction accepts the full step.
double safeguarded_step_y(const DiffuseObjective& obj, const DeformationField& def,
                          const PhaseField& z, const std::vector<Vec2>& direction, double step,
                          const LineSearchRule& rule, double energy, double slope,
                          double* accepted_energy = nullptr);

using IterateObserver = std::function<void(const DeformationField&, const PhaseField&)>;

/// Alternating projected descent on y (Dirichlet nodes frozen) and z (ball
/// |z| <= R). Throws InvalidArgument on an infeasible initial state.
MinimizerState minimize_eps(const MinimizeConfig& cfg, const PhaseSystem& sys,
                            const StoredEnergy& w, const DeformationField& init_def,
                            const PhaseField& init_z, const IterateObserver& observer = {});

enum class InitPattern { Stripes, Random };
std::string_view to_string(InitPattern p);
InitPattern init_pattern_from_string(std::string_view name);

/// Well assignment by pattern plus uniform noise of the given amplitude,
/// projected to the box. Stripes cycle the wells along x1; Random assigns a
/// random well per 4x4-node block.
PhaseField initial_phase(const Grid& grid, const PhaseSystem& sys, InitPattern pattern,
                         std::uint64_t seed, double noise = 0.05, int stripes = 2);

}  // namespace hypf
