#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hypf/energy.hpp"
#include "hypf/geodesic.hpp"
#include "hypf/optimize.hpp"

namespace hypf {

/// Sampled transition profile from p_alpha at s = -L to p_beta at s = L.
struct Profile1D {
  int alpha = 0;
  int beta = 1;
  double epsilon = 0.0;
  double half_width = 0.0;
  std::vector<PhaseVec> samples;
  double energy = 0.0;
  double gradient_energy = 0.0;
  double potential_energy = 0.0;

  double spacing() const { return 2.0 * half_width / static_cast<double>(samples.size() - 1); }
  /// Linear interpolation; clamped to the end values outside [-L, L].
  PhaseVec at(double s) const;
};

/// Samples giving a spacing of epsilon / 20.
int default_profile_samples(double eps, double half_width);

/// Discrete 1-D Modica-Mortola functional
///   sum_k (eps / 2) |g_{k+1} - g_k|^2 / ds + (ds / eps) int_0^1 Phi(segment)
/// with the segment integral by 5-point Gauss-Legendre.
double profile_functional(const PhaseSystem& sys, const std::vector<PhaseVec>& samples, double eps,
                          double ds, double* gradient_part = nullptr,
                          double* potential_part = nullptr);

/// Minimizes profile_functional with clamped end values by damped Newton,
/// starting from the refined geodesic reparametrized by equipartition.
/// n_samples = 0 selects default_profile_samples.
Profile1D optimal_profile(const GeodesicSolver& solver, int alpha, int beta, double eps,
                          double half_width, int n_samples = 0);

/// max(max_a |p_a|, max |g| over the computed geodesics between wells).
double recovery_radius_bound(const GeodesicSolver& solver);

/// z at each node from the optimal profile of the adjacent phase pair at the
/// signed deformed distance to the nearest interface edge; exactly the well
/// value beyond 5 eps.
PhaseField recovery_sequence_2d(const DeformationField& def, const PhasePartition& part, double eps,
                                const GeodesicSolver& solver);

struct SweepScenario {
  std::string name = "sweep";
  DeformationField def;
  /// Interface geometry for the recovery sequence. Empty: use the sharp
  /// projection of the best minimizer.
  std::optional<PhasePartition> partition;
  std::vector<double> epsilons;
  int restarts = 3;
  bool minimize = true;
  InitPattern pattern = InitPattern::Stripes;
  MinimizeConfig minimize_cfg;
};

struct SweepRow {
  double epsilon = 0.0;
  /// NaN when minimization is disabled.
  double f_eps_min = 0.0;
  double f_eps_recovery = 0.0;
  double f0_sharp = 0.0;
  double bulk = 0.0;
  double interface = 0.0;
  double mass_error = 0.0;
  int restarts_used = 0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string status = "ok";
};

/// For each eps: best-of-restarts minimization plus a warm start from the
/// recovery field (so minimized <= recovery), the recovery energy and the
/// sharp energy of the partition. Failed rows are marked, never thrown.
/// `observer` sees every minimizer iterate.
std::vector<SweepRow> gamma_sweep(const SweepScenario& scenario, const GeodesicSolver& solver,
                                  const StoredEnergy& w, const IterateObserver& observer = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace hypf
