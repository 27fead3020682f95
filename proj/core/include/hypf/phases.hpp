#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hypf/types.hpp"

namespace hypf {

/// Built-in multiwell potential families. All vanish exactly on the wells
/// and are strictly positive elsewhere.
enum class PotentialFamily {
  /// (z - p1)^2 (z - p2)^2 for exactly two wells; h = 1 with wells -1, 1
  /// gives the classic (1 - z^2)^2.
  DoubleWell,
  /// prod_a |z - p_a|^2.
  ProductOfSquares,
  /// 1/2 min_a k_a |z - p_a|^2 * (1 + delta sin(omega sum_i z_i)), delta < 1.
  PerturbedQuadraticWells,
};

std::string_view to_string(PotentialFamily f);
PotentialFamily potential_family_from_string(std::string_view name);

struct PerturbedQuadraticParams {
  double amplitude = 0.25;
  double frequency = 3.0;
  /// Per-well stiffness k_a; empty means all ones.
  std::vector<double> stiffness;
};

/// Wells p_1..p_m in R^h together with the potential Phi and the box radius
/// R bounding admissible phase values. Immutable after construction.
class PhaseSystem {
 public:
  PhaseSystem(PotentialFamily family, std::vector<PhaseVec> wells, double box_radius,
              PerturbedQuadraticParams perturbed = {});

  PotentialFamily family() const { return family_; }
  int components() const { return components_; }
  int well_count() const { return static_cast<int>(wells_.size()); }
  const PhaseVec& well(int a) const { return wells_.at(a); }
  const std::vector<PhaseVec>& wells() const { return wells_; }
  double box_radius() const { return box_radius_; }
  const PerturbedQuadraticParams& perturbed_params() const { return perturbed_; }

  /// Phi(z). Throws DomainError on non-finite input.
  double potential(const PhaseVec& z) const;
  PhaseVec potential_gradient(const PhaseVec& z) const;

  /// sqrt(2 Phi(z)), the metric density of d_Phi.
  double metric_density(const PhaseVec& z) const;

  /// Index of the Euclidean-nearest well (lowest index on ties).
  int nearest_well_euclidean(const PhaseVec& z) const;

 private:
  double potential_unchecked(const PhaseVec& z) const;

  PotentialFamily family_;
  std::vector<PhaseVec> wells_;
  double box_radius_;
  int components_;
  PerturbedQuadraticParams perturbed_;
};

/// Smallest sampled value of Phi over points at Euclidean distance at least
/// `exclusion` from every well, drawn uniformly from the box. Positive means
/// the sampled positivity invariant holds.
double min_potential_away_from_wells(const PhaseSystem& sys, double exclusion, int samples,
                                     unsigned seed);

}  // namespace hypf
