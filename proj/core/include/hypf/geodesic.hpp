#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hypf/phases.hpp"

namespace hypf {

struct GeodesicOptions {
  /// Lattice points per axis over [-R, R]^h.
  int lattice_points = 201;
  /// Polyline nodes used by path refinement.
  int path_nodes = 128;
  int refine_steps = 200;
  /// Refinement stops once the relative decrease of one step drops below this.
  double refine_rel_tol = 1e-8;
};

struct GeodesicPath {
  /// min(refined, lattice); never larger than lattice_distance.
  double distance = 0.0;
  /// Path functional of the raw Dijkstra polyline (endpoints attached).
  double lattice_distance = 0.0;
  double refined_distance = 0.0;
  std::vector<PhaseVec> nodes;
};

/// Approximates d_Phi(a, b) = inf int sqrt(2 Phi(g)) |g'| by Dijkstra on a
/// lattice over [-R, R]^h followed by projected-gradient refinement of the
/// resulting polyline. Supports h <= 3.
class GeodesicSolver {
 public:
  explicit GeodesicSolver(PhaseSystem sys, GeodesicOptions options = {});

  const PhaseSystem& system() const { return sys_; }
  const GeodesicOptions& options() const { return options_; }

  GeodesicPath solve(const PhaseVec& a, const PhaseVec& b) const;
  double distance(const PhaseVec& a, const PhaseVec& b) const { return solve(a, b).distance; }

  /// Single-source lattice distances from `source` to every lattice node.
  std::vector<double> distance_field(const PhaseVec& source) const;

  /// Discretized path functional: sum |g_{i+1} - g_i| times the 3-point
  /// Gauss average of sqrt(2 Phi) along the segment.
  double path_functional(std::span<const PhaseVec> path) const;

  std::size_t lattice_size() const { return lattice_size_; }
  double spacing() const { return spacing_; }
  PhaseVec lattice_point(std::size_t index) const;

 private:
  std::size_t nearest_node(const PhaseVec& z) const;
  std::vector<std::size_t> lattice_path(std::size_t from, std::size_t to) const;
  std::vector<PhaseVec> refine(std::vector<PhaseVec> path) const;
  void check_point(const PhaseVec& z, const char* what) const;

  struct Offset {
    std::array<int, 3> step{};
    double length = 0.0;
  };

  PhaseSystem sys_;
  GeodesicOptions options_;
  int dim_;
  double spacing_;
  std::size_t lattice_size_;
  std::vector<Offset> offsets_;
};

/// Symmetric matrix of surface tensions d_ab = d_Phi(p_a, p_b).
struct DistanceMatrix {
  Eigen::MatrixXd d;

  int size() const { return static_cast<int>(d.rows()); }
  double operator()(int a, int b) const { return d(a, b); }
};

/// Pairwise well distances. Each entry averages both solve directions; the
/// diagonal is exactly zero. With `metric_closure`, an entry is replaced by a
/// shorter concatenation through an intermediate well when one exists (that
/// concatenated path is itself admissible). Pairs run on the worker pool.
DistanceMatrix phase_distance_matrix(const GeodesicSolver& solver, bool metric_closure = true);

/// Replaces each entry by the shortest chain through intermediate wells
/// (Floyd-Warshall).
void apply_metric_closure(DistanceMatrix& dist);

/// Every (a, b, c) with d(a, c) - d(a, b) - d(b, c) > tol, 0-based.
std::vector<std::array<int, 3>> check_triangle(const DistanceMatrix& d, double tol);

/// phi_a(z) = d_Phi(p_a, z) by a refined single-pair solve.
double well_distance(const GeodesicSolver& solver, int well, const PhaseVec& z);

/// Lattice tabulation of every phi_a with multilinear interpolation.
/// Gradients are central differences on the lattice, interpolated the same
/// way.
class WellDistanceTable {
 public:
  explicit WellDistanceTable(const GeodesicSolver& solver);

  int well_count() const { return static_cast<int>(values_.size()); }
  double value(int well, const PhaseVec& z) const;
  PhaseVec gradient(int well, const PhaseVec& z) const;

  /// Nearest well in the d_Phi metric, lowest index on ties.
  int nearest_well(const PhaseVec& z) const;

 private:
  template <typename Fn>
  void interpolate(const PhaseVec& z, Fn&& visit) const;

  int dim_;
  int points_;
  double radius_;
  double spacing_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<PhaseVec>> gradients_;
};

}  // namespace hypf
