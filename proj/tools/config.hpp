#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypf/geodesic.hpp"
#include "hypf/optimize.hpp"
#include "hypf/phases.hpp"
#include "hypf/stored_energy.hpp"

namespace hypf::cli {

using json = nlohmann::json;

/// Schema violation; the message names the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhasesConfig {
  PotentialFamily family = PotentialFamily::DoubleWell;
  // z is the volume fraction of the first variant in the mixture.
  std::vector<std::vector<double>> wells{{1.0}, {0.0}};
  double box_radius = 1.5;
  int lattice = 201;
  PerturbedQuadraticParams perturbed;
};

struct GridConfig {
  int nx = 64;
  int ny = 64;
  double lx = 1.0;
  double ly = 1.0;
};

struct BoundaryConfig {
  /// identity | affine | shear
  std::string type = "identity";
  Mat2 matrix = Mat2::Identity();
  Vec2 offset = Vec2::Zero();
  double amount = 0.0;
};

struct MinimizeSection {
  MinimizeConfig cfg;
  /// stripes | random | file
  std::string init = "stripes";
  std::string init_file;
  int stripes = 2;
  double noise = 0.05;
};

struct SweepConfig {
  std::vector<double> epsilons{0.125, 0.0625, 0.03125};
  /// checkerboard | stripe | minimized
  std::string scenario = "stripe";
  int restarts = 3;
  bool minimize = true;
  double profile_half_width = 2.0;
};

struct OutputConfig {
  std::string directory = "hypf-out";
  std::vector<std::string> formats{"csv", "json"};
  int checkpoint_every = 0;
};

struct ExperimentConfig {
  PhasesConfig phases;
  StoredEnergySpec stored;
  GridConfig grid;
  BoundaryConfig boundary;
  MinimizeSection minimize;
  SweepConfig sweep;
  OutputConfig output;

  PhaseSystem phase_system() const;
  GeodesicSolver solver() const;
  StoredEnergy stored_energy() const { return StoredEnergy(stored); }
  Grid make_grid() const { return Grid(grid.nx, grid.ny, grid.lx, grid.ly); }
  /// Boundary map on the whole boundary, interior by transfinite
  /// interpolation (exact for affine data).
  DeformationField boundary_deformation() const;
  bool wants(const std::string& format) const;
};

/// Validates against the schema (unknown keys rejected) and fills defaults.
ExperimentConfig parse_config(const json& doc);
/// Reads and parses a config file; parse errors carry line and column.
ExperimentConfig load_config(const std::filesystem::path& path);
/// The fully resolved config, defaults included.
json to_json(const ExperimentConfig& cfg);

}  // namespace hypf::cli
