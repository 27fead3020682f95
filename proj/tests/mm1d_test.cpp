#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hypf/mm1d.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace hypf;
using hypf::test::kDoubleWellDistance;
using hypf::test::mat;
using hypf::test::scalar;

namespace {

const GeodesicSolver& double_well_solver() {
  static const GeodesicSolver solver(cli::classic_double_well());
  return solver;
}

}  // namespace

TEST(Profile, DefaultSampling) {
  EXPECT_EQ(default_profile_samples(0.05, 1.0), 801);
  const auto p = optimal_profile(double_well_solver(), 0, 1, 0.1, 1.0);
  EXPECT_NEAR(p.spacing(), 0.1 / 20, 1e-15);
}

TEST(Profile, FunctionalVanishesOnAConstantWell) {
  const auto& sys = double_well_solver().system();
  const std::vector<PhaseVec> flat(11, scalar(1.0));
  EXPECT_EQ(profile_functional(sys, flat, 0.1, 0.01), 0.0);
}

TEST(Profile, EnergyAboveAndCloseToTheDistance) {
  const auto p = optimal_profile(double_well_solver(), 0, 1, 0.05, 1.0);
  EXPECT_GE(p.energy, 1.88562);
  EXPECT_LE(p.energy, 1.90);
  EXPECT_NEAR(p.energy, p.gradient_energy + p.potential_energy, 1e-12);
  EXPECT_EQ(p.samples.front()(0), -1.0);
  EXPECT_EQ(p.samples.back()(0), 1.0);
}

TEST(Profile, Equipartition) {
  const auto p = optimal_profile(double_well_solver(), 0, 1, 0.025, 1.0);
  EXPECT_LT(std::abs(p.gradient_energy - p.potential_energy) / p.energy, 0.02);
}

TEST(Profile, ClassicTanhShape) {
  // eps g' = sqrt(2) (1 - g^2) gives tanh(sqrt(2) s / eps).
  const double eps = 0.05;
  const auto p = optimal_profile(double_well_solver(), 0, 1, eps, 1.0);
  for (double s = -0.3; s <= 0.3; s += 0.01) EXPECT_NEAR(p.at(s)(0), std::tanh(std::sqrt(2.0) * s / eps), 2e-3) << s;
}

TEST(Profile, EpsilonScaling) {
  const auto fine = optimal_profile(double_well_solver(), 0, 1, 0.025, 1.0);
  const auto coarse = optimal_profile(double_well_solver(), 0, 1, 0.05, 2.0);
  EXPECT_NEAR(fine.energy / coarse.energy, 1.0, 0.01);
  for (double s = -0.2; s <= 0.2; s += 0.02) EXPECT_NEAR(fine.at(s)(0), coarse.at(2 * s)(0), 1e-3);
}

TEST(Profile, RejectsDegenerateInput) {
  EXPECT_THROW(optimal_profile(double_well_solver(), 1, 1, 0.05, 1.0), InvalidArgument);
  EXPECT_THROW(optimal_profile(double_well_solver(), 0, 1, 0.05, 0.4), InvalidArgument);
  EXPECT_THROW(optimal_profile(double_well_solver(), 0, 1, -0.05, 1.0), InvalidArgument);
  EXPECT_THROW(optimal_profile(double_well_solver(), 0, 5, 0.05, 1.0), InvalidArgument);
}

TEST(Profile, PlanarWellsFollowTheGeodesic) {
  const GeodesicSolver solver(PhaseSystem(PotentialFamily::ProductOfSquares,
                                          {hypf::test::vec({1, 0}), hypf::test::vec({0, 1}), hypf::test::vec({0, 0})}, 1.5));
  const auto d = phase_distance_matrix(solver);
  const auto p = optimal_profile(solver, 0, 1, 0.05, 0.5);
  EXPECT_GE(p.energy, d(0, 1) - 5e-3);
  EXPECT_LE(p.energy, 1.02 * d(0, 1));
}

TEST(RecoveryRadius, CoversWellsAndGeodesics) {
  EXPECT_GE(recovery_radius_bound(double_well_solver()), 1.0);
  EXPECT_LE(recovery_radius_bound(double_well_solver()), 1.0 + 1e-9);
}

TEST(Recovery, HugeEpsilonIsStillFeasible) {
  const Grid g(16, 16, 1.0, 1.0);
  const auto part = cli::vertical_stripe(g, 0.5);
  const auto z = recovery_sequence_2d(cli::identity_deformation(g), part, 2.0, double_well_solver());
  const double e = interface_energy_diffuse(cli::identity_deformation(g), z, 2.0, double_well_solver().system());
  EXPECT_TRUE(std::isfinite(e));
}

TEST(Recovery, FarFieldIsExactlyTheWell) {
  const Grid g(64, 8, 1.0, 0.125);
  const auto part = cli::vertical_stripe(g, 0.5);
  const double eps = 1.0 / 64;
  const auto z = recovery_sequence_2d(cli::identity_deformation(g), part, eps, double_well_solver());
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const double x = g.node_position(n).x();
    if (x < 0.5 - 5.5 * eps) EXPECT_EQ(z.at(n)(0), -1.0);
    if (x > 0.5 + 5.5 * eps) EXPECT_EQ(z.at(n)(0), 1.0);
  }
}

TEST(Recovery, VerticalInterfaceEnergy) {
  const Grid g(256, 256, 1.0, 1.0);
  const double eps = 1.0 / 64;
  const auto z = recovery_sequence_2d(cli::identity_deformation(g), cli::vertical_stripe(g, 0.5), eps, double_well_solver());
  const double e = interface_energy_diffuse(cli::identity_deformation(g), z, eps, double_well_solver().system());
  EXPECT_NEAR(e / kDoubleWellDistance, 1.0, 0.05);
}

TEST(Recovery, StretchedHorizontalInterface) {
  const Grid g(256, 256, 1.0, 1.0);
  const double eps = 1.0 / 16;  // about five reference cells per eps after the stretch
  const auto def = cli::affine_deformation(g, mat(1, 0, 0, 3));
  const auto part = cli::horizontal_stripe(g, 0.5);
  const auto z = recovery_sequence_2d(def, part, eps, double_well_solver());
  const double length = deformed_perimeter(def, part)(0, 1);
  EXPECT_NEAR(length, 1.0, 1e-12);
  const double e = interface_energy_diffuse(def, z, eps, double_well_solver().system());
  EXPECT_NEAR(e / (kDoubleWellDistance * length), 1.0, 0.05);
}

TEST(GammaSweep, SinglePhaseHasNoInterface) {
  const auto solver = GeodesicSolver(cli::two_variant_double_well());
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  const Grid g(16, 16, 1.0, 1.0);
  SweepScenario sc{"single", cli::identity_deformation(g),
                   PhasePartition::from_function(g, 2, [](const Vec2&) { return 0; }),
                   {0.2, 0.1},
                   1,
                   false};
  const auto rows = gamma_sweep(sc, solver, w);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.failed) << r.status;
    EXPECT_TRUE(std::isnan(r.f_eps_min));
    EXPECT_NEAR(r.f_eps_recovery, r.bulk, 1e-12);
    EXPECT_NEAR(r.f0_sharp, r.bulk, 1e-12);
    EXPECT_EQ(r.interface, 0.0);
    EXPECT_NEAR(r.bulk, 2.0, 1e-12);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "epsilon,F_eps_min,F_eps_recovery,F0_sharp,bulk,interface,mass_error,restarts_used,wall_time_s,status");
}

TEST(GammaSweep, MinimizedNeverAboveRecovery) {
  const auto solver = GeodesicSolver(cli::two_variant_double_well());
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  const Grid g(16, 16, 1.0, 1.0);
  SweepScenario sc{"stripe", cli::identity_deformation(g), cli::vertical_stripe(g, 0.5), {0.25, 0.125}, 1, true};
  sc.minimize_cfg.max_outer_iters = 30;
  const auto rows = gamma_sweep(sc, solver, w);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.failed) << r.status;
    EXPECT_LE(r.f_eps_min, r.f_eps_recovery + 1e-12);
  }
}
