#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hypf/geodesic.hpp"
#include "hypf/phases.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace hypf;
using hypf::test::kDoubleWellDistance;
using hypf::test::kSqrt2;
using hypf::test::scalar;
using hypf::test::vec;

namespace {

PhaseSystem collinear_three_wells() {
  return PhaseSystem(PotentialFamily::ProductOfSquares, {scalar(0.0), scalar(1.0), scalar(2.0)}, 3.0);
}

PhaseSystem plane_three_wells() {
  return PhaseSystem(PotentialFamily::ProductOfSquares, {vec({1, 0}), vec({0, 1}), vec({0, 0})}, 1.5);
}

// Composite Simpson rule for the 1-D geodesic length int sqrt(2 Phi).
double simpson_length(const PhaseSystem& sys, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * sys.metric_density(scalar(a + i * h));
  }
  return s * h / 3.0;
}

}  // namespace

TEST(Potential, DoubleWellClosedForm) {
  const auto sys = cli::classic_double_well();
  EXPECT_EQ(sys.potential(scalar(1.0)), 0.0);
  EXPECT_EQ(sys.potential(scalar(-1.0)), 0.0);
  EXPECT_DOUBLE_EQ(sys.potential(scalar(0.0)), 1.0);
  EXPECT_DOUBLE_EQ(sys.potential(scalar(0.5)), std::pow(1.0 - 0.25, 2));
}

TEST(Potential, VanishesOnWellsInThePlane) {
  const auto sys = plane_three_wells();
  for (int a = 0; a < sys.well_count(); ++a) EXPECT_EQ(sys.potential(sys.well(a)), 0.0);
  EXPECT_GT(sys.potential(vec({0.5, 0.5})), 0.0);
}

TEST(Potential, PerturbedFamilyIsPositiveAwayFromWells) {
  const PhaseSystem sys(PotentialFamily::PerturbedQuadraticWells, {vec({1, 0}), vec({0, 1}), vec({0, 0})}, 1.5);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(sys.potential(sys.well(a)), 0.0);
  EXPECT_GT(min_potential_away_from_wells(sys, 0.05, 5000, 3), 0.0);
}

TEST(Potential, GradientMatchesFiniteDifferences) {
  const auto sys = plane_three_wells();
  const PhaseVec z = vec({0.3, -0.2});
  const PhaseVec g = sys.potential_gradient(z);
  for (int i = 0; i < 2; ++i) {
    PhaseVec zp = z, zm = z;
    zp(i) += 1e-6;
    zm(i) -= 1e-6;
    EXPECT_NEAR(g(i), (sys.potential(zp) - sys.potential(zm)) / 2e-6, 1e-7);
  }
}

TEST(Potential, RejectsNonFiniteInput) {
  const auto sys = cli::classic_double_well();
  EXPECT_THROW(sys.potential(scalar(std::numeric_limits<double>::quiet_NaN())), DomainError);
}

TEST(PhaseSystem, RejectsInvalidConstruction) {
  EXPECT_THROW(PhaseSystem(PotentialFamily::DoubleWell, {scalar(0), scalar(1), scalar(2)}, 3.0), InvalidArgument);
  EXPECT_THROW(PhaseSystem(PotentialFamily::DoubleWell, {scalar(-1), scalar(1)}, 0.5), InvalidArgument);
  EXPECT_THROW(PhaseSystem(PotentialFamily::ProductOfSquares, {scalar(1), scalar(1)}, 2.0), InvalidArgument);
  EXPECT_THROW(PhaseSystem(PotentialFamily::ProductOfSquares, {scalar(0), vec({1, 0})}, 2.0), InvalidArgument);
}

TEST(PhaseSystem, FamilyNamesRoundTrip) {
  for (auto f : {PotentialFamily::DoubleWell, PotentialFamily::ProductOfSquares,
                 PotentialFamily::PerturbedQuadraticWells}) {
    EXPECT_EQ(potential_family_from_string(to_string(f)), f);
  }
  EXPECT_THROW(potential_family_from_string("quartic"), InvalidArgument);
}

TEST(Geodesic, ZeroLengthPath) {
  const GeodesicSolver solver(cli::classic_double_well());
  EXPECT_EQ(solver.distance(scalar(-1.0), scalar(-1.0)), 0.0);
}

TEST(Geodesic, DoubleWellClosedForms) {
  const GeodesicSolver solver(cli::classic_double_well());
  EXPECT_NEAR(solver.distance(scalar(-1.0), scalar(1.0)), kDoubleWellDistance, 1e-3);
  EXPECT_NEAR(solver.distance(scalar(0.0), scalar(1.0)), 2.0 * kSqrt2 / 3.0, 1e-3);
}

TEST(Geodesic, RefinementNeverIncreasesTheLatticeLength) {
  const GeodesicSolver solver(plane_three_wells());
  const auto path = solver.solve(vec({1, 0}), vec({0, 1}));
  EXPECT_LE(path.distance, path.lattice_distance);
  EXPECT_NEAR(path.distance, solver.path_functional(path.nodes), 1e-9 * path.distance + 1e-12);
}

TEST(Geodesic, RejectsPointsOutsideTheBox) {
  const GeodesicSolver solver(cli::classic_double_well());
  EXPECT_THROW(solver.distance(scalar(-1.0), scalar(3.0)), DomainError);
}

TEST(DistanceMatrix, DoubleWellEntries) {
  const auto d = phase_distance_matrix(GeodesicSolver(cli::classic_double_well()));
  ASSERT_EQ(d.size(), 2);
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_EQ(d(1, 1), 0.0);
  EXPECT_NEAR(d(0, 1), kDoubleWellDistance, 1e-3);
  EXPECT_EQ(d(0, 1), d(1, 0));
}

TEST(DistanceMatrix, CollinearWellsConcatenate) {
  const auto sys = collinear_three_wells();
  const auto d = phase_distance_matrix(GeodesicSolver(sys));
  // Oracle: int_0^1 sqrt(2) z (1 - z)(2 - z) dz = sqrt(2) / 4, likewise on [1, 2].
  EXPECT_NEAR(simpson_length(sys, 0.0, 1.0), kSqrt2 / 4.0, 1e-10);
  EXPECT_NEAR(d(0, 1), kSqrt2 / 4.0, 1e-3);
  EXPECT_NEAR(d(1, 2), kSqrt2 / 4.0, 1e-3);
  EXPECT_NEAR(d(0, 2), d(0, 1) + d(1, 2), 1e-3);
}

TEST(DistanceMatrix, NoTriangleViolations) {
  for (const auto& sys : {collinear_three_wells(), plane_three_wells()}) {
    const auto d = phase_distance_matrix(GeodesicSolver(sys));
    EXPECT_TRUE(check_triangle(d, 1e-9).empty());
    for (int a = 0; a < d.size(); ++a) EXPECT_EQ(d(a, a), 0.0);
  }
}

TEST(DistanceMatrix, MetricClosureRepairsAViolation) {
  DistanceMatrix d{Eigen::MatrixXd(3, 3)};
  d.d << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  apply_metric_closure(d);
  EXPECT_EQ(d(0, 2), 2.0);
  EXPECT_TRUE(check_triangle(d, 0.0).empty());
}

TEST(CheckTriangle, Examples) {
  DistanceMatrix two{Eigen::MatrixXd(2, 2)};
  two.d << 0, 1, 1, 0;
  EXPECT_TRUE(check_triangle(two, 1e-9).empty());

  DistanceMatrix bad{Eigen::MatrixXd(3, 3)};
  bad.d << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  const auto v = check_triangle(bad, 1e-9);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (std::array<int, 3>{0, 1, 2}));
  EXPECT_EQ(v[1], (std::array<int, 3>{2, 1, 0}));
}

TEST(WellDistance, Examples) {
  const GeodesicSolver solver(cli::classic_double_well());
  const auto d = phase_distance_matrix(solver);
  EXPECT_NEAR(well_distance(solver, 0, scalar(-1.0)), 0.0, 1e-12);
  EXPECT_NEAR(well_distance(solver, 0, scalar(0.0)), 2.0 * kSqrt2 / 3.0, 1e-3);
  EXPECT_NEAR(well_distance(solver, 0, scalar(1.0)), d(0, 1), 1e-6);
}

TEST(WellDistanceTable, LipschitzInThePhiMetric) {
  const auto sys = plane_three_wells();
  const GeodesicSolver solver(sys);
  const WellDistanceTable table(solver);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> node(0, solver.lattice_size() - 1);
  // Graph-metric bias of the 16-neighbour stencil stays below 3%; the
  // absolute slack covers O(spacing) differences next to the wells.
  double worst = -kInfinity;
  for (int k = 0; k < 2000; ++k) {
    const PhaseVec z = solver.lattice_point(node(rng));
    const double density = sys.metric_density(z);
    for (int a = 0; a < 3; ++a) worst = std::max(worst, table.gradient(a, z).norm() - 1.03 * density);
  }
  EXPECT_LE(worst, 0.02);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(table.nearest_well(sys.well(a)), a);
}
