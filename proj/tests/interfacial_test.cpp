#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hypf/interfacial.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace hypf;
using hypf::test::mat;

namespace {

std::vector<double> indicator(const Grid& g, const std::function<bool(const Vec2&)>& inside) {
  std::vector<double> out(g.cell_count());
  for (std::size_t c = 0; c < g.cell_count(); ++c) out[c] = inside(g.cell_center(c)) ? 1.0 : 0.0;
  return out;
}

std::vector<double> left_half(const Grid& g) {
  return indicator(g, [&](const Vec2& x) { return x.x() < 0.5 * g.lx(); });
}

}  // namespace

TEST(InterfacialMeasure, ConstantWeightUnderAffineMapHasNoInteriorAtoms) {
  const Grid g(12, 10, 1.0, 1.0);
  const auto def = cli::affine_deformation(g, mat(1.4, 0.3, -0.2, 0.9));
  const std::vector<double> ones(g.cell_count(), 2.5);
  EXPECT_LT(interior_total_variation(interfacial_measure(def, ones)), 1e-12);
}

TEST(InterfacialMeasure, DualityWithNodalTestFields) {
  std::mt19937_64 rng(6);
  const Grid g(9, 7, 1.0, 0.8);
  const auto st = hypf::test::smooth_state(g, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> weight(g.cell_count());
  for (auto& v : weight) v = u(rng);
  std::vector<Vec2> psi(g.node_count());
  for (auto& v : psi) v = Vec2(u(rng), u(rng));
  const auto mu = interfacial_measure(st.def, weight);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n) rhs += psi[n].dot(mu.atoms[n]);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Mat2 cof = cofactor(cell_deformation_gradient(st.def, c));
    const auto nodes = g.cell_nodes(c);
    Mat2 grad_psi = Mat2::Zero();
    for (int k = 0; k < 4; ++k) grad_psi += psi[nodes[k]] * g.center_basis_gradients()[k].transpose();
    lhs += weight[c] * (cof.array() * grad_psi.array()).sum() * g.cell_area();
  }
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(InterfacialMeasure, IdentityHalfIndicatorHasInterfaceLength) {
  for (int n : {16, 32, 64}) {
    const Grid g(n, n, 1.0, 1.0);
    const double tv = interior_total_variation(interfacial_measure(cli::identity_deformation(g), left_half(g)));
    EXPECT_NEAR(tv, 1.0, 2.0 * g.hy()) << n;
  }
}

TEST(InterfacialMeasure, NansonFactorUnderStretch) {
  const Grid g(32, 32, 1.0, 1.0);
  const auto def = cli::affine_deformation(g, mat(2, 0, 0, 1));
  // |cof A e1| = 1: the deformed vertical interface keeps its length.
  EXPECT_NEAR(interior_total_variation(interfacial_measure(def, left_half(g))), 1.0, 2.0 * g.hy());
}

TEST(TotalVariation, Examples) {
  const Grid g(2, 2, 1.0, 1.0);
  VectorMeasure zero{g, std::vector<Vec2>(g.node_count(), Vec2::Zero())};
  EXPECT_EQ(total_variation(zero), 0.0);
  VectorMeasure one = zero;
  one.atoms[g.node(1, 1)] = Vec2(3.0, 4.0);
  EXPECT_EQ(total_variation(one), 5.0);
}

TEST(TotalVariation, AdditiveOverDisjointRectangles) {
  std::mt19937_64 rng(3);
  const Grid g(16, 16, 1.0, 1.0);
  const auto st = hypf::test::smooth_state(g, rng);
  const auto mu = interfacial_measure(st.def, left_half(g));
  const Rect a{0.0, 0.49, 0.0, 1.0}, b{0.51, 1.0, 0.0, 1.0}, both{0.0, 1.0, 0.0, 1.0};
  const Rect gap{0.49, 0.51, 0.0, 1.0};
  EXPECT_NEAR(total_variation(mu, a) + total_variation(mu, b) + total_variation(mu, gap), total_variation(mu, both),
              1e-12);
  EXPECT_NEAR(total_variation(mu, both), total_variation(mu), 1e-12);
}

TEST(DeformedPerimeter, SinglePhaseIsZero) {
  const Grid g(8, 8, 1.0, 1.0);
  const auto part = PhasePartition::from_function(g, 1, [](const Vec2&) { return 0; });
  EXPECT_EQ(deformed_perimeter(cli::identity_deformation(g), part).norm(), 0.0);
}

TEST(DeformedPerimeter, VerticalInterface) {
  const Grid g(8, 8, 1.0, 1.0);
  const auto part = cli::vertical_stripe(g, 0.5);
  const auto id = deformed_perimeter(cli::identity_deformation(g), part);
  EXPECT_EQ(id(0, 1), 1.0);
  EXPECT_EQ(id(1, 0), 1.0);
  EXPECT_EQ(id(0, 0), 0.0);
  const auto stretched = deformed_perimeter(cli::affine_deformation(g, mat(1, 0, 0, 3)), part);
  EXPECT_NEAR(stretched(0, 1), 3.0, 1e-12);
}

TEST(PhasePartition, Validation) {
  PhasePartition p{Grid(2, 2, 1.0, 1.0), 2, {0, 1, 1}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.labels = {0, 1, 2, 0};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.labels = {0, 1, 1, 0};
  EXPECT_NO_THROW(p.validate());
}

TEST(Pushforward, CenteredSquare) {
  const double side = 0.5;
  const Grid g(64, 64, 1.0, 1.0);
  auto square = [&](const Vec2& x) { return std::abs(x.x() - 0.5) < side / 2 && std::abs(x.y() - 0.5) < side / 2; };
  const auto id = pushforward_equality_check(cli::identity_deformation(g), indicator(g, square));
  EXPECT_NEAR(id.direct_area, 4 * side, 1e-12);
  EXPECT_NEAR(id.tv_measure, 4 * side, 4 * g.hx());
  const auto st = pushforward_equality_check(cli::affine_deformation(g, mat(2, 0, 0, 1)), indicator(g, square));
  EXPECT_NEAR(st.direct_area, 6 * side, 1e-12);
  EXPECT_NEAR(st.tv_measure, 6 * side, 8 * g.hx());
}

TEST(Pushforward, GapHalvesUnderRefinement) {
  std::vector<double> gaps;
  for (int n : {32, 64, 128}) {
    const Grid g(n, n, 1.0, 1.0);
    auto square = [](const Vec2& x) { return std::abs(x.x() - 0.5) < 0.25 && std::abs(x.y() - 0.5) < 0.25; };
    gaps.push_back(pushforward_equality_check(cli::affine_deformation(g, mat(2, 0, 0, 1)), indicator(g, square)).gap);
  }
  EXPECT_NEAR(gaps[1] / gaps[0], 0.5, 0.1);
  EXPECT_NEAR(gaps[2] / gaps[1], 0.5, 0.1);
}
